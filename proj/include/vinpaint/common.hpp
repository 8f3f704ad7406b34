#pragma once

#include <stdexcept>
#include <string>

namespace vinpaint {

/// Shape/axis contract violations (bad extents, rank mismatch, axis out of range).
struct dim_error : std::invalid_argument {
    explicit dim_error(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Non-finite values or failed numeric preconditions detected at runtime.
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad configuration: unknown keys, unparsable values, missing files.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace vinpaint
