#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "vinpaint/tensor.hpp"

namespace vinpaint {

// Gradient tape: forward ops append (name, backward closure) entries and
// backward() runs the closures in exact reverse recording order. The names
// of the last backward pass are kept so tests can assert the ordering.
class Tape {
  public:
    using BackFn = std::function<void()>;

    void record(std::string name, BackFn fn) {
        entries_.emplace_back(std::move(name), std::move(fn));
    }

    // Runs all recorded closures, last recorded first, and clears the tape.
    void run_reverse() {
        last_order_.clear();
        last_order_.reserve(entries_.size());
        for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
            last_order_.push_back(it->first);
            it->second();
        }
        entries_.clear();
    }

    void clear() { entries_.clear(); }
    std::size_t size() const { return entries_.size(); }
    const std::vector<std::string>& last_order() const { return last_order_; }

  private:
    std::vector<std::pair<std::string, BackFn>> entries_;
    std::vector<std::string> last_order_;
};

// Seeds d(loss)/d(loss) = 1 and propagates through the tape.
template <typename T>
void backward(Tape& tape, Tensor<T> loss) {
    if (!loss.requires_grad())
        throw dim_error("backward: loss does not require grad");
    loss.ensure_grad();
    T* g = loss.grad();
    for (std::size_t i = 0; i < loss.numel(); ++i) g[i] += T(1);
    tape.run_reverse();
}

} // namespace vinpaint
