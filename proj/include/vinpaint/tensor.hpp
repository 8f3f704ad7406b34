#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "vinpaint/common.hpp"

namespace vinpaint {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& s);
std::string shape_str(const Shape& s);
bool shape_eq(const Shape& a, const Shape& b);

namespace detail {

template <typename T>
struct TensorImpl {
    Shape shape;
    std::vector<T> data;
    bool requires_grad = false;
    std::vector<T> grad; // empty until first accumulation; same length as data afterwards
};

} // namespace detail

/// Dense row-major N-d array. Value-semantic handle over shared immutable
/// storage: copies alias the same buffer; ops allocate fresh outputs.
/// The gradient buffer is the one mutable part and is only written by the
/// owning tape during backward (or explicitly zeroed between steps).
template <typename T>
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(Shape shape, T fill = T(0))
        : impl_(std::make_shared<detail::TensorImpl<T>>()) {
        impl_->shape = std::move(shape);
        impl_->data.assign(shape_numel(impl_->shape), fill);
    }

    Tensor(Shape shape, std::vector<T> data)
        : impl_(std::make_shared<detail::TensorImpl<T>>()) {
        if (shape_numel(shape) != data.size())
            throw dim_error("tensor data length " + std::to_string(data.size()) +
                            " does not match shape " + shape_str(shape));
        impl_->shape = std::move(shape);
        impl_->data = std::move(data);
    }

    static Tensor scalar(T v) { return Tensor(Shape{}, std::vector<T>{v}); }
    static Tensor zeros(Shape s) { return Tensor(std::move(s), T(0)); }
    static Tensor full(Shape s, T v) { return Tensor(std::move(s), v); }

    bool defined() const { return impl_ != nullptr; }
    const Shape& shape() const { return impl_->shape; }
    std::size_t rank() const { return impl_->shape.size(); }
    std::size_t numel() const { return impl_->data.size(); }
    std::size_t extent(std::size_t axis) const { return impl_->shape.at(axis); }

    T* data() { return impl_->data.data(); }
    const T* data() const { return impl_->data.data(); }
    std::vector<T>& vec() { return impl_->data; }
    const std::vector<T>& vec() const { return impl_->data; }

    bool requires_grad() const { return impl_ && impl_->requires_grad; }
    void set_requires_grad(bool on) { impl_->requires_grad = on; }

    /// Gradient buffer, or nullptr while no gradient has been accumulated.
    T* grad() { return impl_->grad.empty() ? nullptr : impl_->grad.data(); }
    const T* grad() const { return impl_->grad.empty() ? nullptr : impl_->grad.data(); }

    void ensure_grad() {
        if (impl_->grad.size() != impl_->data.size())
            impl_->grad.assign(impl_->data.size(), T(0));
    }
    void zero_grad() {
        if (!impl_->grad.empty()) impl_->grad.assign(impl_->data.size(), T(0));
    }

    T item() const {
        if (numel() != 1) throw dim_error("item() on tensor of " + std::to_string(numel()) + " elements");
        return impl_->data[0];
    }

    template <typename... Ix>
    T& at(Ix... ix) {
        return impl_->data[flat_index({static_cast<std::size_t>(ix)...})];
    }
    template <typename... Ix>
    const T& at(Ix... ix) const {
        return impl_->data[flat_index({static_cast<std::size_t>(ix)...})];
    }

    /// Deep copy (fresh storage, no grad, keeps requires_grad flag off).
    Tensor clone() const {
        Tensor c(impl_->shape, impl_->data);
        return c;
    }

    template <typename U>
    Tensor<U> cast() const {
        std::vector<U> out(impl_->data.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<U>(impl_->data[i]);
        return Tensor<U>(impl_->shape, std::move(out));
    }

    /// Storage identity; used by the tape to tell tensors apart.
    const void* id() const { return impl_.get(); }
    std::shared_ptr<detail::TensorImpl<T>> impl() const { return impl_; }

private:
    std::size_t flat_index(std::initializer_list<std::size_t> ix) const {
        if (ix.size() != impl_->shape.size())
            throw dim_error("index rank " + std::to_string(ix.size()) + " vs tensor rank " +
                            std::to_string(impl_->shape.size()));
        std::size_t flat = 0;
        std::size_t axis = 0;
        for (std::size_t i : ix) {
            if (i >= impl_->shape[axis])
                throw dim_error("index " + std::to_string(i) + " out of range on axis " +
                                std::to_string(axis));
            flat = flat * impl_->shape[axis] + i;
            ++axis;
        }
        return flat;
    }

    std::shared_ptr<detail::TensorImpl<T>> impl_;
};

/// Throw numeric_error if any element is NaN/Inf. `op` names the producer.
template <typename T>
void ensure_finite(const Tensor<T>& t, const char* op);

// --- TSR1 container -------------------------------------------------------
// magic "TSR1", u8 dtype (0=f32, 1=f64), u8 rank, rank x u64 LE extents,
// row-major little-endian payload. Byte layout is normative.

template <typename T>
void save_tsr(const std::string& path, const Tensor<T>& t);

/// Loads a TSR1 file; converts the payload when the stored dtype differs from T.
template <typename T>
Tensor<T> load_tsr(const std::string& path);

/// Peek at dtype byte (0=f32, 1=f64) without loading the payload.
int tsr_dtype(const std::string& path);

} // namespace vinpaint
