#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "lmpkit/errors.hpp"

namespace lmpkit {

using Shape = std::vector<std::size_t>;

std::size_t shape_product(const Shape& shape);
std::string shape_to_string(const Shape& shape);

/// Dense row-major array of doubles.
///
/// The flat buffer always holds exactly `shape_product(shape())` values.
/// Debug builds additionally verify after each public operation that no
/// NaN/Inf has been produced (see `check_finite`).
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape);
    Tensor(Shape shape, std::vector<double> data);

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
    static Tensor full(Shape shape, double value);
    static Tensor from(std::initializer_list<double> values);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t size() const noexcept { return data_.size(); }
    std::size_t dim(std::size_t axis) const;
    bool empty() const noexcept { return data_.empty(); }

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }
    const std::vector<double>& values() const noexcept { return data_; }

    double& operator[](std::size_t flat) { return data_[flat]; }
    double operator[](std::size_t flat) const { return data_[flat]; }

    /// Row-major flat offset of a multi-index. Bounds-checked.
    std::size_t offset(std::span<const std::size_t> index) const;

    template <typename... I>
    double& at(I... index) {
        const std::size_t idx[] = {static_cast<std::size_t>(index)...};
        return data_[offset(idx)];
    }
    template <typename... I>
    double at(I... index) const {
        const std::size_t idx[] = {static_cast<std::size_t>(index)...};
        return data_[offset(idx)];
    }

    /// View of the contiguous block selected by fixing the leading axis.
    std::span<const double> slab(std::size_t leading) const;
    std::span<double> slab(std::size_t leading);

    Tensor slice(std::size_t leading) const;

    void fill(double value);

    bool operator==(const Tensor& other) const = default;

private:
    Shape shape_;
    std::vector<double> data_;
};

/// Returns a tensor with the same flat data and a new shape.
Tensor reshape(const Tensor& t, Shape new_shape);

/// out[i] = sum_j m[i,j] * v[j]
Tensor matvec(const Tensor& m, const Tensor& v);

/// Index of the largest element; ties resolve to the lowest index.
std::size_t argmax(std::span<const double> values);

double max_value(std::span<const double> values);

bool all_finite(std::span<const double> values);

/// Throws NonFiniteError when `t` holds a NaN or Inf. Compiled to a no-op
/// in NDEBUG builds.
void check_finite(const Tensor& t, const char* where);

/// Stacks equally-shaped tensors along a new leading axis.
Tensor stack(std::span<const Tensor> items);

}  // namespace lmpkit
