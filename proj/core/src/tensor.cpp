#include "lmpkit/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace lmpkit {

std::size_t shape_product(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

std::string shape_to_string(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ',';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)), data_(shape_product(shape_), 0.0) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_product(shape_) != data_.size()) {
        throw SizeError("tensor shape " + shape_to_string(shape_) + " needs " +
                        std::to_string(shape_product(shape_)) + " values, got " +
                        std::to_string(data_.size()));
    }
}

Tensor Tensor::full(Shape shape, double value) {
    Tensor t(std::move(shape));
    t.fill(value);
    return t;
}

Tensor Tensor::from(std::initializer_list<double> values) {
    return Tensor({values.size()}, std::vector<double>(values));
}

std::size_t Tensor::dim(std::size_t axis) const {
    if (axis >= shape_.size()) {
        throw SizeError("axis " + std::to_string(axis) + " out of range for shape " +
                        shape_to_string(shape_));
    }
    return shape_[axis];
}

std::size_t Tensor::offset(std::span<const std::size_t> index) const {
    if (index.size() != shape_.size()) {
        throw SizeError("index rank " + std::to_string(index.size()) + " does not match shape " +
                        shape_to_string(shape_));
    }
    std::size_t flat = 0;
    for (std::size_t a = 0; a < shape_.size(); ++a) {
        if (index[a] >= shape_[a]) {
            throw SizeError("index out of bounds on axis " + std::to_string(a) + " of shape " +
                            shape_to_string(shape_));
        }
        flat = flat * shape_[a] + index[a];
    }
    return flat;
}

std::span<const double> Tensor::slab(std::size_t leading) const {
    const std::size_t n = shape_.empty() ? 0 : data_.size() / shape_[0];
    if (shape_.empty() || leading >= shape_[0]) throw SizeError("slab index out of range");
    return std::span<const double>(data_).subspan(leading * n, n);
}

std::span<double> Tensor::slab(std::size_t leading) {
    const std::size_t n = shape_.empty() ? 0 : data_.size() / shape_[0];
    if (shape_.empty() || leading >= shape_[0]) throw SizeError("slab index out of range");
    return std::span<double>(data_).subspan(leading * n, n);
}

Tensor Tensor::slice(std::size_t leading) const {
    auto block = slab(leading);
    return Tensor(Shape(shape_.begin() + 1, shape_.end()),
                  std::vector<double>(block.begin(), block.end()));
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

Tensor reshape(const Tensor& t, Shape new_shape) {
    if (shape_product(new_shape) != t.size()) {
        throw SizeError("cannot reshape " + shape_to_string(t.shape()) + " to " +
                        shape_to_string(new_shape));
    }
    return Tensor(std::move(new_shape), t.values());
}

Tensor matvec(const Tensor& m, const Tensor& v) {
    if (m.rank() != 2 || v.rank() != 1 || m.dim(1) != v.dim(0)) {
        throw SizeError("matvec shape mismatch: " + shape_to_string(m.shape()) + " x " +
                        shape_to_string(v.shape()));
    }
    const std::size_t rows = m.dim(0);
    const std::size_t cols = m.dim(1);
    Tensor out({rows});
    for (std::size_t i = 0; i < rows; ++i) {
        const auto row = m.data().subspan(i * cols, cols);
        double acc = 0.0;
        for (std::size_t j = 0; j < cols; ++j) acc += row[j] * v[j];
        out[i] = acc;
    }
    check_finite(out, "matvec");
    return out;
}

std::size_t argmax(std::span<const double> values) {
    if (values.empty()) throw SizeError("argmax of an empty sequence");
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = i;
    }
    return best;
}

double max_value(std::span<const double> values) { return values[argmax(values)]; }

bool all_finite(std::span<const double> values) {
    return std::all_of(values.begin(), values.end(), [](double x) { return std::isfinite(x); });
}

void check_finite([[maybe_unused]] const Tensor& t, [[maybe_unused]] const char* where) {
#ifndef NDEBUG
    if (!all_finite(t.data())) throw NonFiniteError(std::string("non-finite value after ") + where);
#endif
}

Tensor stack(std::span<const Tensor> items) {
    if (items.empty()) throw SizeError("cannot stack zero tensors");
    Shape shape = items.front().shape();
    std::vector<double> data;
    data.reserve(items.size() * items.front().size());
    for (const auto& t : items) {
        if (t.shape() != shape) throw SizeError("stack: mismatched shapes");
        data.insert(data.end(), t.data().begin(), t.data().end());
    }
    shape.insert(shape.begin(), items.size());
    return Tensor(std::move(shape), std::move(data));
}

}  // namespace lmpkit
