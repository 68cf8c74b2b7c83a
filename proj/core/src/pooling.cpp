#include "lmpkit/pooling.hpp"

#include <cmath>
#include <sstream>

namespace lmpkit {

void PoolingKernel::validate() const {
    if (kind == PoolingKind::LeakyMax && !(epsilon > 0.0 && std::isfinite(epsilon))) {
        throw ValueError("leaky max pooling needs epsilon > 0");
    }
}

std::string PoolingKernel::label() const {
    if (kind != PoolingKind::LeakyMax) return to_string(kind);
    std::ostringstream os;
    os << "lmp(eps=" << epsilon << ')';
    return os.str();
}

std::string to_string(PoolingKind kind) {
    switch (kind) {
        case PoolingKind::Average: return "avg";
        case PoolingKind::Max: return "max";
        case PoolingKind::LeakyMax: return "lmp";
    }
    return "?";
}

PoolingKind parse_pooling_kind(const std::string& name) {
    if (name == "avg" || name == "average") return PoolingKind::Average;
    if (name == "max") return PoolingKind::Max;
    if (name == "lmp" || name == "leaky_max") return PoolingKind::LeakyMax;
    throw ValueError("unknown pooling kind '" + name + "' (expected avg, max or lmp)");
}

namespace {

// Weight the pooling vector assigns to position i of a row whose argmax is `top`.
inline double pooling_weight(const PoolingKernel& k, std::size_t i, std::size_t top, std::size_t hw) {
    switch (k.kind) {
        case PoolingKind::Average: return 1.0 / static_cast<double>(hw);
        case PoolingKind::Max: return i == top ? 1.0 : 0.0;
        case PoolingKind::LeakyMax: return i == top ? 1.0 : -k.epsilon;
    }
    return 0.0;
}

PoolingContext make_context(const Tensor& x) {
    if (x.rank() != 4) throw SizeError("pooling expects [b,c,h,w], got " + shape_to_string(x.shape()));
    PoolingContext ctx{x.dim(0), x.dim(1), x.dim(2), x.dim(3), {}};
    if (ctx.spatial_size() == 0) throw SizeError("pooling over an empty spatial map");
    ctx.argmax_index.resize(ctx.batch * ctx.channels);
    return ctx;
}

}  // namespace

Tensor make_pooling_vector(const PoolingKernel& kernel, std::span<const double> x_flat) {
    kernel.validate();
    if (x_flat.empty()) throw SizeError("pooling vector of an empty row");
    const std::size_t hw = x_flat.size();
    const std::size_t top = kernel.kind == PoolingKind::Average ? 0 : argmax(x_flat);
    Tensor w({hw});
    for (std::size_t i = 0; i < hw; ++i) w[i] = pooling_weight(kernel, i, top, hw);
    return w;
}

Tensor make_pooling_vector(const PoolingKernel& kernel, const Tensor& x_flat) {
    return make_pooling_vector(kernel, x_flat.data());
}

PoolResult pool_forward(const Tensor& x, const PoolingKernel& kernel) {
    kernel.validate();
    PoolResult r{Tensor(), make_context(x)};
    const std::size_t rows = r.ctx.batch * r.ctx.channels;
    const std::size_t hw = r.ctx.spatial_size();
    r.out = Tensor({r.ctx.batch, r.ctx.channels});
    for (std::size_t row = 0; row < rows; ++row) {
        const auto v = x.data().subspan(row * hw, hw);
        const std::size_t top = argmax(v);
        r.ctx.argmax_index[row] = top;
        double value = 0.0;
        switch (kernel.kind) {
            case PoolingKind::Average: {
                double sum = 0.0;
                for (double e : v) sum += e;
                value = sum / static_cast<double>(hw);
                break;
            }
            case PoolingKind::Max: value = v[top]; break;
            case PoolingKind::LeakyMax: {
                double rest = 0.0;
                for (std::size_t i = 0; i < hw; ++i) {
                    if (i != top) rest += v[i];
                }
                value = v[top] - kernel.epsilon * rest;
                break;
            }
        }
        r.out[row] = value;
    }
    check_finite(r.out, "pool_forward");
    return r;
}

PoolResult pool_forward_matvec(const Tensor& x, const PoolingKernel& kernel) {
    kernel.validate();
    PoolResult r{Tensor(), make_context(x)};
    const std::size_t rows = r.ctx.batch * r.ctx.channels;
    const std::size_t hw = r.ctx.spatial_size();
    const Tensor matrix = reshape(x, {rows, hw});
    r.out = Tensor({r.ctx.batch, r.ctx.channels});
    for (std::size_t row = 0; row < rows; ++row) {
        const auto v = matrix.data().subspan(row * hw, hw);
        r.ctx.argmax_index[row] = argmax(v);
        const Tensor single({1, hw}, std::vector<double>(v.begin(), v.end()));
        r.out[row] = matvec(single, make_pooling_vector(kernel, v))[0];
    }
    return r;
}

Tensor pool_backward(const Tensor& grad_out, const PoolingContext& ctx, const PoolingKernel& kernel) {
    kernel.validate();
    if (grad_out.shape() != Shape{ctx.batch, ctx.channels} ||
        ctx.argmax_index.size() != ctx.batch * ctx.channels) {
        throw ContextError("pool_backward: grad_out " + shape_to_string(grad_out.shape()) +
                           " does not match the saved forward context");
    }
    const std::size_t hw = ctx.spatial_size();
    Tensor g({ctx.batch, ctx.channels, ctx.height, ctx.width});
    for (std::size_t row = 0; row < ctx.batch * ctx.channels; ++row) {
        const std::size_t top = ctx.argmax_index[row];
        if (top >= hw) throw ContextError("pool_backward: saved argmax out of range");
        const double go = grad_out[row];
        auto dst = g.data().subspan(row * hw, hw);
        for (std::size_t i = 0; i < hw; ++i) dst[i] = go * pooling_weight(kernel, i, top, hw);
    }
    check_finite(g, "pool_backward");
    return g;
}

}  // namespace lmpkit
