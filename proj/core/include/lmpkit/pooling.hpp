#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lmpkit/tensor.hpp"

namespace lmpkit {

enum class PoolingKind { Average, Max, LeakyMax };

/// Global pooling expressed as an inner product with a pooling vector:
///   Average   w_i = 1/hw
///   Max       w_i = 1 at argmax, 0 elsewhere
///   LeakyMax  w_i = 1 at argmax, -epsilon elsewhere
struct PoolingKernel {
    PoolingKind kind = PoolingKind::LeakyMax;
    double epsilon = 0.1;  ///< only read for LeakyMax

    static PoolingKernel average() { return {PoolingKind::Average, 0.0}; }
    static PoolingKernel max() { return {PoolingKind::Max, 0.0}; }
    static PoolingKernel leaky_max(double eps = 0.1) { return {PoolingKind::LeakyMax, eps}; }

    /// Throws ValueError unless epsilon > 0 for LeakyMax.
    void validate() const;

    /// "avg", "max", "lmp(eps=0.1)"
    std::string label() const;

    bool operator==(const PoolingKernel&) const = default;
};

std::string to_string(PoolingKind kind);
/// Accepts "avg"/"average", "max", "lmp"/"leaky_max".
PoolingKind parse_pooling_kind(const std::string& name);

/// Saved state of one forward call: the argmax of every (batch, channel) row.
struct PoolingContext {
    std::size_t batch = 0;
    std::size_t channels = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<std::size_t> argmax_index;  ///< batch*channels entries, each < spatial_size()

    std::size_t spatial_size() const noexcept { return height * width; }
};

/// Pooling vector for one flattened feature-map row. Ties in the argmax go
/// to the lowest flat index.
Tensor make_pooling_vector(const PoolingKernel& kernel, std::span<const double> x_flat);
Tensor make_pooling_vector(const PoolingKernel& kernel, const Tensor& x_flat);

struct PoolResult {
    Tensor out;  ///< [b,c]
    PoolingContext ctx;
};

/// x: [b,c,h,w] -> [b,c]; fused single-pass loop.
PoolResult pool_forward(const Tensor& x, const PoolingKernel& kernel);

/// Same result computed literally: reshape to [bc, hw] and take one matvec
/// per row with that row's pooling vector.
PoolResult pool_forward_matvec(const Tensor& x, const PoolingKernel& kernel);

/// Distributes grad_out[b,c] over the spatial map using the pooling-vector
/// weights, with the forward argmax held fixed.
Tensor pool_backward(const Tensor& grad_out, const PoolingContext& ctx, const PoolingKernel& kernel);

}  // namespace lmpkit
