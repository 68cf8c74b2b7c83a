#pragma once

#include <cstddef>
#include <span>

#include "lmpkit/tensor.hpp"

namespace lmpkit {

/// A parameter tensor together with its accumulated gradient.
struct GradPair {
    Tensor value;
    Tensor grad;

    GradPair() = default;
    explicit GradPair(Tensor v) : value(std::move(v)), grad(value.shape()) {}

    void zero_grad() { grad.fill(0.0); }
};

struct Conv2dGeometry {
    std::size_t stride = 1;
    std::size_t pad = 0;
};

/// Output spatial size of a convolution along one axis.
std::size_t conv_output_size(std::size_t in, std::size_t kernel, Conv2dGeometry geom);

/// Direct cross-correlation. x: [b,cin,h,w], k: [cout,cin,kh,kw] -> [b,cout,oh,ow].
Tensor conv2d_forward(const Tensor& x, const Tensor& k, Conv2dGeometry geom);

struct Conv2dGrads {
    Tensor grad_x;
    Tensor grad_k;
};

Conv2dGrads conv2d_backward(const Tensor& x, const Tensor& k, const Tensor& grad_out,
                            Conv2dGeometry geom);

/// Adds bias[c] to every spatial location of channel c. x: [b,c,h,w].
Tensor channel_bias_forward(const Tensor& x, const Tensor& bias);
/// Gradient w.r.t. the bias: sum of grad_out over batch and space.
Tensor channel_bias_backward(const Tensor& grad_out);

Tensor relu_fwd(const Tensor& x);
/// `x` is the forward input.
Tensor relu_bwd(const Tensor& x, const Tensor& grad_out);

/// x: [b,in], w: [out,in], bias: [out] -> [b,out]
Tensor linear_fwd(const Tensor& x, const Tensor& w, const Tensor& bias);

struct LinearGrads {
    Tensor grad_x;
    Tensor grad_w;
    Tensor grad_b;
};

LinearGrads linear_bwd(const Tensor& x, const Tensor& w, const Tensor& grad_out);

struct SoftmaxXent {
    double loss = 0.0;  ///< mean over the batch
    Tensor probs;       ///< [b,classes]
};

/// Numerically stable softmax + cross-entropy. Throws LabelError for labels
/// outside [0, classes).
SoftmaxXent softmax_xent_fwd(const Tensor& logits, std::span<const std::size_t> labels);
/// (p - onehot) / b
Tensor softmax_xent_bwd(const SoftmaxXent& fwd, std::span<const std::size_t> labels);

}  // namespace lmpkit
