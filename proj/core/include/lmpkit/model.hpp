#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lmpkit/geometry.hpp"
#include "lmpkit/ops.hpp"
#include "lmpkit/pooling.hpp"
#include "lmpkit/tensor.hpp"

namespace lmpkit {

struct ConvLayerSpec {
    std::size_t in_channels = 1;
    std::size_t out_channels = 1;
    std::size_t kernel = 3;
    std::size_t stride = 1;
    std::size_t pad = 1;

    Conv2dGeometry geometry() const { return {stride, pad}; }
    bool operator==(const ConvLayerSpec&) const = default;
};

/// conv -> ReLU stack, global pooling, linear classifier.
struct ModelArch {
    std::size_t input_channels = 1;
    std::size_t input_height = 32;
    std::size_t input_width = 32;
    std::vector<ConvLayerSpec> convs;
    std::size_t num_classes = 4;
    PoolingKernel pooling;

    /// 1->16 (s1) -> 32 (s2) -> 32 (s2), all 3x3 pad 1: 32x32 in, 8x8x32 out.
    static ModelArch toy_default(std::size_t num_classes = 4, PoolingKernel pooling = PoolingKernel::leaky_max());

    void validate() const;

    /// [c, h, w] of the final conv feature map.
    Shape feature_shape() const;

    /// Receptive-field centre of each feature cell in input pixels. Cell i
    /// of the last layer is centred at i * stride + offset.
    GridToPixel grid_map() const;

    bool operator==(const ModelArch&) const = default;
};

struct Parameter {
    std::string name;
    GradPair tensor;
};

/// Cached activations of one forward pass over a batch.
struct ForwardPass {
    std::vector<Tensor> conv_inputs;  ///< input of conv layer i
    std::vector<Tensor> pre_relu;     ///< conv_i(x) + bias_i
    Tensor features;                  ///< [b, c, fh, fw] after the last ReLU
    PoolResult pooled;
    Tensor logits;                    ///< [b, classes]
};

class ToyModel {
public:
    ToyModel() = default;
    /// He-normal weights, zero biases, drawn from `init_seed`.
    ToyModel(ModelArch arch, std::uint64_t init_seed);

    const ModelArch& arch() const noexcept { return arch_; }
    ModelArch& arch() noexcept { return arch_; }

    std::vector<Parameter>& parameters() noexcept { return params_; }
    const std::vector<Parameter>& parameters() const noexcept { return params_; }
    Parameter& parameter(const std::string& name);
    const Parameter& parameter(const std::string& name) const;
    std::size_t parameter_count() const;

    /// images: [b, ch, h, w]
    ForwardPass forward(const Tensor& images) const;

    /// Final conv features of one image [ch,h,w] -> [c, fh, fw].
    Tensor features(const Tensor& image) const;

    /// Gradients of the loss w.r.t. every parameter (same order as
    /// parameters()), given dL/dlogits.
    std::vector<Tensor> backward(const ForwardPass& pass, const Tensor& grad_logits) const;

    /// dL/dfeatures given dL/dlogits; exposed for gradient analysis.
    Tensor feature_gradient(const ForwardPass& pass, const Tensor& grad_logits) const;

    bool all_parameters_finite() const;

private:
    std::size_t conv_weight(std::size_t i) const { return 2 * i; }
    std::size_t conv_bias(std::size_t i) const { return 2 * i + 1; }
    std::size_t fc_weight() const { return 2 * arch_.convs.size(); }
    std::size_t fc_bias() const { return 2 * arch_.convs.size() + 1; }

    ModelArch arch_;
    std::vector<Parameter> params_;
};

/// Adds a batch axis: [ch,h,w] -> [1,ch,h,w].
Tensor as_batch(const Tensor& image);

}  // namespace lmpkit
