#include "lmpkit/model.hpp"

#include <cmath>
#include <random>

namespace lmpkit {

ModelArch ModelArch::toy_default(std::size_t num_classes, PoolingKernel pooling) {
    ModelArch a;
    a.convs = {{1, 16, 3, 1, 1}, {16, 32, 3, 2, 1}, {32, 32, 3, 2, 1}};
    a.num_classes = num_classes;
    a.pooling = pooling;
    return a;
}

void ModelArch::validate() const {
    if (convs.empty()) throw ValueError("model needs at least one conv layer");
    if (num_classes < 2) throw ValueError("model needs at least two classes");
    pooling.validate();
    std::size_t ch = input_channels;
    for (std::size_t i = 0; i < convs.size(); ++i) {
        if (convs[i].in_channels != ch) {
            throw ValueError("conv" + std::to_string(i) + " expects " + std::to_string(convs[i].in_channels) +
                             " input channels, previous layer yields " + std::to_string(ch));
        }
        if (convs[i].out_channels == 0 || convs[i].stride == 0) throw ValueError("degenerate conv layer");
        ch = convs[i].out_channels;
    }
    feature_shape();
}

Shape ModelArch::feature_shape() const {
    std::size_t h = input_height, w = input_width;
    for (const auto& c : convs) {
        h = conv_output_size(h, c.kernel, c.geometry());
        w = conv_output_size(w, c.kernel, c.geometry());
    }
    return {convs.empty() ? input_channels : convs.back().out_channels, h, w};
}

GridToPixel ModelArch::grid_map() const {
    // centre(i) = stride_total * i + offset, composed layer by layer:
    // out cell o of a layer sees inputs o*s - p + t, centred at o*s - p + (k-1)/2.
    double stride = 1.0, offset = 0.0;
    for (const auto& c : convs) {
        offset += stride * ((static_cast<double>(c.kernel) - 1.0) / 2.0 - static_cast<double>(c.pad));
        stride *= static_cast<double>(c.stride);
    }
    return {stride, offset};
}

ToyModel::ToyModel(ModelArch arch, std::uint64_t init_seed) : arch_(std::move(arch)) {
    arch_.validate();
    std::mt19937_64 rng(init_seed);
    auto he = [&](Shape shape, std::size_t fan_in) {
        std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
        Tensor t(std::move(shape));
        for (double& v : t.data()) v = dist(rng);
        return t;
    };
    for (std::size_t i = 0; i < arch_.convs.size(); ++i) {
        const auto& c = arch_.convs[i];
        params_.push_back({"conv" + std::to_string(i) + ".weight",
                           GradPair(he({c.out_channels, c.in_channels, c.kernel, c.kernel},
                                       c.in_channels * c.kernel * c.kernel))});
        params_.push_back({"conv" + std::to_string(i) + ".bias", GradPair(Tensor({c.out_channels}))});
    }
    const std::size_t c = arch_.feature_shape()[0];
    params_.push_back({"fc.weight", GradPair(he({arch_.num_classes, c}, c))});
    params_.push_back({"fc.bias", GradPair(Tensor({arch_.num_classes}))});
}

Parameter& ToyModel::parameter(const std::string& name) {
    for (auto& p : params_) {
        if (p.name == name) return p;
    }
    throw ValueError("no parameter named '" + name + "'");
}

const Parameter& ToyModel::parameter(const std::string& name) const {
    return const_cast<ToyModel*>(this)->parameter(name);
}

std::size_t ToyModel::parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.tensor.value.size();
    return n;
}

ForwardPass ToyModel::forward(const Tensor& images) const {
    if (images.rank() != 4 || images.dim(1) != arch_.input_channels || images.dim(2) != arch_.input_height ||
        images.dim(3) != arch_.input_width) {
        throw SizeError("model input " + shape_to_string(images.shape()) + " does not match the architecture");
    }
    ForwardPass pass;
    Tensor x = images;
    for (std::size_t i = 0; i < arch_.convs.size(); ++i) {
        pass.conv_inputs.push_back(x);
        Tensor z = conv2d_forward(x, params_[conv_weight(i)].tensor.value, arch_.convs[i].geometry());
        z = channel_bias_forward(z, params_[conv_bias(i)].tensor.value);
        x = relu_fwd(z);
        pass.pre_relu.push_back(std::move(z));
    }
    pass.features = std::move(x);
    pass.pooled = pool_forward(pass.features, arch_.pooling);
    pass.logits = linear_fwd(pass.pooled.out, params_[fc_weight()].tensor.value, params_[fc_bias()].tensor.value);
    return pass;
}

Tensor ToyModel::features(const Tensor& image) const {
    const ForwardPass pass = forward(as_batch(image));
    return pass.features.slice(0);
}

Tensor ToyModel::feature_gradient(const ForwardPass& pass, const Tensor& grad_logits) const {
    const LinearGrads fc = linear_bwd(pass.pooled.out, params_[fc_weight()].tensor.value, grad_logits);
    return pool_backward(fc.grad_x, pass.pooled.ctx, arch_.pooling);
}

std::vector<Tensor> ToyModel::backward(const ForwardPass& pass, const Tensor& grad_logits) const {
    std::vector<Tensor> grads(params_.size());
    const LinearGrads fc = linear_bwd(pass.pooled.out, params_[fc_weight()].tensor.value, grad_logits);
    grads[fc_weight()] = fc.grad_w;
    grads[fc_bias()] = fc.grad_b;
    Tensor g = pool_backward(fc.grad_x, pass.pooled.ctx, arch_.pooling);
    for (std::size_t i = arch_.convs.size(); i-- > 0;) {
        g = relu_bwd(pass.pre_relu[i], g);
        grads[conv_bias(i)] = channel_bias_backward(g);
        Conv2dGrads cg = conv2d_backward(pass.conv_inputs[i], params_[conv_weight(i)].tensor.value, g,
                                         arch_.convs[i].geometry());
        grads[conv_weight(i)] = std::move(cg.grad_k);
        g = std::move(cg.grad_x);
    }
    return grads;
}

bool ToyModel::all_parameters_finite() const {
    for (const auto& p : params_) {
        if (!all_finite(p.tensor.value.data())) return false;
    }
    return true;
}

Tensor as_batch(const Tensor& image) {
    Shape s = image.shape();
    s.insert(s.begin(), 1);
    return reshape(image, std::move(s));
}

}  // namespace lmpkit
