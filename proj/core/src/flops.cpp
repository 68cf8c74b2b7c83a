#include "lmpkit/flops.hpp"

namespace lmpkit {

FlopReport count_flops(const ModelArch& arch) {
    arch.validate();
    FlopReport r;
    std::size_t h = arch.input_height, w = arch.input_width;
    for (std::size_t i = 0; i < arch.convs.size(); ++i) {
        const auto& c = arch.convs[i];
        h = conv_output_size(h, c.kernel, c.geometry());
        w = conv_output_size(w, c.kernel, c.geometry());
        r.layers.push_back({"conv" + std::to_string(i),
                            static_cast<std::uint64_t>(c.out_channels) * c.in_channels * c.kernel * c.kernel * h * w});
    }
    const Shape f = arch.feature_shape();
    r.pooling_multiply_adds = static_cast<std::uint64_t>(f[0]) * f[1] * f[2];
    r.layers.push_back({"pool", r.pooling_multiply_adds});
    r.layers.push_back({"fc", static_cast<std::uint64_t>(f[0]) * arch.num_classes});
    for (const auto& l : r.layers) r.total_multiply_adds += l.multiply_adds;
    r.pooling_overhead_fraction =
        static_cast<double>(r.pooling_multiply_adds) / static_cast<double>(r.total_multiply_adds);
    return r;
}

}  // namespace lmpkit
