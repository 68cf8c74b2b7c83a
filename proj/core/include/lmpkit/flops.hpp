#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lmpkit/model.hpp"

namespace lmpkit {

struct LayerFlops {
    std::string name;
    std::uint64_t multiply_adds = 0;
};

/// Analytic multiply-add counts of one forward pass for a single image.
struct FlopReport {
    std::vector<LayerFlops> layers;  ///< conv layers, then "pool", then "fc"
    std::uint64_t pooling_multiply_adds = 0;
    std::uint64_t total_multiply_adds = 0;
    double pooling_overhead_fraction = 0.0;
};

/// conv: cout*cin*kh*kw*oh*ow; global pooling: c*h*w; linear: in*out.
FlopReport count_flops(const ModelArch& arch);

}  // namespace lmpkit
