#pragma once

#include <cstddef>
#include <string>

#include "lmpkit/clustering.hpp"
#include "lmpkit/geometry.hpp"
#include "lmpkit/tensor.hpp"

namespace lmpkit {

enum class MaskShape { Disk, Square };

std::string to_string(MaskShape s);
MaskShape parse_mask_shape(const std::string& name);

struct MaskSpec {
    PixelPoint center;
    double radius = 4.0;
    MaskShape mode = MaskShape::Square;
};

/// Binary [h,w] map: 0 inside the region around `center`, 1 elsewhere.
/// Square zeroes |dr| <= r and |dc| <= r; Disk zeroes dr^2 + dc^2 <= r^2.
Tensor make_mask(const MaskSpec& spec, std::size_t height, std::size_t width);

/// img: [ch,h,w] or [h,w]; mask broadcast over channels.
Tensor apply_mask(const Tensor& img, const Tensor& mask);

/// Merges the two networks' predictions: the primary's first peak, then
/// replica[0], primary[1], replica[1], ... skipping any candidate closer
/// than `thr` to an accepted peak, until `k` peaks are accepted.
ClusteringOutput fuse_predictions(const ClusteringOutput& primary, const ClusteringOutput& replica,
                                  std::size_t k, double thr,
                                  DistanceMetric metric = DistanceMetric::Euclidean);

}  // namespace lmpkit
