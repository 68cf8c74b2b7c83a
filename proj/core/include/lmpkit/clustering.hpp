#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lmpkit/geometry.hpp"
#include "lmpkit/tensor.hpp"

namespace lmpkit {

struct ClusteringConfig {
    std::size_t k = 5;        ///< maximum number of predictions
    std::size_t n = 3;        ///< voting iterations per prediction
    double thr = 3.0;         ///< erase radius in grid cells
    double dist_floor = 0.5;  ///< lower clamp on the distance in 1/d
    DistanceMetric metric = DistanceMetric::Euclidean;

    void validate() const;
};

struct ClusteringOutput {
    Tensor heatmaps;               ///< [k', h, w]
    std::vector<GridPoint> peaks;  ///< argmax of each heatmap
    Tensor votes;                  ///< W, [c, k]; excluded channels hold 0

    std::size_t size() const noexcept { return peaks.size(); }
};

/// Keeps only the maximum of each channel (set to 1). Channels whose maximum
/// is <= 0 become all-zero. x: [c,h,w].
Tensor binarize_proposals(const Tensor& x);

/// Distance between the argmax positions of two [h,w] maps. Throws
/// ExcludedChannel when `x_ch` is identically zero.
double channel_peak_distance(const Tensor& y, const Tensor& x_ch,
                             DistanceMetric metric = DistanceMetric::Euclidean);

GridPoint peak_of(std::span<const double> map, std::size_t width);

/// Greedy distance-weighted voting over binarized proposals. W starts at 1
/// for every call; nothing persists across images.
ClusteringOutput cluster(const Tensor& x, const ClusteringConfig& cfg);

std::string to_string(DistanceMetric m);
DistanceMetric parse_distance_metric(const std::string& name);

}  // namespace lmpkit
