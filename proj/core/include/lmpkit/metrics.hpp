#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lmpkit/geometry.hpp"
#include "lmpkit/tensor.hpp"

namespace lmpkit {

/// Mean Shannon entropy (nats) of the channels of a [c,h,w] stack, each
/// channel clamped at 0 and L1-normalized. All-zero channels are skipped;
/// throws EmptyActivation if every channel is zero.
double feature_entropy(const Tensor& x);

struct EntropySummary {
    double mean = 0.0;
    double stddev = 0.0;  ///< population standard deviation
    std::size_t count = 0;
};

EntropySummary summarize(std::span<const double> values);

enum class MatchMode { GtReusable, GtConsumed };

std::string to_string(MatchMode m);
MatchMode parse_match_mode(const std::string& name);

struct PckConfig {
    double alpha = 0.1;  ///< fraction of the shorter image side
    MatchMode match_mode = MatchMode::GtConsumed;

    void validate() const;
};

struct ImageSize {
    std::size_t height = 0;
    std::size_t width = 0;
};

struct PckReport {
    std::vector<double> per_keypoint_acc;  ///< column i: fraction of images where prediction i matched
    double average = 0.0;
    std::size_t num_images = 0;
};

/// Greedy-matching PCK. Prediction i of every image feeds column i; an
/// image with fewer than `k` predictions scores the missing ones as wrong.
PckReport greedy_pck(std::span<const std::vector<PixelPoint>> preds,
                     std::span<const std::vector<PixelPoint>> gts, const PckConfig& cfg,
                     std::span<const ImageSize> image_sizes, std::size_t k);

}  // namespace lmpkit
