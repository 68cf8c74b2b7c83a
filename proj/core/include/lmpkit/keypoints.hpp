#pragma once

#include <optional>
#include <vector>

#include "lmpkit/clustering.hpp"
#include "lmpkit/geometry.hpp"
#include "lmpkit/maskout.hpp"
#include "lmpkit/model.hpp"
#include "lmpkit/selection.hpp"

namespace lmpkit {

/// Everything the keypoint branch needs besides the networks.
struct KeypointConfig {
    SelectionConfig selection;
    ClusteringConfig clustering;
    MaskShape mask_shape = MaskShape::Square;
    /// Mask radius in pixels; 0 means one feature-grid stride.
    double mask_radius = 0.0;
};

/// features [c,h,w] -> select -> binarize -> cluster.
ClusteringOutput keypoint_branch(const Tensor& features, const SelectionConfig& selection,
                                 const ClusteringConfig& clustering);

/// Square/disk mask around the first predicted keypoint of `primary_out`,
/// or nullopt when the primary produced no prediction.
std::optional<Tensor> attention_mask(const ModelArch& arch, const ClusteringOutput& primary_out,
                                     const KeypointConfig& cfg);

struct KeypointPrediction {
    ClusteringOutput grid;            ///< fused (or primary-only) clustering output
    std::vector<PixelPoint> pixels;   ///< grid peaks mapped through arch.grid_map()
    std::vector<std::size_t> selected;  ///< channels kept by selection on the primary
};

/// Full prediction branch. With a replica, the image is masked around the
/// primary's first keypoint, the replica runs on it, and both outputs are
/// fused.
KeypointPrediction predict_keypoints(const ToyModel& model, const ToyModel* replica, const Tensor& image,
                                     const KeypointConfig& cfg);

}  // namespace lmpkit
