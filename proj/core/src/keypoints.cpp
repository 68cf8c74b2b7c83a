#include "lmpkit/keypoints.hpp"

#include <algorithm>

#include "lmpkit/maskout.hpp"

namespace lmpkit {

ClusteringOutput keypoint_branch(const Tensor& features, const SelectionConfig& selection,
                                 const ClusteringConfig& clustering) {
    const Selection sel = select_filters(features, selection);
    return cluster(binarize_proposals(sel.maps), clustering);
}

std::optional<Tensor> attention_mask(const ModelArch& arch, const ClusteringOutput& primary_out,
                                     const KeypointConfig& cfg) {
    if (primary_out.peaks.empty()) return std::nullopt;
    const GridToPixel map = arch.grid_map();
    PixelPoint centre = map(primary_out.peaks.front());
    centre.row = std::clamp(centre.row, 0.0, static_cast<double>(arch.input_height) - 1.0);
    centre.col = std::clamp(centre.col, 0.0, static_cast<double>(arch.input_width) - 1.0);
    const double radius = cfg.mask_radius > 0.0 ? cfg.mask_radius : map.stride;
    return make_mask({centre, radius, cfg.mask_shape}, arch.input_height, arch.input_width);
}

KeypointPrediction predict_keypoints(const ToyModel& model, const ToyModel* replica, const Tensor& image,
                                     const KeypointConfig& cfg) {
    KeypointPrediction pred;
    const Tensor feats = model.features(image);
    const Selection sel = select_filters(feats, cfg.selection);
    pred.selected = sel.indices;
    pred.grid = cluster(binarize_proposals(sel.maps), cfg.clustering);

    if (replica != nullptr) {
        const auto mask = attention_mask(model.arch(), pred.grid, cfg);
        const Tensor masked = mask ? apply_mask(image, *mask) : image;
        const ClusteringOutput second = keypoint_branch(replica->features(masked), cfg.selection, cfg.clustering);
        pred.grid = fuse_predictions(pred.grid, second, cfg.clustering.k, cfg.clustering.thr, cfg.clustering.metric);
    }
    const GridToPixel map = model.arch().grid_map();
    for (const auto& p : pred.grid.peaks) pred.pixels.push_back(map(p));
    return pred;
}

}  // namespace lmpkit
