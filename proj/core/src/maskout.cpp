#include "lmpkit/maskout.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace lmpkit {

std::string to_string(MaskShape s) { return s == MaskShape::Disk ? "disk" : "square"; }

MaskShape parse_mask_shape(const std::string& name) {
    if (name == "disk") return MaskShape::Disk;
    if (name == "square") return MaskShape::Square;
    throw ValueError("unknown mask shape '" + name + "'");
}

Tensor make_mask(const MaskSpec& spec, std::size_t height, std::size_t width) {
    if (!(spec.radius > 0.0)) throw ValueError("mask radius must be > 0");
    if (spec.center.row < 0.0 || spec.center.col < 0.0 || spec.center.row > static_cast<double>(height) - 1.0 ||
        spec.center.col > static_cast<double>(width) - 1.0) {
        throw ValueError("mask center lies outside the image");
    }
    Tensor mask = Tensor::full({height, width}, 1.0);
    const double r2 = spec.radius * spec.radius;
    for (std::size_t r = 0; r < height; ++r) {
        const double dr = static_cast<double>(r) - spec.center.row;
        for (std::size_t c = 0; c < width; ++c) {
            const double dc = static_cast<double>(c) - spec.center.col;
            const bool inside = spec.mode == MaskShape::Square
                                    ? std::abs(dr) <= spec.radius && std::abs(dc) <= spec.radius
                                    : dr * dr + dc * dc <= r2;
            if (inside) mask.at(r, c) = 0.0;
        }
    }
    return mask;
}

Tensor apply_mask(const Tensor& img, const Tensor& mask) {
    if (mask.rank() != 2 || img.rank() < 2 || img.dim(img.rank() - 2) != mask.dim(0) ||
        img.dim(img.rank() - 1) != mask.dim(1)) {
        throw SizeError("apply_mask: image " + shape_to_string(img.shape()) + " vs mask " +
                        shape_to_string(mask.shape()));
    }
    Tensor out = img;
    const std::size_t plane = mask.size();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i % plane];
    return out;
}

ClusteringOutput fuse_predictions(const ClusteringOutput& primary, const ClusteringOutput& replica,
                                  std::size_t k, double thr, DistanceMetric metric) {
    struct Candidate {
        const ClusteringOutput* src;
        std::size_t index;
    };
    std::vector<Candidate> order;
    if (primary.size() > 0) order.push_back({&primary, 0});
    for (std::size_t i = 0; i < std::max(primary.size(), replica.size() + 1); ++i) {
        if (i < replica.size()) order.push_back({&replica, i});
        if (i + 1 < primary.size()) order.push_back({&primary, i + 1});
    }

    std::vector<GridPoint> peaks;
    std::vector<double> maps;
    Shape map_shape;
    bool have_maps = true;
    for (const auto& cand : order) {
        if (peaks.size() >= k) break;
        const GridPoint p = cand.src->peaks[cand.index];
        bool clash = false;
        for (const auto& q : peaks) clash = clash || grid_distance(p, q, metric) < thr;
        if (clash) continue;
        peaks.push_back(p);
        const Tensor& hm = cand.src->heatmaps;
        if (hm.rank() == 3 && cand.index < hm.dim(0) &&
            (map_shape.empty() || map_shape == Shape{hm.dim(1), hm.dim(2)})) {
            map_shape = {hm.dim(1), hm.dim(2)};
            const auto s = hm.slab(cand.index);
            maps.insert(maps.end(), s.begin(), s.end());
        } else {
            have_maps = false;
        }
    }

    ClusteringOutput out;
    out.votes = primary.votes;
    if (have_maps && !map_shape.empty()) {
        out.heatmaps = Tensor({peaks.size(), map_shape[0], map_shape[1]}, std::move(maps));
    } else {
        out.heatmaps = Tensor({0, 0, 0});
    }
    out.peaks = std::move(peaks);
    return out;
}

}  // namespace lmpkit
