#include "lmpkit/clustering.hpp"

#include <algorithm>
#include <cmath>

namespace lmpkit {

void ClusteringConfig::validate() const {
    if (k < 1) throw ValueError("clustering: k must be >= 1");
    if (n < 1) throw ValueError("clustering: n must be >= 1");
    if (!(thr > 0.0)) throw ValueError("clustering: thr must be > 0");
    if (!(dist_floor > 0.0)) throw ValueError("clustering: dist_floor must be > 0");
}

std::string to_string(DistanceMetric m) {
    switch (m) {
        case DistanceMetric::Euclidean: return "euclidean";
        case DistanceMetric::Manhattan: return "manhattan";
        case DistanceMetric::Chebyshev: return "chebyshev";
    }
    return "?";
}

DistanceMetric parse_distance_metric(const std::string& name) {
    if (name == "euclidean") return DistanceMetric::Euclidean;
    if (name == "manhattan") return DistanceMetric::Manhattan;
    if (name == "chebyshev") return DistanceMetric::Chebyshev;
    throw ValueError("unknown distance metric '" + name + "'");
}

GridPoint peak_of(std::span<const double> map, std::size_t width) {
    const std::size_t idx = argmax(map);
    return {static_cast<int>(idx / width), static_cast<int>(idx % width)};
}

Tensor binarize_proposals(const Tensor& x) {
    if (x.rank() != 3 || x.dim(0) == 0) {
        throw SizeError("binarize_proposals expects [c,h,w] with c >= 1, got " + shape_to_string(x.shape()));
    }
    Tensor out(x.shape());
    for (std::size_t ch = 0; ch < x.dim(0); ++ch) {
        const auto src = x.slab(ch);
        const std::size_t top = argmax(src);
        if (src[top] > 0.0) out.slab(ch)[top] = 1.0;
    }
    return out;
}

namespace {

bool is_zero_map(std::span<const double> m) {
    for (double v : m) {
        if (v != 0.0) return false;
    }
    return true;
}

}  // namespace

double channel_peak_distance(const Tensor& y, const Tensor& x_ch, DistanceMetric metric) {
    if (y.rank() != 2 || y.shape() != x_ch.shape()) {
        throw SizeError("channel_peak_distance expects two equal [h,w] maps");
    }
    if (is_zero_map(x_ch.data())) throw ExcludedChannel("proposal map is all zero");
    const std::size_t w = y.dim(1);
    return grid_distance(peak_of(y.data(), w), peak_of(x_ch.data(), w), metric);
}

ClusteringOutput cluster(const Tensor& x, const ClusteringConfig& cfg) {
    cfg.validate();
    if (x.rank() != 3) throw SizeError("cluster expects [c,h,w], got " + shape_to_string(x.shape()));
    const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2), hw = h * w;

    std::vector<bool> active(c, false);
    std::vector<GridPoint> proposal_peak(c);
    for (std::size_t ch = 0; ch < c; ++ch) {
        const auto m = x.slab(ch);
        if (!is_zero_map(m)) {
            active[ch] = true;
            proposal_peak[ch] = peak_of(m, w);
        }
    }

    Tensor votes = Tensor::full({c, cfg.k}, 1.0);
    std::vector<double> weights(c);
    std::vector<double> dist(c);
    std::vector<double> heat(hw);
    std::vector<std::vector<double>> emitted;
    std::vector<GridPoint> peaks;

    // Softmax of W[:, col] restricted to active channels.
    auto column_softmax = [&](std::size_t col) {
        double top = -INFINITY;
        for (std::size_t ch = 0; ch < c; ++ch) {
            if (active[ch]) top = std::max(top, votes.at(ch, col));
        }
        double z = 0.0;
        for (std::size_t ch = 0; ch < c; ++ch) {
            weights[ch] = active[ch] ? std::exp(votes.at(ch, col) - top) : 0.0;
            z += weights[ch];
        }
        for (double& v : weights) v /= z;
    };
    auto aggregate = [&] {
        std::fill(heat.begin(), heat.end(), 0.0);
        for (std::size_t ch = 0; ch < c; ++ch) {
            if (!active[ch]) continue;
            const auto m = x.slab(ch);
            for (std::size_t i = 0; i < hw; ++i) heat[i] += weights[ch] * m[i];
        }
        return peak_of(heat, w);
    };

    for (std::size_t col = 0; col < cfg.k; ++col) {
        if (std::find(active.begin(), active.end(), true) == active.end()) break;

        for (std::size_t it = 0; it < cfg.n; ++it) {
            column_softmax(col);
            const GridPoint p = aggregate();
            for (std::size_t ch = 0; ch < c; ++ch) {
                if (!active[ch]) continue;
                dist[ch] = grid_distance(p, proposal_peak[ch], cfg.metric);
                votes.at(ch, col) = weights[ch] + 1.0 / std::max(dist[ch], cfg.dist_floor);
            }
        }
        column_softmax(col);
        peaks.push_back(aggregate());
        emitted.push_back(heat);

        for (std::size_t ch = 0; ch < c; ++ch) {
            if (!active[ch]) {
                votes.at(ch, col) = 0.0;
            } else if (dist[ch] < cfg.thr) {
                active[ch] = false;
            }
        }
    }
    for (std::size_t col = peaks.size(); col < cfg.k; ++col) {
        for (std::size_t ch = 0; ch < c; ++ch) votes.at(ch, col) = 0.0;
    }

    ClusteringOutput out;
    out.peaks = std::move(peaks);
    out.votes = std::move(votes);
    std::vector<double> flat;
    flat.reserve(emitted.size() * hw);
    for (const auto& m : emitted) flat.insert(flat.end(), m.begin(), m.end());
    out.heatmaps = Tensor({out.peaks.size(), h, w}, std::move(flat));
    return out;
}

}  // namespace lmpkit
