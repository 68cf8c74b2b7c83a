#include "lmpkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lmpkit {

namespace {
constexpr double kMassFloor = 1e-12;
}

double feature_entropy(const Tensor& x) {
    if (x.rank() != 3 || x.dim(0) == 0) {
        throw SizeError("feature_entropy expects [c,h,w] with c >= 1, got " + shape_to_string(x.shape()));
    }
    double total = 0.0;
    std::size_t counted = 0;
    std::vector<double> p;
    for (std::size_t ch = 0; ch < x.dim(0); ++ch) {
        const auto m = x.slab(ch);
        p.assign(m.size(), 0.0);
        bool any = false;
        for (std::size_t i = 0; i < m.size(); ++i) {
            const double v = std::max(m[i], 0.0);
            any = any || v > 0.0;
            p[i] = v + kMassFloor;
        }
        if (!any) continue;
        double z = 0.0;
        for (double v : p) z += v;
        double h = 0.0;
        for (double v : p) {
            const double q = v / z;
            h -= q * std::log(q);
        }
        total += h;
        ++counted;
    }
    if (counted == 0) throw EmptyActivation("every channel is zero");
    return total / static_cast<double>(counted);
}

EntropySummary summarize(std::span<const double> values) {
    EntropySummary s;
    s.count = values.size();
    if (values.empty()) return s;
    for (double v : values) s.mean += v;
    s.mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(var / static_cast<double>(values.size()));
    return s;
}

std::string to_string(MatchMode m) { return m == MatchMode::GtConsumed ? "gt_consumed" : "gt_reusable"; }

MatchMode parse_match_mode(const std::string& name) {
    if (name == "gt_consumed" || name == "consumed") return MatchMode::GtConsumed;
    if (name == "gt_reusable" || name == "reusable") return MatchMode::GtReusable;
    throw ValueError("unknown match mode '" + name + "'");
}

void PckConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValueError("pck alpha must lie in (0, 1)");
}

PckReport greedy_pck(std::span<const std::vector<PixelPoint>> preds,
                     std::span<const std::vector<PixelPoint>> gts, const PckConfig& cfg,
                     std::span<const ImageSize> image_sizes, std::size_t k) {
    cfg.validate();
    if (preds.size() != gts.size() || preds.size() != image_sizes.size()) {
        throw SizeError("greedy_pck: predictions, ground truth and image sizes differ in count");
    }
    PckReport report;
    report.num_images = preds.size();
    report.per_keypoint_acc.assign(k, 0.0);

    std::vector<bool> available;
    for (std::size_t img = 0; img < preds.size(); ++img) {
        const auto& gt = gts[img];
        const double radius =
            cfg.alpha * static_cast<double>(std::min(image_sizes[img].height, image_sizes[img].width));
        available.assign(gt.size(), true);
        for (std::size_t i = 0; i < std::min(k, preds[img].size()); ++i) {
            std::size_t best = gt.size();
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t g = 0; g < gt.size(); ++g) {
                if (!available[g]) continue;
                const double d = pixel_distance(preds[img][i], gt[g]);
                if (d < best_d) {
                    best_d = d;
                    best = g;
                }
            }
            if (best < gt.size() && best_d <= radius) {
                report.per_keypoint_acc[i] += 1.0;
                if (cfg.match_mode == MatchMode::GtConsumed) available[best] = false;
            }
        }
    }
    if (report.num_images > 0) {
        for (double& a : report.per_keypoint_acc) a /= static_cast<double>(report.num_images);
    }
    double sum = 0.0;
    for (double a : report.per_keypoint_acc) sum += a;
    report.average = k ? sum / static_cast<double>(k) : 0.0;
    return report;
}

}  // namespace lmpkit
