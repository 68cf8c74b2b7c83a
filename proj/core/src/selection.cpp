#include "lmpkit/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lmpkit {

void SelectionConfig::validate() const {
    if (keep_count.has_value() == keep_fraction.has_value()) {
        throw ValueError("selection: set exactly one of keep_count and keep_fraction");
    }
    if (keep_count && *keep_count < 1) throw ValueError("selection: keep_count must be >= 1");
    if (keep_fraction && !(*keep_fraction > 0.0 && *keep_fraction <= 1.0)) {
        throw ValueError("selection: keep_fraction must lie in (0, 1]");
    }
}

std::size_t SelectionConfig::resolve(std::size_t channels) const {
    validate();
    if (keep_count) return *keep_count;
    const auto n = static_cast<std::size_t>(std::lround(*keep_fraction * static_cast<double>(channels)));
    return std::clamp<std::size_t>(n, 1, std::max<std::size_t>(channels, 1));
}

std::vector<double> channel_maxima(const Tensor& x) {
    if (x.rank() != 3) throw SizeError("expected [c,h,w], got " + shape_to_string(x.shape()));
    std::vector<double> m(x.dim(0));
    for (std::size_t ch = 0; ch < m.size(); ++ch) m[ch] = max_value(x.slab(ch));
    return m;
}

Selection select_filters(const Tensor& x, const SelectionConfig& cfg) {
    const auto maxima = channel_maxima(x);
    const std::size_t c = maxima.size();
    const std::size_t keep = cfg.resolve(c);
    if (keep > c) {
        throw SizeError("select_filters: keep_count " + std::to_string(keep) + " exceeds " +
                        std::to_string(c) + " channels");
    }
    std::vector<std::size_t> order(c);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return maxima[a] > maxima[b]; });
    order.resize(keep);
    std::sort(order.begin(), order.end());

    const std::size_t plane = x.dim(1) * x.dim(2);
    std::vector<double> data;
    data.reserve(keep * plane);
    for (std::size_t ch : order) {
        const auto s = x.slab(ch);
        data.insert(data.end(), s.begin(), s.end());
    }
    return {Tensor({keep, x.dim(1), x.dim(2)}, std::move(data)), std::move(order)};
}

}  // namespace lmpkit
