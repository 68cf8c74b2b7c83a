#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "lmpkit/tensor.hpp"

namespace lmpkit {

/// How many channels survive per image. Exactly one of the two fields is
/// set; `keep_fraction` resolves to max(1, round(fraction * c)).
struct SelectionConfig {
    std::optional<std::size_t> keep_count;
    std::optional<double> keep_fraction = 0.25;

    static SelectionConfig count(std::size_t n) { return {n, std::nullopt}; }
    static SelectionConfig fraction(double f) { return {std::nullopt, f}; }

    void validate() const;
    std::size_t resolve(std::size_t channels) const;
};

struct Selection {
    Tensor maps;                       ///< [keep, h, w]
    std::vector<std::size_t> indices;  ///< ascending original channel indices
};

/// Per-channel maximum of a [c,h,w] stack.
std::vector<double> channel_maxima(const Tensor& x);

/// Keeps the channels with the largest maximum activation, preserving their
/// original order. Ties go to the lower channel index.
Selection select_filters(const Tensor& x, const SelectionConfig& cfg);

}  // namespace lmpkit
