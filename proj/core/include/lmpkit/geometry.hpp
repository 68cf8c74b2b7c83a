#pragma once

#include <compare>
#include <cstddef>

namespace lmpkit {

/// Integer cell on a feature grid.
struct GridPoint {
    int row = 0;
    int col = 0;
    auto operator<=>(const GridPoint&) const = default;
};

/// Continuous image-pixel coordinate (pixel centers at integer values).
struct PixelPoint {
    double row = 0.0;
    double col = 0.0;
    bool operator==(const PixelPoint&) const = default;
};

enum class DistanceMetric { Euclidean, Manhattan, Chebyshev };

double grid_distance(GridPoint a, GridPoint b, DistanceMetric metric = DistanceMetric::Euclidean);
double pixel_distance(PixelPoint a, PixelPoint b);

/// Affine grid -> pixel map: pixel = index * stride + offset.
struct GridToPixel {
    double stride = 1.0;
    double offset = 0.0;

    PixelPoint operator()(GridPoint p) const {
        return {p.row * stride + offset, p.col * stride + offset};
    }
};

}  // namespace lmpkit
