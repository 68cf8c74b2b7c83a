#include "lmpkit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace lmpkit {

double grid_distance(GridPoint a, GridPoint b, DistanceMetric metric) {
    const double dr = std::abs(a.row - b.row);
    const double dc = std::abs(a.col - b.col);
    switch (metric) {
        case DistanceMetric::Euclidean: return std::hypot(dr, dc);
        case DistanceMetric::Manhattan: return dr + dc;
        case DistanceMetric::Chebyshev: return std::max(dr, dc);
    }
    return 0.0;
}

double pixel_distance(PixelPoint a, PixelPoint b) { return std::hypot(a.row - b.row, a.col - b.col); }

}  // namespace lmpkit
