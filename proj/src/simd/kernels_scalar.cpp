#include <limits>

#include "agecohort/simd/kernels.hpp"

namespace agecohort::simd::scalar {

void nearest_centroid(PointsView points, PointsView centroids, std::span<int> labels, std::span<double> dist2) {
  const std::size_t n = points.xs.size();
  const std::size_t k = centroids.xs.size();
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    int label = 0;
    for (std::size_t c = 0; c < k; ++c) {
      const double dx = points.xs[i] - centroids.xs[c];
      const double dy = points.ys[i] - centroids.ys[c];
      const double d = dx * dx + dy * dy;
      if (d < best) {
        best = d;
        label = static_cast<int>(c);
      }
    }
    labels[i] = label;
    dist2[i] = best;
  }
}

void min_distance_update(PointsView points, double cx, double cy, std::span<double> dist2) {
  const std::size_t n = points.xs.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = points.xs[i] - cx;
    const double dy = points.ys[i] - cy;
    const double d = dx * dx + dy * dy;
    if (d < dist2[i]) dist2[i] = d;
  }
}

}  // namespace agecohort::simd::scalar
