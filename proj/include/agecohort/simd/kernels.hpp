#pragma once

// Distance kernels for the k-means inner loops.
//
// Every variant evaluates dx*dx + dy*dy with separate multiplies and one add
// (no FMA contraction) and breaks ties toward the lowest centroid index, so all
// variants return bit-identical labels and distances. Fold files therefore do
// not depend on which instruction set was picked at runtime.

#include <span>
#include <string_view>

namespace agecohort::simd {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa);

// Best variant the CPU supports; AGECOHORT_SIMD=scalar forces the reference path.
Isa active_isa();
bool isa_available(Isa isa);

struct PointsView {
  std::span<const double> xs;
  std::span<const double> ys;
};

// labels[i] = argmin_c |p_i - c|^2 (lowest index on ties); dist2[i] = that minimum.
void nearest_centroid(PointsView points, PointsView centroids, std::span<int> labels, std::span<double> dist2);
void nearest_centroid(Isa isa, PointsView points, PointsView centroids, std::span<int> labels,
                      std::span<double> dist2);

// dist2[i] = min(dist2[i], |p_i - (cx, cy)|^2). Used by k-means++ seeding.
void min_distance_update(PointsView points, double cx, double cy, std::span<double> dist2);
void min_distance_update(Isa isa, PointsView points, double cx, double cy, std::span<double> dist2);

namespace scalar {
void nearest_centroid(PointsView points, PointsView centroids, std::span<int> labels, std::span<double> dist2);
void min_distance_update(PointsView points, double cx, double cy, std::span<double> dist2);
}  // namespace scalar

#if defined(AGECOHORT_HAVE_AVX2_KERNELS)
namespace avx2 {
void nearest_centroid(PointsView points, PointsView centroids, std::span<int> labels, std::span<double> dist2);
void min_distance_update(PointsView points, double cx, double cy, std::span<double> dist2);
}  // namespace avx2
#endif

}  // namespace agecohort::simd
