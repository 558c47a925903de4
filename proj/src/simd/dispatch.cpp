#include <cstdlib>
#include <string>

#include "agecohort/error.hpp"
#include "agecohort/simd/kernels.hpp"

namespace agecohort::simd {
namespace {

Isa detect() {
  if (const char* forced = std::getenv("AGECOHORT_SIMD"); forced != nullptr && std::string(forced) == "scalar") {
    return Isa::Scalar;
  }
  return isa_available(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
}

void check_sizes(PointsView points, PointsView centroids, std::size_t labels, std::size_t dist2) {
  if (points.xs.size() != points.ys.size() || centroids.xs.size() != centroids.ys.size() ||
      labels < points.xs.size() || dist2 < points.xs.size()) {
    throw Error(ErrorCode::InvalidArgument, "kernel buffer sizes disagree");
  }
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
  }
  return "scalar";
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(AGECOHORT_HAVE_AVX2_KERNELS)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

Isa active_isa() {
  static const Isa isa = detect();
  return isa;
}

void nearest_centroid(Isa isa, PointsView points, PointsView centroids, std::span<int> labels,
                      std::span<double> dist2) {
  check_sizes(points, centroids, labels.size(), dist2.size());
  if (centroids.xs.empty()) throw Error(ErrorCode::InvalidArgument, "no centroids");
#if defined(AGECOHORT_HAVE_AVX2_KERNELS)
  if (isa == Isa::Avx2 && isa_available(Isa::Avx2)) {
    avx2::nearest_centroid(points, centroids, labels, dist2);
    return;
  }
#endif
  scalar::nearest_centroid(points, centroids, labels, dist2);
}

void nearest_centroid(PointsView points, PointsView centroids, std::span<int> labels, std::span<double> dist2) {
  nearest_centroid(active_isa(), points, centroids, labels, dist2);
}

void min_distance_update(Isa isa, PointsView points, double cx, double cy, std::span<double> dist2) {
  check_sizes(points, points, dist2.size(), dist2.size());
#if defined(AGECOHORT_HAVE_AVX2_KERNELS)
  if (isa == Isa::Avx2 && isa_available(Isa::Avx2)) {
    avx2::min_distance_update(points, cx, cy, dist2);
    return;
  }
#endif
  scalar::min_distance_update(points, cx, cy, dist2);
}

void min_distance_update(PointsView points, double cx, double cy, std::span<double> dist2) {
  min_distance_update(active_isa(), points, cx, cy, dist2);
}

}  // namespace agecohort::simd
