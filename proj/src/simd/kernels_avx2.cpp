// Compiled with -mavx2 only; callers reach it through the runtime dispatcher.
#include <immintrin.h>

#include <limits>

#include "agecohort/simd/kernels.hpp"

namespace agecohort::simd::avx2 {

void nearest_centroid(PointsView points, PointsView centroids, std::span<int> labels, std::span<double> dist2) {
  const std::size_t n = points.xs.size();
  const std::size_t k = centroids.xs.size();
  const __m256d inf = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(points.xs.data() + i);
    const __m256d y = _mm256_loadu_pd(points.ys.data() + i);
    __m256d best = inf;
    __m256d label = _mm256_setzero_pd();
    for (std::size_t c = 0; c < k; ++c) {
      const __m256d dx = _mm256_sub_pd(x, _mm256_set1_pd(centroids.xs[c]));
      const __m256d dy = _mm256_sub_pd(y, _mm256_set1_pd(centroids.ys[c]));
      const __m256d d = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
      // Strict less-than keeps the earlier centroid on ties.
      const __m256d closer = _mm256_cmp_pd(d, best, _CMP_LT_OQ);
      best = _mm256_blendv_pd(best, d, closer);
      label = _mm256_blendv_pd(label, _mm256_set1_pd(static_cast<double>(c)), closer);
    }
    _mm256_storeu_pd(dist2.data() + i, best);
    const __m128i lab32 = _mm256_cvttpd_epi32(label);
    _mm_storeu_si128(reinterpret_cast<__m128i*>(labels.data() + i), lab32);
  }
  if (i < n) {
    scalar::nearest_centroid({points.xs.subspan(i), points.ys.subspan(i)}, centroids, labels.subspan(i),
                             dist2.subspan(i));
  }
}

void min_distance_update(PointsView points, double cx, double cy, std::span<double> dist2) {
  const std::size_t n = points.xs.size();
  const __m256d vcx = _mm256_set1_pd(cx);
  const __m256d vcy = _mm256_set1_pd(cy);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(points.xs.data() + i), vcx);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(points.ys.data() + i), vcy);
    const __m256d d = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
    const __m256d cur = _mm256_loadu_pd(dist2.data() + i);
    _mm256_storeu_pd(dist2.data() + i, _mm256_blendv_pd(cur, d, _mm256_cmp_pd(d, cur, _CMP_LT_OQ)));
  }
  if (i < n) {
    scalar::min_distance_update({points.xs.subspan(i), points.ys.subspan(i)}, cx, cy, dist2.subspan(i));
  }
}

}  // namespace agecohort::simd::avx2
