#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "agecohort/records.hpp"

namespace agecohort::folds {

struct Vec2 {
  double x = 0.0;  // standardized latitude
  double y = 0.0;  // standardized longitude

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

// Zero mean, unit population standard deviation per dimension.
// Throws DegenerateSpread for fewer than two points or a zero-variance dimension.
std::vector<Vec2> standardize(std::span<const GeoPoint> points);
std::vector<Vec2> standardize(std::span<const Vec2> points);

inline constexpr int kMaxLloydIterations = 300;

struct KMeansModel {
  std::vector<Vec2> centroids;
  int k = 0;
  std::uint64_t seed = 0;
  int iterations_run = 0;
  std::vector<double> inertia_history;  // one entry per assignment step
  double inertia = 0.0;
};

// Lloyd's algorithm with k-means++ seeding. Deterministic for (points, k, seed).
// Throws TooFewDistinctPoints when k exceeds the number of distinct points.
KMeansModel kmeans(std::span<const Vec2> points, int k, std::uint64_t seed, int max_iterations = kMaxLloydIterations);

// Nearest centroid per point, lowest centroid index on ties.
std::vector<int> nearest_centroids(std::span<const Vec2> points, std::span<const Vec2> centroids);
double inertia(std::span<const Vec2> points, std::span<const Vec2> centroids);

struct FoldAssignment {
  std::size_t record_index = 0;
  int fold = 0;

  friend bool operator==(const FoldAssignment&, const FoldAssignment&) = default;
};

std::vector<FoldAssignment> assign_folds(const std::vector<FusedRecord>& dataset, int k, std::uint64_t seed);

struct FoldRow {
  GeoPoint location;
  int fold = 0;

  friend bool operator==(const FoldRow&, const FoldRow&) = default;
};

struct FoldFile {
  int k = 0;
  std::uint64_t seed = 0;
  std::vector<FoldRow> rows;
};

// "# k=<k> seed=<seed>" header comment, then CSV lat,lon,fold.
std::string write_fold_file(const std::vector<FusedRecord>& dataset, const std::vector<FoldAssignment>& folds, int k,
                            std::uint64_t seed, int decimals = 6);
FoldFile read_fold_file(std::string_view text);

}  // namespace agecohort::folds
