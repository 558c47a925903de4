#include "agecohort/folds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <regex>
#include <set>
#include <stdexcept>
#include <tuple>
#include <utility>

#include "agecohort/csv.hpp"
#include "agecohort/error.hpp"
#include "agecohort/simd/kernels.hpp"

namespace agecohort::folds {
namespace {

// Structure-of-arrays copy for the kernels.
struct Soa {
  std::vector<double> xs;
  std::vector<double> ys;

  explicit Soa(std::span<const Vec2> v) {
    xs.reserve(v.size());
    ys.reserve(v.size());
    for (const auto& p : v) {
      xs.push_back(p.x);
      ys.push_back(p.y);
    }
  }
  simd::PointsView view() const { return {xs, ys}; }
};

// Uniform double in [0, 1) from the top 53 bits; std::uniform_real_distribution is not portable.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::vector<Vec2> seed_plus_plus(std::span<const Vec2> points, int k, std::mt19937_64& rng) {
  const Soa soa(points);
  const std::size_t n = points.size();
  std::vector<Vec2> centroids;
  centroids.reserve(static_cast<std::size_t>(k));
  const auto first = std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)));
  centroids.push_back(points[first]);

  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  simd::min_distance_update(soa.view(), points[first].x, points[first].y, d2);
  while (centroids.size() < static_cast<std::size_t>(k)) {
    double total = 0.0;
    for (double d : d2) total += d;
    const double target = uniform01(rng) * total;
    std::size_t pick = n;
    double cumulative = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] <= 0.0) continue;
      cumulative += d2[i];
      pick = i;
      if (cumulative > target) break;
    }
    if (pick == n) {
      throw Error(ErrorCode::TooFewDistinctPoints, "no point left at positive distance from the seeds");
    }
    centroids.push_back(points[pick]);
    simd::min_distance_update(soa.view(), points[pick].x, points[pick].y, d2);
  }
  return centroids;
}

Vec2 spread_stats(std::span<const Vec2> points, Vec2& mean) {
  const double n = static_cast<double>(points.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& p : points) {
    sx += p.x;
    sy += p.y;
  }
  mean = {sx / n, sy / n};
  double vx = 0.0, vy = 0.0;
  for (const auto& p : points) {
    vx += (p.x - mean.x) * (p.x - mean.x);
    vy += (p.y - mean.y) * (p.y - mean.y);
  }
  return {std::sqrt(vx / n), std::sqrt(vy / n)};
}

}  // namespace

std::vector<Vec2> standardize(std::span<const Vec2> points) {
  if (points.size() < 2) {
    throw Error(ErrorCode::DegenerateSpread, "need at least two points to standardize");
  }
  Vec2 mean;
  const Vec2 sd = spread_stats(points, mean);
  if (!(sd.x > 0.0) || !(sd.y > 0.0)) {
    throw Error(ErrorCode::DegenerateSpread, "zero variance in a coordinate");
  }
  std::vector<Vec2> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back({(p.x - mean.x) / sd.x, (p.y - mean.y) / sd.y});
  return out;
}

std::vector<Vec2> standardize(std::span<const GeoPoint> points) {
  std::vector<Vec2> raw;
  raw.reserve(points.size());
  for (const auto& p : points) raw.push_back({p.lat, p.lon});
  return standardize(std::span<const Vec2>(raw));
}

std::vector<int> nearest_centroids(std::span<const Vec2> points, std::span<const Vec2> centroids) {
  const Soa p(points);
  const Soa c(centroids);
  std::vector<int> labels(points.size());
  std::vector<double> d2(points.size());
  simd::nearest_centroid(p.view(), c.view(), labels, d2);
  return labels;
}

double inertia(std::span<const Vec2> points, std::span<const Vec2> centroids) {
  const Soa p(points);
  const Soa c(centroids);
  std::vector<int> labels(points.size());
  std::vector<double> d2(points.size());
  simd::nearest_centroid(p.view(), c.view(), labels, d2);
  double total = 0.0;
  for (double d : d2) total += d;
  return total;
}

KMeansModel kmeans(std::span<const Vec2> points, int k, std::uint64_t seed, int max_iterations) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
  std::set<std::pair<double, double>> distinct;
  for (const auto& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw Error(ErrorCode::InvalidArgument, "non-finite point");
    distinct.emplace(p.x, p.y);
  }
  if (static_cast<std::size_t>(k) > distinct.size()) {
    throw Error(ErrorCode::TooFewDistinctPoints,
                "k=" + std::to_string(k) + " exceeds " + std::to_string(distinct.size()) + " distinct points");
  }

  std::mt19937_64 rng(seed);
  KMeansModel model;
  model.k = k;
  model.seed = seed;
  model.centroids = seed_plus_plus(points, k, rng);

  const Soa soa(points);
  const std::size_t n = points.size();
  const auto kk = static_cast<std::size_t>(k);
  std::vector<int> labels(n), previous;
  std::vector<double> d2(n);

  for (int iter = 1; iter <= max_iterations; ++iter) {
    const Soa c(model.centroids);
    simd::nearest_centroid(soa.view(), c.view(), labels, d2);
    double total = 0.0;
    for (double d : d2) total += d;
    if (!model.inertia_history.empty() && total > model.inertia_history.back() * (1.0 + 1e-12)) {
      throw std::logic_error("k-means inertia increased");
    }
    model.inertia_history.push_back(total);
    model.inertia = total;
    model.iterations_run = iter;

    std::vector<std::size_t> counts(kk, 0);
    for (int l : labels) ++counts[static_cast<std::size_t>(l)];
    const bool any_empty = std::find(counts.begin(), counts.end(), 0) != counts.end();
    if (labels == previous && !any_empty) break;
    previous = labels;

    // An empty cluster takes over the point farthest from its centroid.
    for (std::size_t c_idx = 0; c_idx < kk; ++c_idx) {
      if (counts[c_idx] != 0) continue;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[static_cast<std::size_t>(labels[i])] > 1 && (far == n || d2[i] > d2[far])) far = i;
      }
      if (far == n) break;
      --counts[static_cast<std::size_t>(labels[far])];
      labels[far] = static_cast<int>(c_idx);
      counts[c_idx] = 1;
      d2[far] = 0.0;
    }

    std::vector<Vec2> sums(kk);
    for (std::size_t i = 0; i < n; ++i) {
      auto& s = sums[static_cast<std::size_t>(labels[i])];
      s.x += points[i].x;
      s.y += points[i].y;
    }
    for (std::size_t c_idx = 0; c_idx < kk; ++c_idx) {
      if (counts[c_idx] == 0) continue;
      const double m = static_cast<double>(counts[c_idx]);
      model.centroids[c_idx] = {sums[c_idx].x / m, sums[c_idx].y / m};
    }
  }
  return model;
}

std::vector<FoldAssignment> assign_folds(const std::vector<FusedRecord>& dataset, int k, std::uint64_t seed) {
  if (dataset.empty()) throw Error(ErrorCode::EmptyInput, "cannot assign folds to an empty dataset");
  std::vector<GeoPoint> locations;
  locations.reserve(dataset.size());
  for (const auto& r : dataset) locations.push_back(r.location);
  {
    std::vector<GeoPoint> distinct = locations;
    std::sort(distinct.begin(), distinct.end(),
              [](const GeoPoint& a, const GeoPoint& b) { return std::tie(a.lat, a.lon) < std::tie(b.lat, b.lon); });
    const auto last = std::unique(distinct.begin(), distinct.end(),
                                  [](const GeoPoint& a, const GeoPoint& b) { return a.lat == b.lat && a.lon == b.lon; });
    const auto n = static_cast<int>(last - distinct.begin());
    if (k >= 1 && n < k) {
      throw Error(ErrorCode::TooFewDistinctPoints,
                  std::to_string(n) + " distinct locations for k=" + std::to_string(k));
    }
  }
  std::vector<Vec2> standardized;
  if (k == 1) {
    for (const auto& p : locations) standardized.push_back({p.lat, p.lon});
  } else {
    standardized = standardize(std::span<const GeoPoint>(locations));
  }
  const auto model = kmeans(standardized, k, seed);
  const auto labels = nearest_centroids(standardized, model.centroids);
  std::vector<FoldAssignment> out;
  out.reserve(dataset.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out.push_back({i, labels[i]});
  return out;
}

std::string write_fold_file(const std::vector<FusedRecord>& dataset, const std::vector<FoldAssignment>& folds, int k,
                            std::uint64_t seed, int decimals) {
  if (folds.size() != dataset.size()) {
    throw Error(ErrorCode::InvalidArgument, "fold assignments do not cover the dataset");
  }
  std::string out = "# k=" + std::to_string(k) + " seed=" + std::to_string(seed) + "\nlat,lon,fold\n";
  for (const auto& f : folds) {
    const auto& loc = dataset.at(f.record_index).location;
    out += format_fixed(loc.lat, decimals) + "," + format_fixed(loc.lon, decimals) + "," + std::to_string(f.fold) + "\n";
  }
  return out;
}

FoldFile read_fold_file(std::string_view text) {
  static const std::regex kHeader(R"(^#\s*k=([0-9]+)\s+seed=([0-9]+)\s*$)");
  FoldFile file;
  const auto eol = text.find('\n');
  const std::string first(text.substr(0, eol));
  std::smatch m;
  if (!std::regex_match(first, m, kHeader)) {
    throw Error(ErrorCode::ParseError, "fold file must start with '# k=<k> seed=<seed>'");
  }
  file.k = std::stoi(m[1]);
  file.seed = std::stoull(m[2]);
  const auto table = csv::Table::from_text(text);
  const auto lat = table.column("lat");
  const auto lon = table.column("lon");
  const auto fold = table.column("fold");
  for (const auto& row : table.rows()) {
    const int f = static_cast<int>(parse_integer(row[fold]));
    if (f < 0 || f >= file.k) throw Error(ErrorCode::ParseError, "fold index out of range: " + row[fold]);
    file.rows.push_back({{parse_double(row[lat]), parse_double(row[lon])}, f});
  }
  return file;
}

}  // namespace agecohort::folds
