#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "agecohort/folds.hpp"
#include "oracle/kmeans_restarts.hpp"
#include "support/expect.hpp"
#include "support/gen.hpp"

using namespace agecohort;
using namespace agecohort::folds;
using testgen::code_of;

namespace {

std::vector<FusedRecord> blob_city(testgen::Gen& g, int blobs, int per_blob, std::vector<int>* blob_of = nullptr) {
  std::vector<FusedRecord> out;
  for (int b = 0; b < blobs; ++b) {
    const double clat = 50.70 + 0.03 * (b % 3), clon = 6.00 + 0.05 * (b / 3);
    for (int i = 0; i < per_blob; ++i) {
      out.push_back(make_fused_record({clat + 0.001 * g.normal(), clon + 0.001 * g.normal()}, 1900 + b, Source::OSM));
      if (blob_of) blob_of->push_back(b);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("standardization") {
  const std::vector<GeoPoint> two{{0, 0}, {2, 2}};
  const auto z = standardize(std::span<const GeoPoint>(two));
  CHECK(z[0] == Vec2{-1, -1});
  CHECK(z[1] == Vec2{1, 1});
  testgen::Gen g(1);
  std::vector<GeoPoint> pts;
  for (int i = 0; i < 100; ++i) pts.push_back({g.uniform(50, 51), g.uniform(6, 7)});
  const auto s = standardize(std::span<const GeoPoint>(pts));
  const auto again = standardize(std::span<const Vec2>(s));
  double mx = 0, vx = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(std::abs(again[i].x - s[i].x) < 1e-12);
    CHECK(std::abs(again[i].y - s[i].y) < 1e-12);
    mx += s[i].x;
    vx += s[i].x * s[i].x;
  }
  CHECK(std::abs(mx / 100) < 1e-12);
  CHECK(std::abs(vx / 100 - 1) < 1e-12);
  const std::vector<GeoPoint> same(5, {50, 6});
  CHECK(code_of([&] { standardize(std::span<const GeoPoint>(same)); }) == ErrorCode::DegenerateSpread);
  const std::vector<GeoPoint> one{{50, 6}};
  CHECK(code_of([&] { standardize(std::span<const GeoPoint>(one)); }) == ErrorCode::DegenerateSpread);
}

TEST_CASE("separated pairs are recovered") {
  std::vector<Vec2> pts;
  for (int p = 0; p < 6; ++p) {
    pts.push_back({10.0 * p, 0});
    pts.push_back({10.0 * p + 0.1, 0.1});
  }
  for (std::uint64_t seed : {1, 2, 3, 42}) {
    const auto m = kmeans(pts, 6, seed);
    const auto labels = nearest_centroids(pts, m.centroids);
    std::set<int> used;
    for (int p = 0; p < 6; ++p) {
      CHECK(labels[2 * p] == labels[2 * p + 1]);
      used.insert(labels[2 * p]);
    }
    CHECK(used.size() == 6);
  }
}

TEST_CASE("k = 1 gives the mean") {
  const std::vector<Vec2> pts{{0, 0}, {1, 0}, {0, 4}, {3, 4}};
  const auto m = kmeans(pts, 1, 9);
  CHECK(m.centroids[0].x == doctest::Approx(1.0));
  CHECK(m.centroids[0].y == doctest::Approx(2.0));
}

TEST_CASE("too few distinct points") {
  const std::vector<Vec2> pts{{0, 0}, {0, 0}, {1, 1}};
  CHECK(code_of([&] { kmeans(pts, 3, 1); }) == ErrorCode::TooFewDistinctPoints);
  CHECK(code_of([&] { kmeans(pts, 0, 1); }) == ErrorCode::InvalidArgument);
  CHECK(kmeans(pts, 2, 1).centroids.size() == 2);
}

TEST_CASE("inertia is within 5% of a 1000-restart oracle") {
  testgen::Gen g(42);
  std::vector<Vec2> pts;
  const Vec2 centers[4] = {{0, 0}, {4, 1}, {1, 5}, {5, 5}};
  for (int i = 0; i < 60; ++i) {
    const auto& c = centers[i % 4];
    pts.push_back({c.x + g.normal(), c.y + g.normal()});
  }
  const auto m = kmeans(pts, 4, 42);
  const double best = oracle::best_of_restarts(pts, 4, 1000, 42);
  CHECK(m.inertia <= best * 1.05);
  CHECK(std::abs(m.inertia - inertia(pts, m.centroids)) <= 1e-9 * m.inertia);
}

TEST_CASE("lloyd inertia never increases") {
  testgen::Gen g(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vec2> pts;
    for (int i = 0; i < 200; ++i) pts.push_back({g.normal(), g.normal()});
    const auto m = kmeans(pts, static_cast<int>(g.integer(2, 8)), trial);
    REQUIRE(!m.inertia_history.empty());
    for (std::size_t i = 1; i < m.inertia_history.size(); ++i) {
      CHECK(m.inertia_history[i] <= m.inertia_history[i - 1] * (1 + 1e-12));
    }
    CHECK(m.iterations_run <= kMaxLloydIterations);
  }
}

TEST_CASE("fold assignment") {
  testgen::Gen g(6);
  std::vector<int> blob_of;
  const auto city = blob_city(g, 6, 30, &blob_of);
  const auto folds = assign_folds(city, 6, 7);
  REQUIRE(folds.size() == city.size());
  std::map<int, std::set<int>> folds_per_blob, blobs_per_fold;
  for (const auto& f : folds) {
    folds_per_blob[blob_of[f.record_index]].insert(f.fold);
    blobs_per_fold[f.fold].insert(blob_of[f.record_index]);
  }
  CHECK(blobs_per_fold.size() == 6);
  for (const auto& [b, fs] : folds_per_blob) CHECK(fs.size() == 1);
  for (const auto& [f, bs] : blobs_per_fold) CHECK(bs.size() == 1);

  // Every record sits in the fold of its nearest centroid.
  std::vector<GeoPoint> locs;
  for (const auto& r : city) locs.push_back(r.location);
  const auto z = standardize(std::span<const GeoPoint>(locs));
  const auto model = kmeans(z, 6, 7);
  const auto labels = nearest_centroids(z, model.centroids);
  for (const auto& f : folds) CHECK(f.fold == labels[f.record_index]);
}

TEST_CASE("identical locations share a fold") {
  testgen::Gen g(8);
  auto city = blob_city(g, 3, 10);
  city.push_back(city[4]);
  city.push_back(city[17]);
  const auto folds = assign_folds(city, 3, 1);
  CHECK(folds[4].fold == folds[city.size() - 2].fold);
  CHECK(folds[17].fold == folds[city.size() - 1].fold);
}

TEST_CASE("fold file is deterministic and round trips") {
  testgen::Gen g(9);
  const auto city = blob_city(g, 6, 20);
  const auto a = write_fold_file(city, assign_folds(city, 6, 7), 6, 7);
  const auto b = write_fold_file(city, assign_folds(city, 6, 7), 6, 7);
  CHECK(a == b);
  CHECK(a.rfind("# k=6 seed=7\nlat,lon,fold\n", 0) == 0);
  const auto loaded = read_fold_file(a);
  CHECK(loaded.k == 6);
  CHECK(loaded.seed == 7);
  REQUIRE(loaded.rows.size() == city.size());
  const auto folds = assign_folds(city, 6, 7);
  for (std::size_t i = 0; i < city.size(); ++i) {
    CHECK(loaded.rows[i].fold == folds[i].fold);
    CHECK(std::abs(loaded.rows[i].location.lat - city[i].location.lat) < 5e-7);
  }
  CHECK(code_of([] { read_fold_file("lat,lon,fold\n1,2,0\n"); }) == ErrorCode::ParseError);
}

TEST_CASE("k = 1 folds and tiny inputs") {
  const std::vector<FusedRecord> one{make_fused_record({50, 6}, 1900, Source::OSM)};
  const auto f = assign_folds(one, 1, 1);
  REQUIRE(f.size() == 1);
  CHECK(f[0].fold == 0);
  CHECK(code_of([&] { assign_folds(one, 2, 1); }) == ErrorCode::TooFewDistinctPoints);
  CHECK(code_of([] { assign_folds({}, 1, 1); }) == ErrorCode::EmptyInput);
}
