#include <doctest.h>

#include <cstring>
#include <vector>

#include "agecohort/simd/kernels.hpp"
#include "support/gen.hpp"

using namespace agecohort::simd;

namespace {

struct Cloud {
  std::vector<double> xs, ys;
  PointsView view() const { return {xs, ys}; }
};

Cloud random_cloud(testgen::Gen& g, std::size_t n, bool lattice) {
  Cloud c;
  for (std::size_t i = 0; i < n; ++i) {
    // Lattice points produce many exact distance ties.
    c.xs.push_back(lattice ? static_cast<double>(g.integer(-3, 3)) : g.normal() * 3);
    c.ys.push_back(lattice ? static_cast<double>(g.integer(-3, 3)) : g.normal() * 3);
  }
  return c;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("scalar reference kernel") {
  const Cloud pts{{0, 1, 5}, {0, 0, 5}};
  const Cloud cents{{0, 1}, {0, 0}};
  std::vector<int> labels(3);
  std::vector<double> d2(3);
  scalar::nearest_centroid(pts.view(), cents.view(), labels, d2);
  CHECK(labels == std::vector<int>{0, 1, 1});
  CHECK(d2 == std::vector<double>{0, 0, 41});
  const Cloud tie{{0.5}, {0}};
  std::vector<int> l1(1);
  std::vector<double> t1(1);
  scalar::nearest_centroid(tie.view(), cents.view(), l1, t1);
  CHECK(l1[0] == 0);

  std::vector<double> best{10, 10, 10};
  scalar::min_distance_update(pts.view(), 1, 0, best);
  CHECK(best == std::vector<double>{1, 0, 10});
}

TEST_CASE("dispatch reports an available isa") {
  CHECK(isa_available(Isa::Scalar));
  CHECK(isa_available(active_isa()));
  CHECK(to_string(Isa::Scalar) == "scalar");
}

#if defined(AGECOHORT_HAVE_AVX2_KERNELS)
TEST_CASE("avx2 kernels are bit-identical to scalar") {
  if (!isa_available(Isa::Avx2)) {
    MESSAGE("CPU lacks AVX2; equivalence not exercised");
    return;
  }
  testgen::Gen g(123);
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t n = static_cast<std::size_t>(g.integer(0, 67));
    const std::size_t k = static_cast<std::size_t>(g.integer(1, 9));
    const bool lattice = trial % 2 == 0;
    const auto pts = random_cloud(g, n, lattice);
    const auto cents = random_cloud(g, k, lattice);
    std::vector<int> la(n), lb(n);
    std::vector<double> da(n), db(n);
    nearest_centroid(Isa::Scalar, pts.view(), cents.view(), la, da);
    nearest_centroid(Isa::Avx2, pts.view(), cents.view(), lb, db);
    CHECK(la == lb);
    CHECK(same_bits(da, db));

    std::vector<double> ma(n), mb(n);
    for (std::size_t i = 0; i < n; ++i) ma[i] = mb[i] = g.uniform(0, 20);
    const double cx = g.normal(), cy = g.normal();
    min_distance_update(Isa::Scalar, pts.view(), cx, cy, ma);
    min_distance_update(Isa::Avx2, pts.view(), cx, cy, mb);
    CHECK(same_bits(ma, mb));
  }
}
#endif
