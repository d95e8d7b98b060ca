#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <limits>

#include "irrt/nn_index.hpp"
#include "irrt/oracle.hpp"

using namespace irrt;

namespace {

struct Points {
  std::vector<StateVec> pts;
  std::vector<VertexId> ids;
};

// Uniform points, a fraction of them snapped to a coarse lattice so exact
// duplicates and distance ties are common.
Points random_points(std::size_t n, std::size_t count, Rng& rng) {
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  Points p;
  for (std::size_t k = 0; k < count; ++k) {
    StateVec x(n);
    const bool snap = k % 3 == 0;
    for (std::size_t i = 0; i < n; ++i) x[i] = snap ? std::round(u(rng)) : u(rng);
    p.pts.push_back(x);
    p.ids.push_back(VertexId{static_cast<std::uint32_t>(3 * k + 1)});  // sparse ids
  }
  return p;
}

}  // namespace

TEST_CASE("construction and errors") {
  CHECK_THROWS_AS(NearestNeighborIndex(0), InvalidInput);
  NearestNeighborIndex index(2);
  CHECK(index.size() == 0);
  CHECK_THROWS_AS(index.nearest(StateVec{0.0, 0.0}.coords()), EmptyIndex);
  CHECK(index.near(StateVec{0.0, 0.0}.coords(), 5.0).empty());
  index.insert(StateVec{1.0, 1.0}, VertexId{4});
  CHECK(index.contains(VertexId{4}));
  CHECK_FALSE(index.contains(VertexId{3}));
  CHECK_THROWS_AS(index.insert(StateVec{2.0, 2.0}, VertexId{4}), InvalidInput);
  CHECK_THROWS_AS(index.insert(StateVec{2.0, 2.0, 2.0}, VertexId{5}), InvalidInput);
  CHECK_THROWS_AS(index.nearest(StateVec{1.0}.coords()), InvalidInput);
  CHECK_THROWS_AS(index.near(StateVec{1.0, 1.0}.coords(), -1.0), InvalidInput);
  CHECK_THROWS_AS(index.near(StateVec{1.0, 1.0}.coords(),
                             std::numeric_limits<double>::quiet_NaN()),
                  InvalidInput);
  CHECK(index.size() == 1);
}

TEST_CASE("ties break by the smaller id") {
  NearestNeighborIndex index(2);
  index.insert(StateVec{1.0, 0.0}, VertexId{9});
  index.insert(StateVec{-1.0, 0.0}, VertexId{2});
  index.insert(StateVec{0.0, 1.0}, VertexId{5});
  CHECK(index.nearest(StateVec{0.0, 0.0}.coords()) == VertexId{2});
  const auto all = index.near(StateVec{0.0, 0.0}.coords(), 1.0);
  REQUIRE(all.size() == 3);
  CHECK(all[0] == VertexId{2});
  CHECK(all[1] == VertexId{5});
  CHECK(all[2] == VertexId{9});
}

TEST_CASE("radius zero and coincident points") {
  NearestNeighborIndex index(3);
  for (std::uint32_t k = 0; k < 100; ++k) index.insert(StateVec{1.0, 2.0, 3.0}, VertexId{k});
  index.insert(StateVec{1.0, 2.0, 3.5}, VertexId{100});
  CHECK(index.near(StateVec{1.0, 2.0, 3.0}.coords(), 0.0).size() == 100);
  CHECK(index.nearest(StateVec{1.0, 2.0, 3.0}.coords()) == VertexId{0});
  CHECK(index.nearest(StateVec{1.0, 2.0, 3.4}.coords()) == VertexId{100});
  CHECK(index.near(StateVec{1.0, 2.0, 3.25}.coords(), 0.25).size() == 101);
}

TEST_CASE("matches a linear scan") {
  for (std::size_t n : {1, 2, 3, 5, 8}) {
    Rng rng(100 + n);
    const auto data = random_points(n, 3000, rng);
    NearestNeighborIndex index(n);
    std::uniform_real_distribution<double> u(-12.0, 12.0);
    std::uniform_real_distribution<double> ur(0.0, 6.0);
    for (std::size_t k = 0; k < data.pts.size(); ++k) {
      index.insert(data.pts[k], data.ids[k]);
      // Query at a spread of sizes so every rebuild and split state is exercised.
      if (k % 37 != 0 && k + 1 != data.pts.size()) continue;
      const std::span<const StateVec> pts(data.pts.data(), k + 1);
      const std::span<const VertexId> ids(data.ids.data(), k + 1);
      for (int q = 0; q < 10; ++q) {
        StateVec x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = q % 2 ? std::round(u(rng)) : u(rng);
        CHECK(index.nearest(x.coords()) == oracle::linear_nearest(pts, ids, x.coords()));
        const double r = ur(rng);
        CHECK(index.near(x.coords(), r) == oracle::linear_near(pts, ids, x.coords(), r));
      }
    }
    CHECK(index.size() == 3000);
    // A radius covering everything returns every id.
    CHECK(index.near(StateVec(n, 0.0).coords(), 1e6).size() == 3000);
  }
}

TEST_CASE("queries on stored points and on exact boundary radii") {
  Rng rng(5);
  const auto data = random_points(2, 500, rng);
  NearestNeighborIndex index(2);
  for (std::size_t k = 0; k < data.pts.size(); ++k) index.insert(data.pts[k], data.ids[k]);
  for (std::size_t k = 0; k < data.pts.size(); k += 7) {
    const auto& x = data.pts[k];
    CHECK(index.nearest(x.coords()) == oracle::linear_nearest(data.pts, data.ids, x.coords()));
    // A radius equal to an actual pairwise distance lands exactly on the boundary.
    const double r = distance(x, data.pts[(k * 13 + 1) % data.pts.size()]);
    CHECK(index.near(x.coords(), r) == oracle::linear_near(data.pts, data.ids, x.coords(), r));
  }
}
