#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "irrt/collision_worlds.hpp"
#include "irrt/core_types.hpp"

using namespace irrt;

TEST_CASE("state vectors reject non-finite coordinates") {
  CHECK_THROWS_AS(StateVec({0.0, std::numeric_limits<double>::quiet_NaN()}), InvalidInput);
  CHECK_THROWS_AS(StateVec({std::numeric_limits<double>::infinity()}), InvalidInput);
  CHECK_NOTHROW(StateVec({1.0, -2.0}));
}

TEST_CASE("state vector arithmetic") {
  const StateVec a{1.0, 2.0};
  const StateVec b{3.0, -1.0};
  CHECK(a + b == StateVec{4.0, 1.0});
  CHECK(b - a == StateVec{2.0, -3.0});
  CHECK(2.0 * a == StateVec{2.0, 4.0});
  CHECK(distance(StateVec{0.0, 0.0}, StateVec{3.0, 4.0}) == 5.0);
  CHECK(norm(StateVec{3.0, 4.0}) == 5.0);
  CHECK_THROWS_AS(distance(StateVec{0.0}, StateVec{0.0, 1.0}), InvalidInput);
}

TEST_CASE("cost ordering with an explicit infinity") {
  const Cost inf = Cost::infinite();
  const Cost one(1.0);
  CHECK(one < inf);
  CHECK_FALSE(inf < inf);
  CHECK(inf == Cost::infinite());
  CHECK(inf.as_double() == std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(inf.value(), InvalidInput);
  CHECK_THROWS_AS(Cost(-1.0), InvalidInput);
  CHECK_THROWS_AS(Cost(std::numeric_limits<double>::quiet_NaN()), InvalidInput);
  CHECK(Cost(2.0) > one);
}

TEST_CASE("path_cost") {
  CHECK(path_cost({StateVec{0.0, 0.0}, StateVec{3.0, 4.0}}).value() == 5.0);
  CHECK(path_cost({StateVec{0.0, 0.0}, StateVec{1.0, 0.0}, StateVec{1.0, 1.0}}).value() == 2.0);
  CHECK(path_cost({StateVec{0.0, 0.0}, StateVec{0.0, 0.0}}).value() == 0.0);
  CHECK_THROWS_AS(path_cost({StateVec{0.0, 0.0}, StateVec{1.0}}), InvalidInput);
  CHECK_THROWS_AS(path_cost({StateVec{0.0, 0.0}}), InvalidInput);
}

TEST_CASE("path cost is invariant under reversal") {
  Rng rng(7);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    PathSeq path;
    for (int k = 0; k < 2 + trial % 6; ++k) path.push_back(StateVec{u(rng), u(rng), u(rng)});
    PathSeq rev(path.rbegin(), path.rend());
    CHECK(path_cost(rev).value() == doctest::Approx(path_cost(path).value()).epsilon(1e-14));
  }
}

TEST_CASE("heuristic_f") {
  const StateVec s{0.0, 0.0};
  const StateVec g{1.0, 0.0};
  CHECK(heuristic_f(StateVec{0.25, 0.0}, s, g).value() == 1.0);
  CHECK(heuristic_f(s, s, g).value() == 1.0);
  CHECK(heuristic_f(StateVec{0.5, 0.5}, s, g).value() ==
        doctest::Approx(2.0 * std::sqrt(0.5)).epsilon(1e-15));
  CHECK_THROWS_AS(heuristic_f(StateVec{0.5}, s, g), InvalidInput);

  // Admissibility floor: never below the straight-line distance.
  Rng rng(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int k = 0; k < 1000; ++k) {
    const StateVec x{u(rng), u(rng)};
    CHECK(heuristic_f(x, s, g).value() >= 1.0);
  }
}

TEST_CASE("problem definition validation") {
  auto world = std::make_shared<const World>(
      StateVec{0.0, 0.0}, StateVec{10.0, 10.0},
      std::vector<AabbObstacle>{AabbObstacle(StateVec{4.0, 4.0}, StateVec{6.0, 6.0})});
  const ProblemDef ok(world, StateVec{1.0, 1.0}, StateVec{9.0, 1.0}, 0.5);
  CHECK(ok.c_min() == 8.0);
  CHECK(ok.bounds_measure() == 100.0);
  CHECK(ok.bounds_diameter() == doctest::Approx(std::sqrt(200.0)));
  CHECK(ok.in_goal_region(StateVec{8.6, 1.0}));
  CHECK_FALSE(ok.in_goal_region(StateVec{8.4, 1.0}));

  CHECK_THROWS_AS(ProblemDef(world, StateVec{1.0, 1.0}, StateVec{1.0, 1.0}, 0.5), DegenerateGeometry);
  CHECK_THROWS_AS(ProblemDef(world, StateVec{5.0, 5.0}, StateVec{9.0, 1.0}, 0.5), InvalidInput);
  CHECK_THROWS_AS(ProblemDef(world, StateVec{-1.0, 1.0}, StateVec{9.0, 1.0}, 0.5), InvalidInput);
  CHECK_THROWS_AS(ProblemDef(world, StateVec{1.0, 1.0, 1.0}, StateVec{9.0, 1.0, 1.0}, 0.5),
                  InvalidInput);
  CHECK_THROWS_AS(ProblemDef(world, StateVec{1.0, 1.0}, StateVec{9.0, 1.0}, -0.5), InvalidInput);
  CHECK_THROWS_AS(ProblemDef(nullptr, StateVec{1.0, 1.0}, StateVec{9.0, 1.0}, 0.5), InvalidInput);
}
