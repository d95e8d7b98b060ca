#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "irrt/core_types.hpp"

namespace irrt {

/// Closed axis-aligned box. Touching a face counts as collision.
struct AabbObstacle {
  AabbObstacle(StateVec lo, StateVec hi);

  StateVec lo;
  StateVec hi;
};

/// Bounded box state space with axis-aligned box obstacles.
class World {
 public:
  World(StateVec bounds_lo, StateVec bounds_hi, std::vector<AabbObstacle> obstacles = {});

  std::size_t dim() const { return bounds_lo_.dim(); }
  const StateVec& bounds_lo() const { return bounds_lo_; }
  const StateVec& bounds_hi() const { return bounds_hi_; }
  const std::vector<AabbObstacle>& obstacles() const { return obstacles_; }

  bool in_bounds(std::span<const double> x) const;

 private:
  StateVec bounds_lo_;
  StateVec bounds_hi_;
  std::vector<AabbObstacle> obstacles_;
};

bool is_state_free(const World& world, const StateVec& x);

/// Exact slab test of the closed segment [a, b] against every obstacle.
bool is_segment_free(const World& world, const StateVec& a, const StateVec& b);

/// Unchecked variants for hot loops where dimensions are already trusted.
bool state_free_unchecked(const World& world, std::span<const double> x);
bool segment_free_unchecked(const World& world, std::span<const double> a,
                            std::span<const double> b);

/// A world together with the query posed in it.
struct WorldProblem {
  std::shared_ptr<const World> world;
  ProblemDef problem;
};

/// Single wall between start and goal.
///
/// The map is the box [-l/2, l/2]^n. Start and goal sit at -d/2 and +d/2 on
/// the first axis. The wall is centred at the origin with thickness w along
/// the first axis and extent h along every other axis. `offset` shifts the
/// wall along the second axis; with it a tall wall can block one flank.
/// w = 0 or h = 0 yields an empty world.
struct WallParams {
  std::size_t n = 2;
  double l = 100.0;
  double d = 100.0;
  double w = 10.0;
  double h = 50.0;
  double offset = 0.0;
  /// Goal-ball radius as a fraction of d.
  double r_goal_fraction = 0.01;
};

WorldProblem wall_world(const WallParams& params);

/// Closed-form shortest path around the wall of a 2D wall_world.
Cost analytic_optimum_wall(const WallParams& params);

/// Wall with a single gap (2D only).
///
/// The map is [-l/2, l/2]^2 with start and goal at (-d/2, 0) and (d/2, 0).
/// The wall of thickness w spans y in [-h/2, h/2], minus the opening of
/// height h_g centred at y = y_g.
struct GapParams {
  double h = 100.0;
  double h_g = 5.0;
  double y_g = 3.0;
  double w = 10.0;
  double d = 100.0;
  double l = 200.0;
  double r_goal_fraction = 0.01;
};

WorldProblem gap_world(const GapParams& params);

/// Shortest path that goes around the outside of the gap wall.
Cost flanking_cost(const GapParams& params);

/// Shortest path through the opening, ignoring the flanking routes.
Cost through_gap_cost(const GapParams& params);

struct RandomWorldSpec {
  std::size_t n = 2;
  std::uint64_t seed = 0;
  std::size_t obstacle_count = 30;
  double size_min = 5.0;
  double size_max = 20.0;
  StateVec bounds_lo;
  StateVec bounds_hi;
  StateVec start;
  StateVec goal;
  double r_goal = 1.0;
};

/// Feasibility probe used for n >= 4, where grid connectivity is intractable.
/// Returns true if a path was found.
using FeasibilityProbe = std::function<bool(const ProblemDef&)>;

/// Deterministic in spec.seed. Worlds are certified feasible by a coarse grid
/// connectivity check for n <= 3, or by `probe` for larger n.
WorldProblem random_world(const RandomWorldSpec& spec, const FeasibilityProbe& probe = {});

/// Coarse grid reachability between start and goal (n <= 3).
bool grid_connected(const ProblemDef& problem, std::size_t cells_per_axis);

/// Text serialization with exact decimal round-trip.
std::string serialize_problem(const ProblemDef& problem);
WorldProblem parse_problem(const std::string& text);

/// FNV-1a of the serialized problem.
std::uint64_t problem_hash(const ProblemDef& problem);

}  // namespace irrt
