#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "irrt/collision_worlds.hpp"
#include "irrt/core_types.hpp"
#include "irrt/informed_sampling.hpp"
#include "irrt/nn_index.hpp"

namespace irrt {

/// Planner graph. Vertex 0 is the root and is its own parent.
class Tree {
 public:
  explicit Tree(const StateVec& root);

  std::size_t size() const { return parent_.size(); }
  std::size_t dim() const { return dim_; }
  std::span<const double> state(VertexId v) const {
    return {coords_.data() + static_cast<std::size_t>(v.value) * dim_, dim_};
  }
  StateVec state_vec(VertexId v) const;
  VertexId parent(VertexId v) const { return VertexId{parent_[v.value]}; }
  double cost_to_come(VertexId v) const { return cost_[v.value]; }
  const std::vector<std::uint32_t>& children(VertexId v) const { return children_[v.value]; }

  VertexId add_vertex(std::span<const double> x, VertexId parent, double edge_length);

  /// Re-parents `child` and propagates the cost change to its descendants.
  /// `visit` is called for every vertex whose cost changed.
  void rewire(VertexId child, VertexId new_parent, double edge_length,
              const std::function<void(VertexId)>& visit);

 private:
  std::size_t dim_;
  std::vector<double> coords_;
  std::vector<std::uint32_t> parent_;
  std::vector<double> edge_length_;
  std::vector<double> cost_;
  std::vector<std::vector<std::uint32_t>> children_;
};

enum class PlannerMode { rrt_star, informed_rrt_star };

std::string to_string(PlannerMode mode);
PlannerMode planner_mode_from_string(const std::string& name);

struct PlannerConfig {
  PlannerMode mode = PlannerMode::informed_rrt_star;
  /// Multiplier on the lower-bound rewiring radius; must be >= 1.
  double gamma_factor = 1.1;
  /// Steering distance. Unset means equal to the rewiring radius each iteration.
  std::optional<double> fixed_eta;
  std::size_t max_iterations = 10'000;
  /// Stop this many iterations after the first solution.
  std::optional<std::size_t> iterations_after_solution;
  /// Wall-clock budget in seconds.
  std::optional<double> time_budget;
  std::uint64_t seed = 0;
  /// Stop once the best cost is <= target_cost.
  std::optional<double> target_cost;
  /// Extra timeline events every k iterations (0 disables).
  std::size_t checkpoint_every = 0;
  /// Informed mode only: compute the rewiring radius from the informed set.
  bool informed_rewire_radius = true;
  /// Informed mode only: pass c_max = infinity to Sample forever.
  bool force_uniform_sampling = false;
};

/// Validates gamma_factor, eta, and budgets.
void validate(const PlannerConfig& config);

struct CostEvent {
  std::size_t iteration = 0;
  double elapsed_s = 0.0;
  Cost cost = Cost::infinite();
};

enum class Termination { max_iterations, post_solution_budget, time_budget, target_reached };

std::string to_string(Termination reason);

/// Per-iteration view handed to PlannerObserver.
struct IterationInfo {
  std::size_t iteration;
  /// Best cost used for this iteration's Sample call.
  Cost c_best;
  const StateVec& x_rand;
  double radius;
  const Tree& tree;
};

using PlannerObserver = std::function<void(const IterationInfo&)>;

struct PlanResult {
  Tree tree;
  std::vector<VertexId> solutions;
  std::optional<VertexId> best_vertex;
  Cost best_cost = Cost::infinite();
  std::vector<CostEvent> timeline;
  Termination termination = Termination::max_iterations;
  std::size_t iterations = 0;
  std::optional<std::size_t> first_solution_iteration;
  StateVec x_goal;
};

/// Returns x_to if it is within eta of x_from, else the point at distance eta
/// towards x_to.
StateVec steer(const StateVec& x_from, const StateVec& x_to, double eta);

/// gamma_factor * 2 (1 + 1/n)^(1/n) (measure / zeta_n)^(1/n) (log m / m)^(1/n)
/// for m >= 2, otherwise `diameter`.
double rewiring_radius(std::size_t num_vertices, double domain_measure, std::size_t n,
                       double gamma_factor, double diameter);

/// RRT* or Informed RRT*. A solution vertex x in the goal ball contributes
/// cost_to_come(x) + |x - x_goal|, the cost of finishing the path at x_goal.
PlanResult plan(const ProblemDef& problem, const PlannerConfig& config,
                const PlannerObserver& observer = {});

/// Start state, tree path to the best solution vertex, then x_goal if distinct.
/// Throws NoSolution if no solution was found.
PathSeq extract_path(const PlanResult& result);

/// Parent-link acyclicity, cost recursion to `tolerance`, and collision-free
/// edges. Returns an empty string when consistent, otherwise the first problem.
std::string check_tree(const Tree& tree, const World& world, double tolerance = 1e-9);

}  // namespace irrt
