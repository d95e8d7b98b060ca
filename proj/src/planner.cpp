#include "irrt/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>

namespace irrt {

// ---------------------------------------------------------------------------
// Tree

Tree::Tree(const StateVec& root) : dim_(root.dim()) {
  coords_.assign(root.coords().begin(), root.coords().end());
  parent_.push_back(0);
  edge_length_.push_back(0.0);
  cost_.push_back(0.0);
  children_.emplace_back();
}

StateVec Tree::state_vec(VertexId v) const {
  const auto s = state(v);
  return StateVec(std::vector<double>(s.begin(), s.end()));
}

VertexId Tree::add_vertex(std::span<const double> x, VertexId parent, double edge_length) {
  const auto id = static_cast<std::uint32_t>(parent_.size());
  coords_.insert(coords_.end(), x.begin(), x.end());
  parent_.push_back(parent.value);
  edge_length_.push_back(edge_length);
  cost_.push_back(cost_[parent.value] + edge_length);
  children_.emplace_back();
  children_[parent.value].push_back(id);
  return VertexId{id};
}

void Tree::rewire(VertexId child, VertexId new_parent, double edge_length,
                  const std::function<void(VertexId)>& visit) {
  auto& siblings = children_[parent_[child.value]];
  const auto it = std::find(siblings.begin(), siblings.end(), child.value);
  if (it != siblings.end()) {
    *it = siblings.back();
    siblings.pop_back();
  }
  parent_[child.value] = new_parent.value;
  edge_length_[child.value] = edge_length;
  children_[new_parent.value].push_back(child.value);

  std::vector<std::uint32_t> stack{child.value};
  while (!stack.empty()) {
    const std::uint32_t v = stack.back();
    stack.pop_back();
    cost_[v] = cost_[parent_[v]] + edge_length_[v];
    if (visit) visit(VertexId{v});
    for (auto c : children_[v]) stack.push_back(c);
  }
}

std::string check_tree(const Tree& tree, const World& world, double tolerance) {
  if (tree.parent(VertexId{0}) != VertexId{0} || tree.cost_to_come(VertexId{0}) != 0.0)
    return "root must be its own parent with zero cost";
  for (std::uint32_t i = 1; i < tree.size(); ++i) {
    const VertexId v{i};
    // Walking up must reach the root within size() steps.
    VertexId cur = v;
    std::size_t steps = 0;
    while (cur.value != 0 && steps <= tree.size()) {
      cur = tree.parent(cur);
      ++steps;
    }
    if (cur.value != 0) return "cycle through vertex " + std::to_string(i);
    const VertexId p = tree.parent(v);
    const double edge = std::sqrt(squared_distance(tree.state(v), tree.state(p)));
    if (std::abs(tree.cost_to_come(v) - (tree.cost_to_come(p) + edge)) > tolerance)
      return "cost recursion broken at vertex " + std::to_string(i);
    if (!segment_free_unchecked(world, tree.state(p), tree.state(v)))
      return "edge into vertex " + std::to_string(i) + " is in collision";
  }
  return {};
}

// ---------------------------------------------------------------------------

std::string to_string(PlannerMode mode) {
  return mode == PlannerMode::rrt_star ? "rrt_star" : "informed_rrt_star";
}

PlannerMode planner_mode_from_string(const std::string& name) {
  if (name == "rrt_star") return PlannerMode::rrt_star;
  if (name == "informed_rrt_star") return PlannerMode::informed_rrt_star;
  throw InvalidInput("unknown planner mode '" + name + "'");
}

std::string to_string(Termination reason) {
  switch (reason) {
    case Termination::max_iterations:
      return "max_iterations";
    case Termination::post_solution_budget:
      return "post_solution_budget";
    case Termination::time_budget:
      return "time_budget";
    case Termination::target_reached:
      return "target_reached";
  }
  return "unknown";
}

void validate(const PlannerConfig& config) {
  if (!(config.gamma_factor >= 1.0)) throw InvalidInput("gamma_factor must be >= 1");
  if (config.fixed_eta && !(*config.fixed_eta > 0.0)) throw InvalidInput("eta must be positive");
  if (config.time_budget && !(*config.time_budget > 0.0))
    throw InvalidInput("time budget must be positive");
  if (config.target_cost && !(*config.target_cost >= 0.0))
    throw InvalidInput("target cost must be non-negative");
}

StateVec steer(const StateVec& x_from, const StateVec& x_to, double eta) {
  if (!(eta > 0.0)) throw InvalidInput("eta must be positive");
  const double dist = distance(x_from, x_to);
  if (dist <= eta) return x_to;
  const double t = eta / dist;
  std::vector<double> out(x_from.dim());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x_from[i] + t * (x_to[i] - x_from[i]);
  return StateVec(std::move(out));
}

double rewiring_radius(std::size_t num_vertices, double domain_measure, std::size_t n,
                       double gamma_factor, double diameter) {
  if (!(domain_measure > 0.0)) throw InvalidInput("domain measure must be positive");
  if (n == 0) throw InvalidInput("dimension must be at least 1");
  if (num_vertices < 2) return diameter;
  const double inv_n = 1.0 / static_cast<double>(n);
  const double m = static_cast<double>(num_vertices);
  const double gamma_star = 2.0 * std::pow(1.0 + inv_n, inv_n) *
                            std::pow(domain_measure / unit_ball_measure(n), inv_n);
  return gamma_factor * gamma_star * std::pow(std::log(m) / m, inv_n);
}

// ---------------------------------------------------------------------------
// Planner

namespace {

class PlannerRun {
 public:
  PlannerRun(const ProblemDef& problem, const PlannerConfig& config,
             const PlannerObserver& observer)
      : problem_(problem),
        config_(config),
        observer_(observer),
        world_(problem.world()),
        n_(problem.dim()),
        sampler_(problem),
        index_(problem.dim()),
        rng_(config.seed),
        result_{Tree(problem.x_start()), {}, {}, Cost::infinite(), {}, {}, 0, {}, problem.x_goal()} {
    index_.insert(problem.x_start(), VertexId{0});
    is_solution_.push_back(false);
    note_vertex(VertexId{0});
    // A start already inside the goal ball is a solution on its own.
    if (problem.in_goal_region(problem.x_start())) consider_solution(VertexId{0});
  }

  PlanResult run() {
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] {
      return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };
    const bool informed = config_.mode == PlannerMode::informed_rrt_star;

    if (result_.best_cost.is_finite()) {
      result_.first_solution_iteration = 0;
      result_.timeline.push_back({0, 0.0, result_.best_cost});
    }
    if (target_reached()) {
      result_.termination = Termination::target_reached;
      return std::move(result_);
    }

    result_.termination = Termination::max_iterations;
    for (std::size_t iteration = 1; iteration <= config_.max_iterations; ++iteration) {
      const Cost c_best = result_.best_cost;
      const Cost c_max = informed && !config_.force_uniform_sampling ? c_best : Cost::infinite();
      const StateVec x_rand = sampler_.sample(c_max, rng_);
      const double radius = current_radius(c_max);
      if (observer_) observer_(IterationInfo{iteration, c_best, x_rand, radius, result_.tree});

      extend(x_rand, radius);
      result_.iterations = iteration;

      if (result_.best_cost < c_best || (!c_best.is_finite() && result_.best_cost.is_finite())) {
        if (!result_.first_solution_iteration) result_.first_solution_iteration = iteration;
        result_.timeline.push_back({iteration, elapsed(), result_.best_cost});
      } else if (config_.checkpoint_every > 0 && iteration % config_.checkpoint_every == 0) {
        result_.timeline.push_back({iteration, elapsed(), result_.best_cost});
      }

      if (target_reached()) {
        result_.termination = Termination::target_reached;
        break;
      }
      if (config_.iterations_after_solution && result_.first_solution_iteration &&
          iteration - *result_.first_solution_iteration >= *config_.iterations_after_solution) {
        result_.termination = Termination::post_solution_budget;
        break;
      }
      if (config_.time_budget && elapsed() >= *config_.time_budget) {
        result_.termination = Termination::time_budget;
        break;
      }
    }
    if (result_.timeline.empty() || result_.timeline.back().iteration != result_.iterations)
      result_.timeline.push_back({result_.iterations, elapsed(), result_.best_cost});
    return std::move(result_);
  }

 private:
  bool target_reached() const {
    return config_.target_cost && result_.best_cost.is_finite() &&
           result_.best_cost.value() <= *config_.target_cost;
  }

  double current_radius(const Cost& c_max) const {
    double measure = problem_.bounds_measure();
    std::size_t m = result_.tree.size();
    if (c_max.is_finite() && config_.informed_rewire_radius) {
      const double informed_measure = phs_measure(
          std::max(c_max.value(), problem_.c_min()), problem_.c_min(), n_);
      // A fully degenerate informed set has zero measure; keep the global radius then.
      if (informed_measure > 0.0) {
        measure = std::min(measure, informed_measure);
        m = informed_heap_.size();
      }
    }
    return rewiring_radius(m, measure, n_, config_.gamma_factor, problem_.bounds_diameter());
  }

  void extend(const StateVec& x_rand, double radius) {
    Tree& tree = result_.tree;
    const VertexId nearest = index_.nearest(x_rand.coords());
    const double eta = config_.fixed_eta ? *config_.fixed_eta : radius;

    // Steer.
    const auto from = tree.state(nearest);
    const double dist = std::sqrt(squared_distance(from, x_rand.coords()));
    std::vector<double> x_new(x_rand.coords().begin(), x_rand.coords().end());
    if (dist > eta) {
      const double t = eta / dist;
      for (std::size_t i = 0; i < n_; ++i) x_new[i] = from[i] + t * (x_rand[i] - from[i]);
    }
    if (!segment_free_unchecked(world_, from, x_new)) return;

    // Choose parent among the neighbourhood; ties keep the first minimum.
    const std::vector<VertexId> near = index_.near(x_new, radius);
    std::vector<double> near_dist(near.size());
    for (std::size_t k = 0; k < near.size(); ++k)
      near_dist[k] = std::sqrt(squared_distance(tree.state(near[k]), x_new));

    VertexId x_min = nearest;
    double edge_min = std::sqrt(squared_distance(tree.state(nearest), x_new));
    double c_min = tree.cost_to_come(nearest) + edge_min;
    for (std::size_t k = 0; k < near.size(); ++k) {
      const double c_new = tree.cost_to_come(near[k]) + near_dist[k];
      if (c_new < c_min && segment_free_unchecked(world_, tree.state(near[k]), x_new)) {
        x_min = near[k];
        c_min = c_new;
        edge_min = near_dist[k];
      }
    }
    const VertexId v_new = tree.add_vertex(x_new, x_min, edge_min);
    index_.insert(x_new, v_new);
    is_solution_.push_back(false);
    note_vertex(v_new);

    // Rewire the neighbourhood through the new vertex.
    const auto visit = [this](VertexId v) {
      if (is_solution_[v.value]) update_best(v);
    };
    for (std::size_t k = 0; k < near.size(); ++k) {
      const VertexId x_near = near[k];
      const double c_new = tree.cost_to_come(v_new) + near_dist[k];
      if (c_new < tree.cost_to_come(x_near) &&
          segment_free_unchecked(world_, x_new, tree.state(x_near))) {
        tree.rewire(x_near, v_new, near_dist[k], visit);
      }
    }

    const StateVec x_new_vec(std::move(x_new));
    if (problem_.in_goal_region(x_new_vec)) consider_solution(v_new);
  }

  void consider_solution(VertexId v) {
    const auto x = result_.tree.state(v);
    if (!segment_free_unchecked(world_, x, problem_.x_goal().coords())) return;
    is_solution_[v.value] = true;
    result_.solutions.push_back(v);
    update_best(v);
  }

  void update_best(VertexId v) {
    const double goal_leg = std::sqrt(squared_distance(result_.tree.state(v), problem_.x_goal().coords()));
    const Cost candidate(result_.tree.cost_to_come(v) + goal_leg);
    if (candidate < result_.best_cost) {
      result_.best_cost = candidate;
      result_.best_vertex = v;
      prune_informed_count();
    }
  }

  // Tracks how many vertices have heuristic value <= c_best. The heuristic of
  // a vertex depends only on its position and c_best never increases, so a
  // max-heap of the counted values can be drained as c_best falls.
  void note_vertex(VertexId v) {
    const double f = heuristic_value(result_.tree.state(v), problem_.x_start().coords(),
                                     problem_.x_goal().coords());
    if (!result_.best_cost.is_finite() || f <= result_.best_cost.value()) informed_heap_.push(f);
  }

  void prune_informed_count() {
    const double c = result_.best_cost.value();
    while (!informed_heap_.empty() && informed_heap_.top() > c) informed_heap_.pop();
  }

  const ProblemDef& problem_;
  const PlannerConfig& config_;
  const PlannerObserver& observer_;
  const World& world_;
  std::size_t n_;
  InformedSampler sampler_;
  NearestNeighborIndex index_;
  Rng rng_;
  PlanResult result_;
  std::vector<bool> is_solution_;
  std::priority_queue<double> informed_heap_;
};

}  // namespace

PlanResult plan(const ProblemDef& problem, const PlannerConfig& config,
                const PlannerObserver& observer) {
  validate(config);
  PlannerRun run(problem, config, observer);
  return run.run();
}

PathSeq extract_path(const PlanResult& result) {
  if (!result.best_vertex) throw NoSolution("planner found no solution");
  PathSeq path;
  VertexId v = *result.best_vertex;
  while (true) {
    path.push_back(result.tree.state_vec(v));
    if (v.value == 0) break;
    v = result.tree.parent(v);
  }
  std::reverse(path.begin(), path.end());
  if (path.back() != result.x_goal) path.push_back(result.x_goal);
  return path;
}

}  // namespace irrt
