#include "irrt/collision_worlds.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>
#include <sstream>

namespace irrt {

namespace {

void check_dim(const World& world, const StateVec& x) {
  if (x.dim() != world.dim()) throw InvalidInput("state dimension does not match the world");
}

// Parametric interval of the segment a + t(b - a), t in [0, 1], that lies in
// the closed box [lo, hi]. Returns false if the interval is empty.
bool segment_hits_box(std::span<const double> a, std::span<const double> b,
                      std::span<const double> lo, std::span<const double> hi) {
  double t_enter = 0.0;
  double t_exit = 1.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = b[i] - a[i];
    if (d == 0.0) {
      if (a[i] < lo[i] || a[i] > hi[i]) return false;
      continue;
    }
    double t0 = (lo[i] - a[i]) / d;
    double t1 = (hi[i] - a[i]) / d;
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
    if (t_enter > t_exit) return false;
  }
  return true;
}

bool point_in_box(std::span<const double> x, std::span<const double> lo,
                  std::span<const double> hi) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < lo[i] || x[i] > hi[i]) return false;
  }
  return true;
}

double box_point_distance(const AabbObstacle& box, const StateVec& x) {
  double sum = 0.0;
  for (std::size_t i = 0; i < x.dim(); ++i) {
    double gap = 0.0;
    if (x[i] < box.lo[i]) gap = box.lo[i] - x[i];
    if (x[i] > box.hi[i]) gap = x[i] - box.hi[i];
    sum += gap * gap;
  }
  return std::sqrt(sum);
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

double parse_double(const std::string& token) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw InvalidInput("malformed number '" + token + "'");
  return v;
}

void write_vec(std::ostringstream& out, const StateVec& x) {
  for (double c : x.coords()) out << ' ' << format_double(c);
}

StateVec read_vec(std::istringstream& in, std::size_t n) {
  std::vector<double> coords(n);
  for (auto& c : coords) {
    std::string token;
    if (!(in >> token)) throw InvalidInput("truncated state in problem file");
    c = parse_double(token);
  }
  return StateVec(std::move(coords));
}

}  // namespace

AabbObstacle::AabbObstacle(StateVec lo_, StateVec hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
  if (lo.dim() != hi.dim() || lo.dim() == 0) throw InvalidInput("obstacle corner dimensions");
  for (std::size_t i = 0; i < lo.dim(); ++i) {
    if (!(lo[i] < hi[i])) throw InvalidInput("obstacle must have lo < hi on every axis");
  }
}

World::World(StateVec bounds_lo, StateVec bounds_hi, std::vector<AabbObstacle> obstacles)
    : bounds_lo_(std::move(bounds_lo)),
      bounds_hi_(std::move(bounds_hi)),
      obstacles_(std::move(obstacles)) {
  if (bounds_lo_.dim() == 0 || bounds_lo_.dim() != bounds_hi_.dim())
    throw InvalidInput("bounds dimension");
  for (std::size_t i = 0; i < dim(); ++i) {
    if (!(bounds_lo_[i] < bounds_hi_[i])) throw InvalidInput("bounds must have lo < hi");
  }
  for (const auto& box : obstacles_) {
    if (box.lo.dim() != dim()) throw InvalidInput("obstacle dimension does not match bounds");
    for (std::size_t i = 0; i < dim(); ++i) {
      if (box.hi[i] < bounds_lo_[i] || box.lo[i] > bounds_hi_[i])
        throw InvalidInput("obstacle lies entirely outside the bounds");
    }
  }
}

bool World::in_bounds(std::span<const double> x) const {
  return point_in_box(x, bounds_lo_.coords(), bounds_hi_.coords());
}

bool state_free_unchecked(const World& world, std::span<const double> x) {
  if (!world.in_bounds(x)) return false;
  for (const auto& box : world.obstacles()) {
    if (point_in_box(x, box.lo.coords(), box.hi.coords())) return false;
  }
  return true;
}

bool segment_free_unchecked(const World& world, std::span<const double> a,
                            std::span<const double> b) {
  // The bounds box is convex, so endpoint containment covers the segment.
  if (!world.in_bounds(a) || !world.in_bounds(b)) return false;
  for (const auto& box : world.obstacles()) {
    if (segment_hits_box(a, b, box.lo.coords(), box.hi.coords())) return false;
  }
  return true;
}

bool is_state_free(const World& world, const StateVec& x) {
  check_dim(world, x);
  return state_free_unchecked(world, x.coords());
}

bool is_segment_free(const World& world, const StateVec& a, const StateVec& b) {
  check_dim(world, a);
  check_dim(world, b);
  return segment_free_unchecked(world, a.coords(), b.coords());
}

// ---------------------------------------------------------------------------
// Toy problems

WorldProblem wall_world(const WallParams& p) {
  if (p.n < 2) throw InvalidInput("wall world needs n >= 2");
  if (!(p.l > 0.0) || !(p.d > 0.0) || p.w < 0.0 || p.h < 0.0)
    throw InvalidInput("wall world parameters must be positive");
  if (!(p.w < p.d)) throw InvalidInput("wall thickness must be smaller than d");
  if (p.d > p.l) throw InvalidInput("start and goal must fit in the map");
  if (p.h > 0.0 && p.w > 0.0 && p.offset - p.h / 2.0 <= -p.l / 2.0 &&
      p.offset + p.h / 2.0 >= p.l / 2.0)
    throw InvalidInput("wall seals the map");

  StateVec lo(p.n, -p.l / 2.0);
  StateVec hi(p.n, p.l / 2.0);
  std::vector<AabbObstacle> obstacles;
  if (p.w > 0.0 && p.h > 0.0) {
    StateVec wlo(p.n, -p.h / 2.0);
    StateVec whi(p.n, p.h / 2.0);
    wlo[0] = -p.w / 2.0;
    whi[0] = p.w / 2.0;
    wlo[1] += p.offset;
    whi[1] += p.offset;
    obstacles.emplace_back(wlo, whi);
  }
  auto world = std::make_shared<const World>(lo, hi, std::move(obstacles));
  StateVec start(p.n, 0.0);
  StateVec goal(p.n, 0.0);
  start[0] = -p.d / 2.0;
  goal[0] = p.d / 2.0;
  return {world, ProblemDef(world, start, goal, p.r_goal_fraction * p.d)};
}

namespace {

double corner_route(double d, double w, double corner_offset) {
  const double leg = d / 2.0 - w / 2.0;
  return 2.0 * std::hypot(leg, corner_offset) + w;
}

}  // namespace

Cost analytic_optimum_wall(const WallParams& p) {
  if (p.n != 2) throw Unsupported("analytic wall optimum is only available for n = 2");
  if (p.w == 0.0 || p.h == 0.0) return Cost(p.d);
  const double top = p.offset + p.h / 2.0;
  const double bottom = p.offset - p.h / 2.0;
  if (bottom > 0.0 || top < 0.0) return Cost(p.d);
  double best = std::numeric_limits<double>::infinity();
  if (top < p.l / 2.0) best = std::min(best, corner_route(p.d, p.w, top));
  if (bottom > -p.l / 2.0) best = std::min(best, corner_route(p.d, p.w, -bottom));
  return Cost(best);
}

WorldProblem gap_world(const GapParams& p) {
  if (!(p.h > 0.0) || !(p.h_g > 0.0) || !(p.w > 0.0) || !(p.d > 0.0) || !(p.l > 0.0))
    throw InvalidInput("gap world parameters must be positive");
  if (p.h_g > p.h) throw InvalidInput("gap is taller than the wall");
  const double gap_lo = p.y_g - p.h_g / 2.0;
  const double gap_hi = p.y_g + p.h_g / 2.0;
  if (gap_lo < -p.h / 2.0 || gap_hi > p.h / 2.0) throw InvalidInput("gap lies outside the wall");
  if (!(p.h < p.l)) throw InvalidInput("wall must leave flanking routes (h < l)");
  if (!(p.w < p.d) || p.d > p.l) throw InvalidInput("start/goal placement");

  std::vector<AabbObstacle> obstacles;
  if (gap_lo > -p.h / 2.0)
    obstacles.emplace_back(StateVec{-p.w / 2.0, -p.h / 2.0}, StateVec{p.w / 2.0, gap_lo});
  if (gap_hi < p.h / 2.0)
    obstacles.emplace_back(StateVec{-p.w / 2.0, gap_hi}, StateVec{p.w / 2.0, p.h / 2.0});
  auto world = std::make_shared<const World>(StateVec{-p.l / 2.0, -p.l / 2.0},
                                             StateVec{p.l / 2.0, p.l / 2.0}, std::move(obstacles));
  return {world, ProblemDef(world, StateVec{-p.d / 2.0, 0.0}, StateVec{p.d / 2.0, 0.0},
                            p.r_goal_fraction * p.d)};
}

Cost flanking_cost(const GapParams& p) { return Cost(corner_route(p.d, p.w, p.h / 2.0)); }

Cost through_gap_cost(const GapParams& p) {
  const double gap_lo = p.y_g - p.h_g / 2.0;
  const double gap_hi = p.y_g + p.h_g / 2.0;
  if (gap_lo < 0.0 && gap_hi > 0.0) return Cost(p.d);
  const double offset = gap_lo >= 0.0 ? gap_lo : gap_hi;
  return Cost(corner_route(p.d, p.w, offset));
}

// ---------------------------------------------------------------------------
// Random worlds

bool grid_connected(const ProblemDef& problem, std::size_t cells_per_axis) {
  const std::size_t n = problem.dim();
  if (n > 3) throw Unsupported("grid connectivity is limited to n <= 3");
  if (cells_per_axis < 2) throw InvalidInput("grid needs at least two cells per axis");
  const World& world = problem.world();

  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= cells_per_axis;
  std::vector<double> step(n);
  for (std::size_t i = 0; i < n; ++i)
    step[i] = (world.bounds_hi()[i] - world.bounds_lo()[i]) / static_cast<double>(cells_per_axis);

  auto node_state = [&](std::size_t index) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = index % cells_per_axis;
      index /= cells_per_axis;
      x[i] = world.bounds_lo()[i] + (static_cast<double>(k) + 0.5) * step[i];
    }
    return StateVec(std::move(x));
  };
  auto cell_of = [&](const StateVec& x) {
    std::vector<std::size_t> cell(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double f = (x[i] - world.bounds_lo()[i]) / step[i];
      cell[i] = std::min(cells_per_axis - 1, static_cast<std::size_t>(std::max(0.0, f)));
    }
    return cell;
  };
  auto flatten = [&](const std::vector<std::size_t>& cell) {
    std::size_t index = 0;
    for (std::size_t i = n; i-- > 0;) index = index * cells_per_axis + cell[i];
    return index;
  };

  std::size_t combos = 1;
  for (std::size_t i = 0; i < n; ++i) combos *= 3;

  auto neighbours_of = [&](const StateVec& x, bool include_self) {
    std::vector<std::size_t> out;
    const auto cell = cell_of(x);
    for (std::size_t c = 0; c < combos; ++c) {
      std::size_t k = c;
      std::vector<std::size_t> nb(n);
      bool ok = true;
      bool zero = true;
      for (std::size_t i = 0; i < n; ++i) {
        const int o = static_cast<int>(k % 3) - 1;
        k /= 3;
        zero = zero && o == 0;
        const long v = static_cast<long>(cell[i]) + o;
        if (v < 0 || v >= static_cast<long>(cells_per_axis)) ok = false;
        nb[i] = static_cast<std::size_t>(std::max(0L, v));
      }
      if (ok && (include_self || !zero)) out.push_back(flatten(nb));
    }
    return out;
  };

  std::vector<signed char> free_cache(total, -1);
  auto node_free = [&](std::size_t index) {
    if (free_cache[index] < 0) free_cache[index] = is_state_free(world, node_state(index)) ? 1 : 0;
    return free_cache[index] == 1;
  };

  std::vector<bool> is_goal_node(total, false);
  for (std::size_t g : neighbours_of(problem.x_goal(), true)) {
    if (node_free(g) && is_segment_free(world, node_state(g), problem.x_goal()))
      is_goal_node[g] = true;
  }

  std::vector<bool> seen(total, false);
  std::deque<std::size_t> queue;
  for (std::size_t s : neighbours_of(problem.x_start(), true)) {
    if (node_free(s) && is_segment_free(world, problem.x_start(), node_state(s))) {
      seen[s] = true;
      queue.push_back(s);
    }
  }
  if (is_segment_free(world, problem.x_start(), problem.x_goal())) return true;
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    if (is_goal_node[u]) return true;
    const StateVec xu = node_state(u);
    for (std::size_t v : neighbours_of(xu, false)) {
      if (seen[v] || !node_free(v)) continue;
      if (!is_segment_free(world, xu, node_state(v))) continue;
      seen[v] = true;
      queue.push_back(v);
    }
  }
  return false;
}

WorldProblem random_world(const RandomWorldSpec& spec, const FeasibilityProbe& probe) {
  const std::size_t n = spec.n;
  if (n == 0 || spec.bounds_lo.dim() != n || spec.bounds_hi.dim() != n || spec.start.dim() != n ||
      spec.goal.dim() != n)
    throw InvalidInput("random world spec dimensions");
  if (!(spec.size_min > 0.0) || spec.size_max < spec.size_min)
    throw InvalidInput("random world size range");
  if (n > 3 && !probe) throw InvalidInput("random worlds with n > 3 need a feasibility probe");

  constexpr int kWorldAttempts = 100;
  constexpr int kObstacleAttempts = 1000;
  const double clearance = std::max(spec.r_goal, 0.0);

  Rng rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (int attempt = 0; attempt < kWorldAttempts; ++attempt) {
    std::vector<AabbObstacle> obstacles;
    obstacles.reserve(spec.obstacle_count);
    for (std::size_t k = 0; k < spec.obstacle_count; ++k) {
      bool placed = false;
      for (int tries = 0; tries < kObstacleAttempts && !placed; ++tries) {
        std::vector<double> lo(n), hi(n);
        for (std::size_t i = 0; i < n; ++i) {
          const double span = spec.bounds_hi[i] - spec.bounds_lo[i];
          const double centre = spec.bounds_lo[i] + unit(rng) * span;
          const double edge = spec.size_min + unit(rng) * (spec.size_max - spec.size_min);
          lo[i] = centre - edge / 2.0;
          hi[i] = centre + edge / 2.0;
        }
        AabbObstacle box(StateVec(std::move(lo)), StateVec(std::move(hi)));
        if (box_point_distance(box, spec.start) <= clearance) continue;
        if (box_point_distance(box, spec.goal) <= clearance) continue;
        obstacles.push_back(std::move(box));
        placed = true;
      }
      if (!placed) throw GenerationFailed("could not place obstacle clear of start and goal");
    }
    auto world = std::make_shared<const World>(spec.bounds_lo, spec.bounds_hi, std::move(obstacles));
    ProblemDef problem(world, spec.start, spec.goal, spec.r_goal);
    const bool feasible =
        n <= 3 ? grid_connected(problem, n == 2 ? 100 : 30) : probe(problem);
    if (feasible) return {world, problem};
  }
  throw GenerationFailed("no feasible random world within the retry budget");
}

// ---------------------------------------------------------------------------
// Serialization

std::string serialize_problem(const ProblemDef& problem) {
  std::ostringstream out;
  const World& world = problem.world();
  out << "irrt-problem 1\n";
  out << "dim " << problem.dim() << '\n';
  out << "bounds_lo";
  write_vec(out, world.bounds_lo());
  out << "\nbounds_hi";
  write_vec(out, world.bounds_hi());
  out << "\nstart";
  write_vec(out, problem.x_start());
  out << "\ngoal";
  write_vec(out, problem.x_goal());
  out << "\nr_goal " << format_double(problem.r_goal()) << '\n';
  out << "obstacles " << world.obstacles().size() << '\n';
  for (const auto& box : world.obstacles()) {
    out << "box";
    write_vec(out, box.lo);
    write_vec(out, box.hi);
    out << '\n';
  }
  return out.str();
}

WorldProblem parse_problem(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  std::optional<StateVec> lo, hi, start, goal;
  std::optional<double> r_goal;
  std::vector<AabbObstacle> obstacles;
  bool header = false;

  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string key;
    fields >> key;
    if (key == "irrt-problem") {
      int version = 0;
      fields >> version;
      if (version != 1) throw InvalidInput("unsupported problem file version");
      header = true;
    } else if (key == "dim") {
      fields >> n;
      if (n == 0) throw InvalidInput("dimension must be positive");
    } else if (n == 0) {
      throw InvalidInput("problem file must declare dim before '" + key + "'");
    } else if (key == "bounds_lo") {
      lo = read_vec(fields, n);
    } else if (key == "bounds_hi") {
      hi = read_vec(fields, n);
    } else if (key == "start") {
      start = read_vec(fields, n);
    } else if (key == "goal") {
      goal = read_vec(fields, n);
    } else if (key == "r_goal") {
      std::string token;
      fields >> token;
      r_goal = parse_double(token);
    } else if (key == "obstacles") {
      std::size_t count = 0;
      fields >> count;
      obstacles.reserve(count);
    } else if (key == "box") {
      StateVec blo = read_vec(fields, n);
      StateVec bhi = read_vec(fields, n);
      obstacles.emplace_back(std::move(blo), std::move(bhi));
    } else {
      throw InvalidInput("unknown key '" + key + "' in problem file");
    }
  }
  if (!header || !lo || !hi || !start || !goal || !r_goal)
    throw InvalidInput("problem file is missing required fields");
  auto world = std::make_shared<const World>(*lo, *hi, std::move(obstacles));
  return {world, ProblemDef(world, *start, *goal, *r_goal)};
}

std::uint64_t problem_hash(const ProblemDef& problem) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : serialize_problem(problem)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace irrt
