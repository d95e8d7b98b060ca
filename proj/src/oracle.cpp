#include "irrt/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include <boost/math/distributions/chi_squared.hpp>

namespace irrt::oracle {

namespace {

// Draw uniformly from the box [-c_best/2, c_best/2] x [-b/2, b/2]^(n-1) with
// b = sqrt(c_best^2 - c_min^2), foci at (+-c_min/2, 0, ...). Returns the
// heuristic value of the draw.
struct AlignedBoxSampler {
  AlignedBoxSampler(double c_best, double c_min, std::size_t n)
      : c_best(c_best), c_min(c_min), n(n), conj(std::sqrt(c_best * c_best - c_min * c_min)) {}

  double box_measure() const { return c_best * std::pow(conj, static_cast<double>(n) - 1.0); }

  double draw(Rng& rng) {
    double along = (unit(rng) - 0.5) * c_best;
    double perp_sq = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
      const double y = (unit(rng) - 0.5) * conj;
      perp_sq += y * y;
    }
    const double to_start = along + c_min / 2.0;
    const double to_goal = along - c_min / 2.0;
    return std::sqrt(to_start * to_start + perp_sq) + std::sqrt(to_goal * to_goal + perp_sq);
  }

  double c_best;
  double c_min;
  std::size_t n;
  double conj;
  std::uniform_real_distribution<double> unit{0.0, 1.0};
};

bool inside_box(std::span<const double> x, const AabbObstacle& box) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < box.lo[i] || x[i] > box.hi[i]) return false;
  }
  return true;
}

// Signed distance to a closed box: positive outside, negative inside.
double signed_box_distance(std::span<const double> x, const AabbObstacle& box) {
  double outside_sq = 0.0;
  double inside = std::numeric_limits<double>::infinity();
  bool is_inside = true;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double gap = 0.0;
    if (x[i] < box.lo[i]) gap = box.lo[i] - x[i];
    if (x[i] > box.hi[i]) gap = x[i] - box.hi[i];
    if (gap > 0.0) is_inside = false;
    outside_sq += gap * gap;
    inside = std::min({inside, x[i] - box.lo[i], box.hi[i] - x[i]});
  }
  return is_inside ? -inside : std::sqrt(outside_sq);
}

}  // namespace

VolumeEstimate mc_volume_estimate(double c_best, double c_min, std::size_t n, std::size_t draws,
                                  Rng& rng) {
  if (draws < 10'000) throw InvalidInput("volume estimate needs at least 10^4 draws");
  if (n == 0 || c_best < c_min || c_min < 0.0) throw InvalidInput("volume estimate parameters");
  AlignedBoxSampler sampler(c_best, c_min, n);
  std::size_t hits = 0;
  for (std::size_t k = 0; k < draws; ++k) {
    if (sampler.draw(rng) <= c_best) ++hits;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(draws);
  const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(draws));
  VolumeEstimate out;
  out.box_measure = sampler.box_measure();
  out.acceptance = {p, se};
  out.volume = {p * out.box_measure, se * out.box_measure};
  return out;
}

double chi_square_quantile_999(std::size_t dof) {
  boost::math::chi_squared_distribution<double> dist(static_cast<double>(dof));
  return boost::math::quantile(boost::math::complement(dist, 0.001));
}

ChiSquareReport chi_square_uniformity(std::span<const StateVec> samples,
                                      const ProlateHyperspheroid& phs, std::size_t bins) {
  if (bins < 2) throw InvalidInput("chi-square test needs at least two bins");
  const std::size_t n = phs.dim();
  const StateVec& a = phs.x_start_focus();
  const StateVec& b = phs.x_goal_focus();
  const double c_best = phs.c_best();
  const double c_min = distance(a, b);
  const double r_transverse = c_best / 2.0;
  const double r_conj = std::sqrt(c_best * c_best - c_min * c_min) / 2.0;
  if (n >= 2 && !(r_conj > 0.0)) throw InvalidInput("degenerate hyperspheroid has zero-measure shells");
  const double expected = static_cast<double>(samples.size()) / static_cast<double>(bins);
  if (expected < 50.0) throw InvalidInput("chi-square test needs >= 50 expected samples per bin");

  std::vector<double> axis(n), centre(n);
  for (std::size_t i = 0; i < n; ++i) {
    axis[i] = (b[i] - a[i]) / c_min;
    centre[i] = (a[i] + b[i]) / 2.0;
  }
  // Shell k holds normalised radii in ((k/B)^(1/n), ((k+1)/B)^(1/n)], so
  // rho^n is uniform on [0, 1] under the null hypothesis.
  std::vector<std::size_t> counts(bins, 0);
  for (const auto& x : samples) {
    double along = 0.0;
    double total_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = x[i] - centre[i];
      along += d * axis[i];
      total_sq += d * d;
    }
    const double perp_sq = std::max(0.0, total_sq - along * along);
    double rho_sq = along * along / (r_transverse * r_transverse);
    if (n >= 2) rho_sq += perp_sq / (r_conj * r_conj);
    const double volume_fraction = std::pow(rho_sq, static_cast<double>(n) / 2.0);
    auto k = static_cast<std::size_t>(volume_fraction * static_cast<double>(bins));
    counts[std::min(k, bins - 1)]++;
  }
  ChiSquareReport report;
  report.bins = bins;
  report.dof = bins - 1;
  for (auto c : counts) {
    const double diff = static_cast<double>(c) - expected;
    report.statistic += diff * diff / expected;
  }
  report.threshold = chi_square_quantile_999(report.dof);
  report.pass = report.statistic < report.threshold;
  return report;
}

Estimate one_step_contraction_estimate(double c_best, double c_min, std::size_t n,
                                       std::size_t draws, Rng& rng) {
  if (!(c_best > c_min) || !(c_min > 0.0) || n == 0 || draws == 0)
    throw InvalidInput("contraction estimate needs c_best > c_min > 0");
  AlignedBoxSampler sampler(c_best, c_min, n);
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t accepted = 0;
  while (accepted < draws) {
    const double f = sampler.draw(rng);
    if (f > c_best) continue;
    sum += f;
    sum_sq += f * f;
    ++accepted;
  }
  const double count = static_cast<double>(draws);
  const double mean = sum / count;
  const double var = std::max(0.0, sum_sq / count - mean * mean);
  return {mean, std::sqrt(var / count)};
}

double metrication_bias(std::size_t n) {
  // Worst-case ratio of lattice path length to straight-line length, attained
  // where the step-cost vector (1, sqrt2 - 1, sqrt3 - sqrt2) is parallel to
  // the direction.
  switch (n) {
    case 1:
      return 0.0;
    case 2:
      return std::sqrt(1.0 + std::pow(std::sqrt(2.0) - 1.0, 2)) - 1.0;
    case 3:
      return std::sqrt(1.0 + std::pow(std::sqrt(2.0) - 1.0, 2) +
                       std::pow(std::sqrt(3.0) - std::sqrt(2.0), 2)) -
             1.0;
    default:
      throw Unsupported("metrication bias is tabulated for n <= 3");
  }
}

GridOptimum grid_dijkstra_optimum(const ProblemDef& problem, double resolution) {
  const std::size_t n = problem.dim();
  if (n > 3) throw Unsupported("grid oracle is limited to n <= 3");
  if (!(resolution > 0.0)) throw InvalidInput("grid resolution must be positive");
  const World& world = problem.world();

  std::vector<std::size_t> nodes_per_axis(n);
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const double cells = (world.bounds_hi()[i] - world.bounds_lo()[i]) / resolution;
    const double rounded = std::round(cells);
    if (std::abs(cells - rounded) > 1e-9 * std::max(1.0, cells))
      throw InvalidInput("grid resolution must divide the bounds");
    nodes_per_axis[i] = static_cast<std::size_t>(rounded) + 1;
    total *= nodes_per_axis[i];
  }

  auto unflatten = [&](std::size_t index) {
    std::vector<std::size_t> k(n);
    for (std::size_t i = 0; i < n; ++i) {
      k[i] = index % nodes_per_axis[i];
      index /= nodes_per_axis[i];
    }
    return k;
  };
  auto flatten = [&](const std::vector<std::size_t>& k) {
    std::size_t index = 0;
    for (std::size_t i = n; i-- > 0;) index = index * nodes_per_axis[i] + k[i];
    return index;
  };
  auto node_state = [&](std::size_t index) {
    const auto k = unflatten(index);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
      x[i] = world.bounds_lo()[i] + static_cast<double>(k[i]) * resolution;
    return StateVec(std::move(x));
  };

  std::vector<signed char> free_cache(total, -1);
  auto node_free = [&](std::size_t index) {
    if (free_cache[index] < 0) free_cache[index] = is_state_free(world, node_state(index)) ? 1 : 0;
    return free_cache[index] == 1;
  };

  // Lattice nodes at the corners of the cell containing x.
  auto cell_corners = [&](const StateVec& x) {
    std::vector<std::size_t> base(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double f = std::floor((x[i] - world.bounds_lo()[i]) / resolution);
      base[i] = static_cast<std::size_t>(
          std::clamp(f, 0.0, static_cast<double>(nodes_per_axis[i] - 1)));
    }
    std::vector<std::size_t> out;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
      auto k = base;
      bool ok = true;
      for (std::size_t i = 0; i < n; ++i) {
        if (mask & (std::size_t{1} << i)) {
          if (k[i] + 1 >= nodes_per_axis[i]) ok = false;
          ++k[i];
        }
      }
      if (ok) out.push_back(flatten(k));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  };

  std::size_t combos = 1;
  for (std::size_t i = 0; i < n; ++i) combos *= 3;

  GridOptimum result;
  result.bias_bound = metrication_bias(n);
  const StateVec& start = problem.x_start();
  const StateVec& goal = problem.x_goal();
  double best = std::numeric_limits<double>::infinity();
  if (is_segment_free(world, start, goal)) best = distance(start, goal);

  std::vector<double> goal_leg(total, std::numeric_limits<double>::infinity());
  for (auto g : cell_corners(goal)) {
    if (node_free(g) && is_segment_free(world, node_state(g), goal))
      goal_leg[g] = distance(node_state(g), goal);
  }

  std::vector<double> dist(total, std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  for (auto s : cell_corners(start)) {
    if (node_free(s) && is_segment_free(world, start, node_state(s))) {
      const double d = distance(start, node_state(s));
      if (d < dist[s]) {
        dist[s] = d;
        queue.emplace(d, s);
      }
    }
  }
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (d > dist[u]) continue;
    if (d >= best) break;
    if (std::isfinite(goal_leg[u])) best = std::min(best, d + goal_leg[u]);
    const auto ku = unflatten(u);
    const StateVec xu = node_state(u);
    for (std::size_t c = 0; c < combos; ++c) {
      std::size_t code = c;
      auto kv = ku;
      bool ok = true;
      bool zero = true;
      std::size_t diagonal = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const int o = static_cast<int>(code % 3) - 1;
        code /= 3;
        if (o != 0) {
          zero = false;
          ++diagonal;
        }
        const long v = static_cast<long>(ku[i]) + o;
        if (v < 0 || v >= static_cast<long>(nodes_per_axis[i])) ok = false;
        kv[i] = static_cast<std::size_t>(std::max(0L, v));
      }
      if (!ok || zero) continue;
      const std::size_t v = flatten(kv);
      if (!node_free(v)) continue;
      const double step = resolution * std::sqrt(static_cast<double>(diagonal));
      if (d + step >= dist[v]) continue;
      if (!is_segment_free(world, xu, node_state(v))) continue;
      dist[v] = d + step;
      queue.emplace(dist[v], v);
    }
  }
  if (std::isfinite(best)) result.cost = Cost(best);
  return result;
}

VertexId linear_nearest(std::span<const StateVec> points, std::span<const VertexId> ids,
                        std::span<const double> x) {
  if (points.empty()) throw EmptyIndex("linear scan over no points");
  double best_d2 = std::numeric_limits<double>::infinity();
  VertexId best{std::numeric_limits<std::uint32_t>::max()};
  for (std::size_t k = 0; k < points.size(); ++k) {
    const double d2 = squared_distance(points[k].coords(), x);
    if (d2 < best_d2 || (d2 == best_d2 && ids[k] < best)) {
      best_d2 = d2;
      best = ids[k];
    }
  }
  return best;
}

std::vector<VertexId> linear_near(std::span<const StateVec> points,
                                  std::span<const VertexId> ids, std::span<const double> x,
                                  double r) {
  std::vector<VertexId> out;
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (squared_distance(points[k].coords(), x) <= r * r) out.push_back(ids[k]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool segment_free_dense(const World& world, const StateVec& a, const StateVec& b,
                        std::size_t samples) {
  if (samples < 2) throw InvalidInput("dense check needs at least two samples");
  const std::size_t n = a.dim();
  std::vector<double> x(n);
  for (std::size_t k = 0; k < samples; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(samples - 1);
    for (std::size_t i = 0; i < n; ++i) x[i] = a[i] + t * (b[i] - a[i]);
    for (std::size_t i = 0; i < n; ++i) {
      if (x[i] < world.bounds_lo()[i] || x[i] > world.bounds_hi()[i]) return false;
    }
    for (const auto& box : world.obstacles()) {
      if (inside_box(x, box)) return false;
    }
  }
  return true;
}

double segment_clearance(const World& world, const StateVec& a, const StateVec& b) {
  const std::size_t n = a.dim();
  std::vector<double> x(n);
  auto along = [&](double t, const AabbObstacle& box) {
    for (std::size_t i = 0; i < n; ++i) x[i] = a[i] + t * (b[i] - a[i]);
    return signed_box_distance(x, box);
  };
  double nearest_free = std::numeric_limits<double>::infinity();
  double deepest = 0.0;
  bool collides = false;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (const auto& box : world.obstacles()) {
    // The signed distance to a convex set is convex along a line.
    double lo = 0.0;
    double hi = 1.0;
    double m1 = hi - inv_phi * (hi - lo);
    double m2 = lo + inv_phi * (hi - lo);
    double f1 = along(m1, box);
    double f2 = along(m2, box);
    for (int it = 0; it < 90; ++it) {
      if (f1 < f2) {
        hi = m2;
        m2 = m1;
        f2 = f1;
        m1 = hi - inv_phi * (hi - lo);
        f1 = along(m1, box);
      } else {
        lo = m1;
        m1 = m2;
        f1 = f2;
        m2 = lo + inv_phi * (hi - lo);
        f2 = along(m2, box);
      }
    }
    const double best = std::min({f1, f2, along(0.0, box), along(1.0, box)});
    if (best <= 0.0) {
      collides = true;
      deepest = std::max(deepest, -best);
    } else {
      nearest_free = std::min(nearest_free, best);
    }
  }
  return collides ? deepest : nearest_free;
}

}  // namespace irrt::oracle
