// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include "irrt/experiment.hpp"
#include "irrt/oracle.hpp"

using namespace irrt;
using namespace irrt::bench;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::size_t workers() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

StateVec random_point(std::size_t n, Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  StateVec x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = u(rng);
  return x;
}

// Random foci with |a - b| = c_min in general position.
std::pair<StateVec, StateVec> random_foci(std::size_t n, double c_min, Rng& rng) {
  const StateVec a = random_point(n, rng, -5.0, 5.0);
  StateVec dir = random_point(n, rng, -1.0, 1.0);
  const double len = norm(dir);
  StateVec b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = a[i] + c_min * dir[i] / len;
  return {a, b};
}

const SummaryRow& row_of(const std::vector<SummaryRow>& rows, double param,
                         const std::string& planner, const std::string& metric) {
  for (const auto& r : rows)
    if (r.cell.front().second == param && r.planner == planner && r.metric == metric) return r;
  throw std::runtime_error("missing summary row " + planner + "/" + metric);
}

// 1. Containment and uniformity of the direct sampler.
Outcome sampler_uniformity() {
  constexpr std::size_t kDraws = 100'000;
  constexpr std::size_t kShells = 20;
  constexpr double kSlack = 1e-9;
  Outcome o{true, ""};
  for (std::size_t n : {2, 3, 6}) {
    for (double ratio : {1.01, 1.5, 3.0}) {
      // One fixed stream per configuration.
      Rng rng(1000 * n + static_cast<std::uint64_t>(100 * ratio));
      const double c_min = 10.0;
      const auto [a, b] = random_foci(n, c_min, rng);
      const auto phs = phs_new(a, b, ratio * distance(a, b));
      std::vector<StateVec> samples;
      samples.reserve(kDraws);
      double worst = -1e300;
      for (std::size_t k = 0; k < kDraws; ++k) {
        samples.push_back(phs_sample(phs, rng));
        worst = std::max(worst, heuristic_value(samples.back().coords(), a.coords(), b.coords()) -
                                    phs.c_best());
      }
      const auto chi = oracle::chi_square_uniformity(samples, phs, kShells);
      const bool ok = worst <= kSlack && chi.pass;
      o.pass &= ok;
      if (!ok)
        o.detail += " n=" + std::to_string(n) + " ratio=" + fmt(ratio) + " excess=" + fmt(worst) +
                    " chi2=" + fmt(chi.statistic) + "/" + fmt(chi.threshold);
    }
  }
  if (o.pass) o.detail = " 9 configurations: containment and chi-square (20 shells, 0.999) pass";
  return o;
}

// 2. Rotation contract.
Outcome rotation_contract() {
  constexpr double kTol = 1e-10;
  Rng rng(202);
  double worst_orth = 0.0, worst_det = 0.0, worst_axis = 0.0;
  for (std::size_t n = 2; n <= 8; ++n) {
    for (int k = 0; k < 1000; ++k) {
      const StateVec a = random_point(n, rng, -10.0, 10.0);
      const StateVec b = random_point(n, rng, -10.0, 10.0);
      const RotationMatrix c = rotation_to_world_frame(a, b);
      const double len = distance(a, b);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          double dot = 0.0;
          for (std::size_t r = 0; r < n; ++r) dot += c(r, i) * c(r, j);
          worst_orth = std::max(worst_orth, std::abs(dot - (i == j ? 1.0 : 0.0)));
        }
        worst_axis = std::max(worst_axis, std::abs(c(i, 0) - (b[i] - a[i]) / len));
      }
      worst_det = std::max(worst_det, std::abs(determinant(c) - 1.0));
    }
  }
  const bool pass = worst_orth <= kTol && worst_det <= kTol && worst_axis <= kTol;
  return {pass, " max |C^T C - I| = " + fmt(worst_orth) + ", max |det C - 1| = " + fmt(worst_det) +
                    ", max |C e1 - a1| = " + fmt(worst_axis) + " (tol 1e-10)"};
}

// 3. Hyperspheroid measure against Monte-Carlo rejection.
Outcome volume() {
  constexpr std::size_t kDraws = 1'000'000;
  constexpr double kRelTol = 0.02;
  constexpr double kFractionTol = 0.002;
  Rng rng(303);
  Outcome o{true, ""};
  double worst = 0.0;
  double fraction6 = 0.0;
  for (std::size_t n = 2; n <= 6; ++n) {
    for (double ratio : {1.05, 1.5, 3.0}) {
      const auto est = oracle::mc_volume_estimate(ratio, 1.0, n, kDraws, rng);
      const double rel = std::abs(est.volume.value / phs_measure(ratio, 1.0, n) - 1.0);
      worst = std::max(worst, rel);
      if (n == 6 && ratio == 1.5) fraction6 = est.acceptance.value;
    }
  }
  const double zeta_frac = unit_ball_measure(6) / 64.0;
  o.pass = worst <= kRelTol && std::abs(fraction6 - zeta_frac) <= kFractionTol &&
           std::abs(zeta_frac - 0.0807) <= kFractionTol;
  o.detail = " worst relative volume error " + fmt(worst) + " (tol 0.02); n=6 acceptance " +
             fmt(fraction6) + " vs zeta6/2^6 = " + fmt(zeta_frac) + " (tol 0.002)";
  return o;
}

// 4. Expected heuristic and its slope at c_min.
Outcome expected_heuristic_check() {
  constexpr std::size_t kDraws = 100'000;
  constexpr double kRelTol = 0.005;
  constexpr double kSlopeTol = 1e-6;
  Rng rng(404);
  double worst = 0.0;
  for (std::size_t n : {2, 4, 6}) {
    for (double ratio : {1.01, 1.5, 3.0}) {
      const auto [a, b] = random_foci(n, 2.0, rng);
      const double c_min = distance(a, b);
      const auto phs = phs_new(a, b, ratio * c_min);
      double sum = 0.0;
      for (std::size_t k = 0; k < kDraws; ++k)
        sum += heuristic_value(phs_sample(phs, rng).coords(), a.coords(), b.coords());
      const double mean = sum / static_cast<double>(kDraws);
      worst = std::max(worst, std::abs(mean / expected_heuristic(phs.c_best(), c_min, n) - 1.0));
    }
  }
  double worst_slope = 0.0;
  for (std::size_t n = 2; n <= 8; ++n) {
    const double c_min = 1.0;
    const double h = 1e-7;
    const double slope = (expected_heuristic(c_min + h, c_min, n) - c_min) / h;
    worst_slope = std::max(worst_slope, std::abs(slope - convergence_rate(n)));
  }
  return {worst <= kRelTol && worst_slope <= kSlopeTol,
          " worst relative error of the mean " + fmt(worst) + " (tol 0.005); worst slope error " +
              fmt(worst_slope) + " (tol 1e-6)"};
}

// 5. Convergence to the straight line in an empty 2D world.
Outcome machine_zero() {
  constexpr std::size_t kSeeds = 50;
  constexpr double kFraction = 0.9;
  ExperimentSpec s;
  s.family = Family::machine_zero;
  s.dimensions = {2};
  s.runs_per_cell = kSeeds;
  s.max_iterations = 20'000;
  s.machine_zero_tolerance = 1e-6;
  std::size_t reached = 0;
  bool monotone = true;
  std::vector<double> errors;
  for (std::size_t k = 0; k < kSeeds; ++k) {
    const RunRecord r = execute_run(s, 2 * k + 1);  // odd ids are the informed runs
    if (r.planner != PlannerMode::informed_rrt_star || !r.failure.empty())
      throw std::runtime_error("unexpected machine-zero run");
    const double err = (r.final_cost.as_double() - r.optimum) / r.optimum;
    errors.push_back(err);
    reached += err <= s.machine_zero_tolerance;
    for (std::size_t e = 1; e < r.events.size(); ++e)
      monotone &= !(r.events[e - 1].cost < r.events[e].cost);
  }
  std::sort(errors.begin(), errors.end());
  const double frac = static_cast<double>(reached) / kSeeds;
  return {frac >= kFraction && monotone,
          " " + std::to_string(reached) + "/" + std::to_string(kSeeds) +
              " runs reached relative error <= 1e-6 in 20000 iterations (need >= 90%); median "
              "error " + fmt(0.5 * (errors[24] + errors[25])) + "; best cost non-increasing: " +
              (monotone ? "yes" : "no")};
}

// 6. Both modes build the same tree until the first solution.
Outcome mode_equivalence() {
  ExperimentSpec s;
  s.family = Family::random_worlds;
  s.dimensions = {2};
  s.obstacle_counts = {30};
  std::size_t identical = 0;
  std::string why;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    PlanResult res[2] = {PlanResult{Tree(StateVec{0.0}), {}, {}, Cost::infinite(), {}, {}, 0, {}, StateVec{0.0}},
                         PlanResult{Tree(StateVec{0.0}), {}, {}, Cost::infinite(), {}, {}, 0, {}, StateVec{0.0}}};
    int slot = 0;
    for (auto mode : {PlannerMode::rrt_star, PlannerMode::informed_rrt_star}) {
      RunSetup setup = setup_run(s, 0, seed, mode);
      setup.config.iterations_after_solution = 0;
      setup.config.max_iterations = 1'000'000;
      res[slot++] = plan(setup.world.problem, setup.config);
    }
    const Tree& a = res[0].tree;
    const Tree& b = res[1].tree;
    bool same = res[0].first_solution_iteration && res[0].first_solution_iteration ==
                                                       res[1].first_solution_iteration &&
                a.size() == b.size();
    for (std::size_t v = 0; same && v < a.size(); ++v) {
      const VertexId id{static_cast<std::uint32_t>(v)};
      same = a.parent(id) == b.parent(id) &&
             std::equal(a.state(id).begin(), a.state(id).end(), b.state(id).begin()) &&
             std::bit_cast<std::uint64_t>(a.cost_to_come(id)) ==
                 std::bit_cast<std::uint64_t>(b.cost_to_come(id));
    }
    identical += same;
    if (!same) why += " seed " + std::to_string(seed) + " differs;";
  }
  return {identical == 20, " " + std::to_string(identical) +
                               "/20 seeds bitwise identical up to the first solution" + why};
}

// 7. Map-width insensitivity on the single-wall world.
Outcome map_width() {
  ExperimentSpec s;
  s.family = Family::wall_width;
  s.widths = {1.0, 2.0, 4.0};
  s.target_tolerance = 0.02;
  s.runs_per_cell = 50;
  s.jobs = workers();
  const auto result = run_experiment(s);
  const auto& rows = result.summary;
  const std::string metric = "iterations_to_target";
  const double inf1 = row_of(rows, 1.0, "informed_rrt_star", metric).median;
  const double inf2 = row_of(rows, 2.0, "informed_rrt_star", metric).median;
  const double inf4 = row_of(rows, 4.0, "informed_rrt_star", metric).median;
  const double rrt1 = row_of(rows, 1.0, "rrt_star", metric).median;
  const double rrt2 = row_of(rows, 2.0, "rrt_star", metric).median;
  const double rrt4 = row_of(rows, 4.0, "rrt_star", metric).median;
  const bool flat = inf4 <= 2.0 * inf1;
  const bool gap = rrt4 >= 2.0 * inf4;
  std::size_t failures = 0;
  for (const auto& r : rows)
    if (r.metric == metric) failures += r.failures;
  return {flat && gap,
          " median iterations to 2% of optimum, informed l=1,2,4: " + fmt(inf1) + ", " + fmt(inf2) +
              ", " + fmt(inf4) + " (4x/1x = " + fmt(inf4 / inf1) + ", need <= 2: " +
              (flat ? "ok" : "NOT MET") + "); RRT* l=1,2,4: " + fmt(rrt1) + ", " + fmt(rrt2) +
              ", " + fmt(rrt4) + " (RRT*/informed at 4x = " + fmt(rrt4 / inf4) + ", need >= 2: " +
              (gap ? "ok" : "NOT MET") + "); unreached runs " + std::to_string(failures)};
}

// 8. Finding a narrow gap.
Outcome gap_finding() {
  ExperimentSpec s;
  s.family = Family::gap;
  s.gap_ratios = {0.05};
  s.gap_offset = 0.03;
  s.runs_per_cell = 50;
  s.jobs = workers();
  const auto result = run_experiment(s);
  const std::string metric = "iterations_to_target";
  const auto& inf = row_of(result.summary, 0.05, "informed_rrt_star", metric);
  const auto& rrt = row_of(result.summary, 0.05, "rrt_star", metric);
  const double ratio = inf.median / rrt.median;
  return {ratio <= 0.67, " median iterations to a through-gap solution: informed " + fmt(inf.median) +
                             ", RRT* " + fmt(rrt.median) + ", ratio " + fmt(ratio) +
                             " (need <= 0.67); unreached informed " + std::to_string(inf.failures) +
                             ", RRT* " + std::to_string(rrt.failures)};
}

// 9. Random worlds in 2 and 4 dimensions after a fixed post-solution budget.
Outcome random_worlds() {
  ExperimentSpec s;
  s.family = Family::random_worlds;
  s.dimensions = {2, 4};
  s.obstacle_counts = {30, 60};
  s.iterations_after_solution = 200'000;
  s.max_iterations = 1'000'000;
  s.runs_per_cell = 50;
  s.jobs = workers();
  const auto result = run_experiment(s);
  Outcome o{true, ""};
  for (double n : {2.0, 4.0}) {
    const auto& r = row_of(result.summary, n, "paired", "relative_cost_difference");
    const bool ok = r.median > 0.0 && r.ci_lo > 0.0;
    o.pass &= ok;
    o.detail += " n=" + fmt(n) + ": median " + fmt(r.median) + " CI [" + fmt(r.ci_lo) + ", " +
                fmt(r.ci_hi) + "] over " + std::to_string(r.n) + " pairs (" +
                std::to_string(r.failures) + " lost)" + (ok ? ";" : " NOT MET;");
  }
  return o;
}

// 10. Index, collision checker and grid oracle.
Outcome oracles() {
  Rng rng(1010);
  std::string detail;

  // Nearest-neighbour index: a random mix of inserts and queries.
  std::size_t nn_mismatch = 0, nn_ops = 0;
  for (std::size_t n : {2, 4, 8}) {
    NearestNeighborIndex index(n);
    std::vector<StateVec> pts;
    std::vector<VertexId> ids;
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const std::size_t ops = n == 2 ? 40'000 : 30'000;
    for (std::size_t k = 0; k < ops; ++k, ++nn_ops) {
      const double pick = u01(rng);
      if (pts.empty() || pick < 0.4) {
        StateVec x = random_point(n, rng, 0.0, 100.0);
        if (pick < 0.05) for (std::size_t i = 0; i < n; ++i) x[i] = std::round(x[i] / 10.0) * 10.0;
        const VertexId id{static_cast<std::uint32_t>(2 * k + 7)};
        index.insert(x, id);
        pts.push_back(x);
        ids.push_back(id);
      } else {
        const StateVec q = random_point(n, rng, -10.0, 110.0);
        if (pick < 0.7) {
          nn_mismatch += index.nearest(q.coords()) != oracle::linear_nearest(pts, ids, q.coords());
        } else {
          const double r = 30.0 * u01(rng);
          nn_mismatch += index.near(q.coords(), r) != oracle::linear_near(pts, ids, q.coords(), r);
        }
      }
    }
  }
  detail += " index: " + std::to_string(nn_mismatch) + " mismatches in " + std::to_string(nn_ops) +
            " operations;";

  // Segment checks against dense sampling. The sample count guarantees a hit
  // on every colliding segment: a point at penetration depth p has a chord of
  // length >= min(L, p) inside the box.
  std::size_t seg_mismatch = 0, seg_checked = 0, seg_skipped = 0;
  for (std::size_t n : {2, 3, 4}) {
    RandomWorldSpec spec;
    spec.n = n;
    spec.seed = 40 + n;
    spec.obstacle_count = 20;
    spec.bounds_lo = StateVec(n, 0.0);
    spec.bounds_hi = StateVec(n, 100.0);
    spec.start = StateVec(n, 1.0);
    spec.goal = StateVec(n, 99.0);
    const auto wp = random_world(spec, [](const ProblemDef&) { return true; });
    std::normal_distribution<double> step(0.0, 6.0);
    std::size_t done = 0;
    while (done < 34'000) {
      const StateVec a = random_point(n, rng, 0.0, 100.0);
      StateVec b(n);
      for (std::size_t i = 0; i < n; ++i) b[i] = std::clamp(a[i] + step(rng), 0.0, 100.0);
      ++done;
      const double clearance = oracle::segment_clearance(*wp.world, a, b);
      if (!(clearance > 1e-9)) {
        ++seg_skipped;
        continue;
      }
      const bool exact = is_segment_free(*wp.world, a, b);
      const double len = distance(a, b);
      std::size_t samples = 10'000;
      if (!exact && len > 0.0)
        samples = std::max(samples, static_cast<std::size_t>(
                                        std::ceil(2.0 * len / std::min(len, clearance))) + 2);
      samples = std::min<std::size_t>(samples, 100'000'000);
      seg_mismatch += exact != oracle::segment_free_dense(*wp.world, a, b, samples);
      ++seg_checked;
    }
  }
  detail += " segments: " + std::to_string(seg_mismatch) + " mismatches in " +
            std::to_string(seg_checked) + " (" + std::to_string(seg_skipped) +
            " with clearance <= 1e-9 skipped);";

  // Grid and analytic wall optima.
  bool grid_ok = true;
  std::string grid_detail;
  WallParams one_sided;
  one_sided.l = 200.0;
  one_sided.h = 150.0;
  one_sided.offset = 40.0;
  WallParams wide;
  wide.l = 200.0;
  WallParams thin;
  thin.w = 2.0;
  for (const auto& [p, res] : {std::pair{WallParams{}, 0.5}, std::pair{WallParams{}, 0.25},
                               std::pair{one_sided, 1.0}, std::pair{wide, 0.5},
                               std::pair{thin, 0.5}}) {
    const auto wp = wall_world(p);
    const double exact = analytic_optimum_wall(p).value();
    const auto grid = oracle::grid_dijkstra_optimum(wp.problem, res);
    const double rel = grid.cost.as_double() / exact - 1.0;
    const bool ok = rel >= -1e-12 && rel <= grid.bias_bound;
    grid_ok &= ok;
    grid_detail += " " + fmt(rel);
  }
  detail += " grid/analytic - 1 over 5 walls:" + grid_detail + " (bound " +
            fmt(oracle::metrication_bias(2)) + ")";

  return {nn_mismatch == 0 && seg_mismatch == 0 && seg_checked >= 100'000 && grid_ok, detail};
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "sampler containment and uniformity", 10.0, sampler_uniformity},
      {2, "rotation contract", 5.0, rotation_contract},
      {3, "hyperspheroid measure", 60.0, volume},
      {4, "expected heuristic and convergence rate", 20.0, expected_heuristic_check},
      {5, "machine-zero convergence", 300.0, machine_zero},
      {6, "pre-solution mode equivalence", 120.0, mode_equivalence},
      {7, "map-width insensitivity", 900.0, map_width},
      {8, "gap finding", 900.0, gap_finding},
      {9, "random worlds across dimension", 1800.0, random_worlds},
      {10, "oracles and index", 300.0, oracles},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::stoi(argv[i]));

  int failed = 0;
  for (const auto& c : criteria) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string(" error: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.limit_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "):"
              << o.detail << " [" << fmt(secs) << " s, limit " << fmt(c.limit_s) << " s"
              << (in_time ? "" : ", TOO SLOW") << "]" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
