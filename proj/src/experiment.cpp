#include "irrt/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include <boost/math/distributions/binomial.hpp>

namespace irrt::bench {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& s, const std::string& key) {
  double v = 0.0;
  if (s == "inf") return kInf;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
    throw InvalidInput("bad number '" + s + "' for " + key);
  return v;
}

std::uint64_t parse_uint(const std::string& s, const std::string& key) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
    throw InvalidInput("bad integer '" + s + "' for " + key);
  return v;
}

template <class T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_floating_point_v<T>)
      out += fmt(values[i]);
    else
      out += std::to_string(values[i]);
  }
  return out;
}

constexpr PlannerMode kModes[] = {PlannerMode::rrt_star, PlannerMode::informed_rrt_star};

}  // namespace

std::string to_string(Family family) {
  switch (family) {
    case Family::wall_width: return "wall_width";
    case Family::tolerance: return "tolerance";
    case Family::gap: return "gap";
    case Family::random_worlds: return "random_worlds";
    case Family::machine_zero: return "machine_zero";
  }
  return "?";
}

Family family_from_string(const std::string& name) {
  for (auto f : {Family::wall_width, Family::tolerance, Family::gap, Family::random_worlds,
                 Family::machine_zero})
    if (to_string(f) == name) return f;
  throw InvalidInput("unknown family '" + name +
                     "' (expected wall_width, tolerance, gap, random_worlds or machine_zero)");
}

void validate(const ExperimentSpec& s) {
  if (s.runs_per_cell == 0) throw InvalidInput("runs_per_cell must be positive");
  if (s.jobs == 0) throw InvalidInput("jobs must be positive");
  auto need = [](bool ok, const char* what) {
    if (!ok) throw InvalidInput(what);
  };
  switch (s.family) {
    case Family::wall_width: need(!s.widths.empty(), "widths is empty"); break;
    case Family::tolerance:
      need(!s.tolerances.empty(), "tolerances is empty");
      need(!s.widths.empty(), "widths is empty");
      break;
    case Family::gap: need(!s.gap_ratios.empty(), "gap_ratios is empty"); break;
    case Family::random_worlds:
      need(!s.dimensions.empty(), "dimensions is empty");
      need(!s.obstacle_counts.empty(), "obstacle_counts is empty");
      need(s.obstacle_counts.size() == 1 || s.obstacle_counts.size() == s.dimensions.size(),
           "obstacle_counts needs one entry or one per dimension");
      break;
    case Family::machine_zero: need(!s.dimensions.empty(), "dimensions is empty"); break;
  }
  for (double w : s.widths) need(w > 0.0, "widths must be positive");
  for (double t : s.tolerances) need(t >= 0.0, "tolerances must be non-negative");
  for (double g : s.gap_ratios) need(g > 0.0 && g < 1.0, "gap_ratios must lie in (0, 1)");
  for (auto n : s.dimensions) need(n >= 2, "dimensions must be >= 2");
  need(s.wall_w_min >= 0.0 && s.wall_w_max >= s.wall_w_min, "bad wall_w range");
  need(s.obstacle_size_min > 0.0 && s.obstacle_size_max >= s.obstacle_size_min,
       "bad obstacle size range");
  need(s.d > 0.0 && s.world_extent > 0.0, "d and world_extent must be positive");
  PlannerConfig pc;
  pc.gamma_factor = s.gamma_factor;
  pc.max_iterations = s.max_iterations;
  pc.iterations_after_solution = s.iterations_after_solution;
  pc.time_budget = s.time_budget;
  irrt::validate(pc);
}

namespace {

using Setter = std::function<void(ExperimentSpec&, const std::string&, const std::string&)>;

template <class T>
Setter real(T ExperimentSpec::*field) {
  return [field](ExperimentSpec& s, const std::string& k, const std::string& v) {
    s.*field = parse_double(v, k);
  };
}
template <class T>
Setter integer(T ExperimentSpec::*field) {
  return [field](ExperimentSpec& s, const std::string& k, const std::string& v) {
    s.*field = static_cast<T>(parse_uint(v, k));
  };
}
Setter real_list(std::vector<double> ExperimentSpec::*field) {
  return [field](ExperimentSpec& s, const std::string& k, const std::string& v) {
    (s.*field).clear();
    for (const auto& item : split(v, ',')) (s.*field).push_back(parse_double(item, k));
  };
}
Setter size_list(std::vector<std::size_t> ExperimentSpec::*field) {
  return [field](ExperimentSpec& s, const std::string& k, const std::string& v) {
    (s.*field).clear();
    for (const auto& item : split(v, ',')) (s.*field).push_back(parse_uint(item, k));
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"family", [](ExperimentSpec& s, const std::string&,
                    const std::string& v) { s.family = family_from_string(v); }},
      {"runs_per_cell", integer(&ExperimentSpec::runs_per_cell)},
      {"base_seed", integer(&ExperimentSpec::base_seed)},
      {"widths", real_list(&ExperimentSpec::widths)},
      {"tolerances", real_list(&ExperimentSpec::tolerances)},
      {"gap_ratios", real_list(&ExperimentSpec::gap_ratios)},
      {"dimensions", size_list(&ExperimentSpec::dimensions)},
      {"d", real(&ExperimentSpec::d)},
      {"wall_w_min", real(&ExperimentSpec::wall_w_min)},
      {"wall_w_max", real(&ExperimentSpec::wall_w_max)},
      {"wall_h", real(&ExperimentSpec::wall_h)},
      {"target_tolerance", real(&ExperimentSpec::target_tolerance)},
      {"gap_h", real(&ExperimentSpec::gap_h)},
      {"gap_w", real(&ExperimentSpec::gap_w)},
      {"gap_offset", real(&ExperimentSpec::gap_offset)},
      {"gap_map", real(&ExperimentSpec::gap_map)},
      {"empty_map", real(&ExperimentSpec::empty_map)},
      {"machine_zero_tolerance", real(&ExperimentSpec::machine_zero_tolerance)},
      {"r_goal_fraction", real(&ExperimentSpec::r_goal_fraction)},
      {"obstacle_counts", size_list(&ExperimentSpec::obstacle_counts)},
      {"obstacle_size_min", real(&ExperimentSpec::obstacle_size_min)},
      {"obstacle_size_max", real(&ExperimentSpec::obstacle_size_max)},
      {"world_extent", real(&ExperimentSpec::world_extent)},
      {"probe_iterations", integer(&ExperimentSpec::probe_iterations)},
      {"max_iterations", integer(&ExperimentSpec::max_iterations)},
      {"iterations_after_solution",
       [](ExperimentSpec& s, const std::string& k, const std::string& v) {
         if (v == "none") s.iterations_after_solution.reset();
         else s.iterations_after_solution = parse_uint(v, k);
       }},
      {"time_budget",
       [](ExperimentSpec& s, const std::string& k, const std::string& v) {
         if (v == "none") s.time_budget.reset();
         else s.time_budget = parse_double(v, k);
       }},
      {"gamma_factor", real(&ExperimentSpec::gamma_factor)},
      {"checkpoint_every", integer(&ExperimentSpec::checkpoint_every)},
      {"jobs", integer(&ExperimentSpec::jobs)},
  };
  return table;
}

}  // namespace

ExperimentSpec parse_config(const std::string& text) {
  ExperimentSpec spec;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidInput("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end())
      throw InvalidInput("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    it->second(spec, key, value);
  }
  validate(spec);
  return spec;
}

std::string format_config(const ExperimentSpec& s) {
  std::ostringstream out;
  out << "family = " << to_string(s.family) << '\n'
      << "runs_per_cell = " << s.runs_per_cell << '\n'
      << "base_seed = " << s.base_seed << '\n'
      << "widths = " << join(s.widths) << '\n'
      << "tolerances = " << join(s.tolerances) << '\n'
      << "gap_ratios = " << join(s.gap_ratios) << '\n'
      << "dimensions = " << join(s.dimensions) << '\n'
      << "d = " << fmt(s.d) << '\n'
      << "wall_w_min = " << fmt(s.wall_w_min) << '\n'
      << "wall_w_max = " << fmt(s.wall_w_max) << '\n'
      << "wall_h = " << fmt(s.wall_h) << '\n'
      << "target_tolerance = " << fmt(s.target_tolerance) << '\n'
      << "gap_h = " << fmt(s.gap_h) << '\n'
      << "gap_w = " << fmt(s.gap_w) << '\n'
      << "gap_offset = " << fmt(s.gap_offset) << '\n'
      << "gap_map = " << fmt(s.gap_map) << '\n'
      << "empty_map = " << fmt(s.empty_map) << '\n'
      << "machine_zero_tolerance = " << fmt(s.machine_zero_tolerance) << '\n'
      << "r_goal_fraction = " << fmt(s.r_goal_fraction) << '\n'
      << "obstacle_counts = " << join(s.obstacle_counts) << '\n'
      << "obstacle_size_min = " << fmt(s.obstacle_size_min) << '\n'
      << "obstacle_size_max = " << fmt(s.obstacle_size_max) << '\n'
      << "world_extent = " << fmt(s.world_extent) << '\n'
      << "probe_iterations = " << s.probe_iterations << '\n'
      << "max_iterations = " << s.max_iterations << '\n'
      << "iterations_after_solution = "
      << (s.iterations_after_solution ? std::to_string(*s.iterations_after_solution) : "none")
      << '\n'
      << "time_budget = " << (s.time_budget ? fmt(*s.time_budget) : "none") << '\n'
      << "gamma_factor = " << fmt(s.gamma_factor) << '\n'
      << "checkpoint_every = " << s.checkpoint_every << '\n'
      << "jobs = " << s.jobs << '\n';
  return out.str();
}

MedianInterval median_interval(std::vector<double> values, double confidence) {
  if (values.empty()) throw InvalidInput("median of an empty sample");
  if (!(confidence > 0.0 && confidence < 1.0)) throw InvalidInput("confidence must lie in (0, 1)");
  for (double v : values)
    if (std::isnan(v)) throw InvalidInput("NaN in sample");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  MedianInterval out;
  out.median = n % 2 ? values[n / 2] : (values[n / 2 - 1] == values[n / 2]
                                            ? values[n / 2]
                                            : 0.5 * (values[n / 2 - 1] + values[n / 2]));

  // Lower rank l is the largest with P(B <= l - 1) <= alpha/2, B ~ Bin(n, 1/2);
  // the upper rank mirrors it. Coverage is 1 - 2 P(B <= l - 1).
  const double half_alpha = 0.5 * (1.0 - confidence);
  const boost::math::binomial_distribution<double> bin(static_cast<double>(n), 0.5);
  std::size_t l = 0;
  while (l + 1 <= n && boost::math::cdf(bin, static_cast<double>(l)) <= half_alpha) ++l;
  out.lo_rank = std::max<std::size_t>(l, 1);
  out.hi_rank = n + 1 - out.lo_rank;
  out.coverage = 1.0 - 2.0 * boost::math::cdf(bin, static_cast<double>(out.lo_rank - 1));
  out.low_n = out.coverage < confidence;
  out.lo = values[out.lo_rank - 1];
  out.hi = values[out.hi_rank - 1];
  return out;
}

std::vector<CellParams> cells_of(const ExperimentSpec& s) {
  std::vector<CellParams> cells;
  switch (s.family) {
    case Family::wall_width:
      for (double w : s.widths) cells.push_back({{"l_ratio", w}});
      break;
    case Family::tolerance:
      for (double t : s.tolerances) cells.push_back({{"tolerance", t}});
      break;
    case Family::gap:
      for (double g : s.gap_ratios) cells.push_back({{"gap_ratio", g}});
      break;
    case Family::random_worlds:
    case Family::machine_zero:
      for (auto n : s.dimensions) cells.push_back({{"n", static_cast<double>(n)}});
      break;
  }
  return cells;
}

std::uint64_t run_seed(const ExperimentSpec& spec, std::size_t run_index) {
  return spec.base_seed + run_index;
}

std::size_t run_count(const ExperimentSpec& spec) {
  return cells_of(spec).size() * spec.runs_per_cell * std::size(kModes);
}

FeasibilityProbe planner_probe(std::size_t iterations, std::uint64_t seed) {
  return [iterations, seed](const ProblemDef& problem) {
    PlannerConfig config;
    config.mode = PlannerMode::rrt_star;
    config.max_iterations = iterations;
    config.iterations_after_solution = 0;
    config.seed = seed;
    return plan(problem, config).best_vertex.has_value();
  };
}

RunSetup setup_run(const ExperimentSpec& s, std::size_t cell_index, std::uint64_t seed,
                   PlannerMode mode) {
  const auto cells = cells_of(s);
  if (cell_index >= cells.size()) throw InvalidInput("cell index out of range");
  const double param = cells[cell_index].front().second;
  // World draws use their own stream so they never shift the planner's.
  Rng world_rng(seed ^ 0x9e3779b97f4a7c15ULL);

  PlannerConfig config;
  config.mode = mode;
  config.gamma_factor = s.gamma_factor;
  config.max_iterations = s.max_iterations;
  config.iterations_after_solution = s.iterations_after_solution;
  config.time_budget = s.time_budget;
  config.seed = seed;
  config.checkpoint_every = s.checkpoint_every;

  auto wall = [&](double l_ratio) {
    WallParams wp;
    wp.l = l_ratio * s.d;
    wp.d = s.d;
    wp.h = s.wall_h;
    wp.w = s.wall_w_min == s.wall_w_max
               ? s.wall_w_min
               : std::uniform_real_distribution<double>(s.wall_w_min, s.wall_w_max)(world_rng);
    wp.r_goal_fraction = s.r_goal_fraction;
    return wp;
  };

  switch (s.family) {
    case Family::wall_width:
    case Family::tolerance: {
      const auto wp = wall(s.family == Family::wall_width ? param : s.widths.front());
      const double opt = analytic_optimum_wall(wp).value();
      const double tol = s.family == Family::wall_width ? s.target_tolerance : param;
      config.target_cost = (1.0 + tol) * opt;
      return {wall_world(wp), config, opt, config.target_cost};
    }
    case Family::gap: {
      GapParams gp;
      gp.h = s.gap_h;
      gp.h_g = param * s.gap_h;
      gp.y_g = s.gap_offset * s.gap_h;
      gp.w = s.gap_w;
      gp.d = s.d;
      gp.l = s.gap_map * s.d;
      gp.r_goal_fraction = s.r_goal_fraction;
      const double flank = flanking_cost(gp).value();
      config.target_cost = std::nextafter(flank, 0.0);
      return {gap_world(gp), config, through_gap_cost(gp).value(), config.target_cost};
    }
    case Family::random_worlds: {
      const auto n = static_cast<std::size_t>(param);
      RandomWorldSpec rs;
      rs.n = n;
      rs.seed = seed;
      rs.obstacle_count = s.obstacle_counts.size() == 1 ? s.obstacle_counts[0] : s.obstacle_counts[cell_index];
      rs.size_min = s.obstacle_size_min;
      rs.size_max = s.obstacle_size_max;
      rs.bounds_lo = StateVec(n, -0.5 * s.world_extent);
      rs.bounds_hi = StateVec(n, 0.5 * s.world_extent);
      rs.start = StateVec(n, 0.0);
      rs.goal = StateVec(n, 0.0);
      rs.start[0] = -0.4 * s.world_extent;
      rs.goal[0] = 0.4 * s.world_extent;
      rs.r_goal = s.r_goal_fraction * 0.8 * s.world_extent;
      FeasibilityProbe probe;
      if (n >= 4) probe = planner_probe(s.probe_iterations, seed);
      auto wpb = random_world(rs, probe);
      const double c_min = wpb.problem.c_min();
      return {std::move(wpb), config, c_min, std::nullopt};
    }
    case Family::machine_zero: {
      WallParams wp;
      wp.n = static_cast<std::size_t>(param);
      wp.l = s.empty_map * s.d;
      wp.d = s.d;
      wp.w = 0.0;
      wp.h = 0.0;
      wp.r_goal_fraction = s.r_goal_fraction;
      auto wpb = wall_world(wp);
      const double c_min = wpb.problem.c_min();
      config.target_cost = c_min * (1.0 + s.machine_zero_tolerance);
      return {std::move(wpb), config, c_min, config.target_cost};
    }
  }
  throw InvalidInput("unknown family");
}

RunRecord execute_run(const ExperimentSpec& spec, std::size_t run_id) {
  if (run_id >= run_count(spec)) throw InvalidInput("run id out of range");
  const auto cells = cells_of(spec);
  const std::size_t per_cell = spec.runs_per_cell * std::size(kModes);
  RunRecord rec;
  rec.run_id = run_id;
  rec.family = spec.family;
  rec.cell_index = run_id / per_cell;
  rec.cell = cells[rec.cell_index];
  rec.planner = kModes[run_id % std::size(kModes)];
  rec.seed = run_seed(spec, (run_id % per_cell) / std::size(kModes));

  std::optional<RunSetup> setup;
  try {
    setup = setup_run(spec, rec.cell_index, rec.seed, rec.planner);
  } catch (const GenerationFailed& e) {
    rec.failure = std::string("generation failed: ") + e.what();
    return rec;
  }
  rec.world_hash = problem_hash(setup->world.problem);
  rec.optimum = setup->optimum;
  try {
    const PlanResult result = plan(setup->world.problem, setup->config);
    rec.events = result.timeline;
    rec.termination = result.termination;
    rec.iterations = result.iterations;
    rec.first_solution_iteration = result.first_solution_iteration;
    rec.final_cost = result.best_cost;
    if (setup->target) {
      for (const auto& ev : result.timeline) {
        if (ev.cost.is_finite() && ev.cost.value() <= *setup->target) {
          rec.target_iteration = ev.iteration;
          rec.target_time_s = ev.elapsed_s;
          break;
        }
      }
    }
  } catch (const Error& e) {
    rec.failure = std::string("planner error: ") + e.what();
  }
  return rec;
}

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records) {
  std::vector<SummaryRow> rows;
  if (records.empty()) return rows;
  std::map<std::size_t, std::vector<const RunRecord*>> by_cell;
  for (const auto& r : records) by_cell[r.cell_index].push_back(&r);

  auto add = [&rows](const CellParams& cell, const std::string& planner, const std::string& metric,
                     const std::vector<double>& values, std::size_t failures) {
    SummaryRow row{cell, planner, metric};
    row.n = values.size();
    row.failures = failures;
    if (!values.empty()) {
      const auto mi = median_interval(values);
      row.median = mi.median;
      row.ci_lo = mi.lo;
      row.ci_hi = mi.hi;
      row.low_n = mi.low_n;
    } else {
      row.median = row.ci_lo = row.ci_hi = std::numeric_limits<double>::quiet_NaN();
      row.low_n = true;
    }
    rows.push_back(std::move(row));
  };

  const Family family = records.front().family;
  const bool targeted = family != Family::random_worlds;

  for (const auto& [cell_index, recs] : by_cell) {
    const CellParams& cell = recs.front()->cell;
    for (auto mode : kModes) {
      std::vector<double> iters, times, firsts, finals, rel_err;
      std::size_t missed = 0, broken = 0, unsolved = 0;
      for (const RunRecord* r : recs) {
        if (r->planner != mode) continue;
        if (!r->failure.empty()) {
          ++broken;
          continue;
        }
        if (r->first_solution_iteration) firsts.push_back(static_cast<double>(*r->first_solution_iteration));
        else { firsts.push_back(kInf); ++unsolved; }
        finals.push_back(r->final_cost.as_double());
        rel_err.push_back((r->final_cost.as_double() - r->optimum) / r->optimum);
        if (targeted) {
          if (r->target_iteration) {
            iters.push_back(static_cast<double>(*r->target_iteration));
            times.push_back(*r->target_time_s);
          } else {
            iters.push_back(kInf);
            times.push_back(kInf);
            ++missed;
          }
        }
      }
      const std::string name = to_string(mode);
      if (targeted) {
        add(cell, name, "iterations_to_target", iters, broken + missed);
        add(cell, name, "time_to_target_s", times, broken + missed);
      }
      add(cell, name, "first_solution_iteration", firsts, broken + unsolved);
      add(cell, name, "final_cost", finals, broken + unsolved);
      if (family == Family::machine_zero)
        add(cell, name, "final_relative_error", rel_err, broken + unsolved);
    }
    if (family == Family::random_worlds) {
      // Paired by seed: both planners saw the same world and random stream.
      std::map<std::uint64_t, std::pair<const RunRecord*, const RunRecord*>> pairs;
      for (const RunRecord* r : recs)
        (r->planner == PlannerMode::rrt_star ? pairs[r->seed].first : pairs[r->seed].second) = r;
      std::vector<double> diffs;
      std::size_t lost = 0;
      for (const auto& [seed, pr] : pairs) {
        const auto* a = pr.first;
        const auto* b = pr.second;
        if (!a || !b || !a->failure.empty() || !b->failure.empty() || !a->final_cost.is_finite() ||
            !b->final_cost.is_finite()) {
          ++lost;
          continue;
        }
        const double ca = a->final_cost.value();
        diffs.push_back((ca - b->final_cost.value()) / ca);
      }
      add(cell, "paired", "relative_cost_difference", diffs, lost);
    }
  }
  return rows;
}

namespace {

std::string param_header(const CellParams& cell) {
  std::string out;
  for (const auto& [name, value] : cell) out += name + ",";
  return out;
}

std::string param_values(const CellParams& cell) {
  std::string out;
  for (const auto& [name, value] : cell) out += fmt(value) + ",";
  return out;
}

std::string run_prefix(const RunRecord& r) {
  return std::to_string(r.run_id) + "," + to_string(r.family) + "," + param_values(r.cell) +
         to_string(r.planner) + "," + std::to_string(r.seed) + "," + std::to_string(r.world_hash) +
         ",";
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string raw_csv(const std::vector<RunRecord>& records) {
  std::ostringstream out;
  out << "run_id,family," << (records.empty() ? "" : param_header(records.front().cell))
      << "planner,seed,world_hash,event_iter,event_time_s,event_cost\n";
  for (const auto& r : records) {
    if (r.events.empty()) {
      out << run_prefix(r) << ",,\n";
      continue;
    }
    for (const auto& ev : r.events)
      out << run_prefix(r) << ev.iteration << ',' << fmt(ev.elapsed_s) << ','
          << fmt(ev.cost.as_double()) << '\n';
  }
  return out.str();
}

std::string runs_csv(const std::vector<RunRecord>& records) {
  std::ostringstream out;
  out << "run_id,family," << (records.empty() ? "" : param_header(records.front().cell))
      << "planner,seed,world_hash,termination,iterations,first_solution_iter,target_iter,"
         "final_cost,failure\n";
  for (const auto& r : records) {
    out << run_prefix(r) << (r.termination ? to_string(*r.termination) : "") << ','
        << r.iterations << ','
        << (r.first_solution_iteration ? std::to_string(*r.first_solution_iteration) : "") << ','
        << (r.target_iteration ? std::to_string(*r.target_iteration) : "") << ','
        << fmt(r.final_cost.as_double()) << ',' << csv_field(r.failure) << '\n';
  }
  return out.str();
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream out;
  out << (rows.empty() ? "" : param_header(rows.front().cell))
      << "planner,metric_name,median,ci_lo,ci_hi,n,failures\n";
  for (const auto& r : rows)
    out << param_values(r.cell) << r.planner << ',' << r.metric << ',' << fmt(r.median) << ','
        << fmt(r.ci_lo) << ',' << fmt(r.ci_hi) << ',' << r.n << ',' << r.failures << '\n';
  return out.str();
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << text;
  if (!out) throw InvalidInput("write failed: " + path.string());
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec,
                                const std::optional<std::filesystem::path>& out_dir) {
  validate(spec);
  const std::size_t total = run_count(spec);
  ExperimentResult result;
  result.records.resize(total);

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t id; (id = next.fetch_add(1)) < total;) {
      try {
        result.records[id] = execute_run(spec, id);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = total;
      }
    }
  };
  const std::size_t jobs = std::min(spec.jobs, total);
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  result.summary = summarize(result.records);
  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    write_file(*out_dir / "config.txt", format_config(spec));
    write_file(*out_dir / "raw.csv", raw_csv(result.records));
    write_file(*out_dir / "runs.csv", runs_csv(result.records));
    write_file(*out_dir / "summary.csv", summary_csv(result.summary));
  }
  return result;
}

std::string series_tsv(const std::vector<SummaryRow>& rows, const std::string& metric) {
  std::vector<const SummaryRow*> sel;
  for (const auto& r : rows)
    if (r.metric == metric) sel.push_back(&r);
  if (sel.empty()) throw InvalidInput("no summary rows for metric '" + metric + "'");

  std::vector<std::string> planners;
  std::vector<CellParams> cells;
  for (const auto* r : sel) {
    if (std::find(planners.begin(), planners.end(), r->planner) == planners.end())
      planners.push_back(r->planner);
    if (std::find(cells.begin(), cells.end(), r->cell) == cells.end()) cells.push_back(r->cell);
  }

  std::ostringstream out;
  for (const auto& [name, v] : cells.front()) out << name << '\t';
  for (std::size_t i = 0; i < planners.size(); ++i) {
    const auto& p = planners[i];
    out << p << ":median\t" << p << ":ci_lo\t" << p << ":ci_hi\t" << p << ":n\t" << p
        << ":failures\t" << p << ":low_n" << (i + 1 < planners.size() ? "\t" : "\n");
  }
  for (const auto& cell : cells) {
    for (const auto& [name, v] : cell) out << fmt(v) << '\t';
    for (std::size_t i = 0; i < planners.size(); ++i) {
      const auto it = std::find_if(sel.begin(), sel.end(), [&](const SummaryRow* r) {
        return r->cell == cell && r->planner == planners[i];
      });
      if (it == sel.end()) {
        out << "nan\tnan\tnan\t0\t0\t1";
      } else {
        const auto& r = **it;
        out << fmt(r.median) << '\t' << fmt(r.ci_lo) << '\t' << fmt(r.ci_hi) << '\t' << r.n << '\t'
            << r.failures << '\t' << (r.low_n ? 1 : 0);
      }
      out << (i + 1 < planners.size() ? "\t" : "\n");
    }
  }
  return out.str();
}

std::vector<SummaryRow> parse_series_tsv(const std::string& text, const std::string& metric) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("empty series file");
  const auto header = split(line, '\t');
  std::vector<std::string> params;
  std::vector<std::string> planners;
  for (const auto& h : header) {
    const auto colon = h.find(':');
    if (colon == std::string::npos) {
      params.push_back(h);
    } else if (h.substr(colon + 1) == "median") {
      planners.push_back(h.substr(0, colon));
    }
  }
  if (header.size() != params.size() + 6 * planners.size())
    throw InvalidInput("malformed series header");

  std::vector<SummaryRow> rows;
  auto num = [](const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    return parse_double(s, "series value");
  };
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto f = split(line, '\t');
    if (f.size() != header.size()) throw InvalidInput("malformed series row");
    CellParams cell;
    for (std::size_t i = 0; i < params.size(); ++i) cell.emplace_back(params[i], num(f[i]));
    for (std::size_t p = 0; p < planners.size(); ++p) {
      const std::size_t base = params.size() + 6 * p;
      SummaryRow r{cell, planners[p], metric};
      r.median = num(f[base]);
      r.ci_lo = num(f[base + 1]);
      r.ci_hi = num(f[base + 2]);
      r.n = parse_uint(f[base + 3], "n");
      r.failures = parse_uint(f[base + 4], "failures");
      r.low_n = f[base + 5] == "1";
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

std::vector<std::filesystem::path> emit_plot_data(const std::vector<SummaryRow>& summary,
                                                  const std::string& format,
                                                  const std::filesystem::path& out_dir) {
  if (format != "tsv")
    throw InvalidInput("unsupported plot format '" + format + "'; supported formats: tsv");
  std::vector<std::string> metrics;
  for (const auto& r : summary)
    if (std::find(metrics.begin(), metrics.end(), r.metric) == metrics.end())
      metrics.push_back(r.metric);
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  for (const auto& m : metrics) {
    const auto path = out_dir / (m + ".tsv");
    write_file(path, series_tsv(summary, m));
    written.push_back(path);
  }
  return written;
}

std::string render_svg(const ProblemDef& problem, const PlanResult* result) {
  if (problem.dim() != 2) throw Unsupported("render_svg draws 2D problems only");
  const auto& lo = problem.bounds_lo();
  const auto& hi = problem.bounds_hi();
  const double width = hi[0] - lo[0];
  const double height = hi[1] - lo[1];
  const double stroke = 0.002 * std::max(width, height);
  // World y points up; SVG y points down.
  auto X = [&](double x) { return fmt(x - lo[0]); };
  auto Y = [&](double y) { return fmt(hi[1] - y); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << fmt(width) << ' '
      << fmt(height) << "\" width=\"800\" height=\"" << fmt(800.0 * height / width) << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << fmt(width) << "\" height=\"" << fmt(height)
      << "\" fill=\"white\" stroke=\"black\" stroke-width=\"" << fmt(stroke) << "\"/>\n";
  for (const auto& ob : problem.world().obstacles())
    out << "<rect class=\"obstacle\" x=\"" << X(ob.lo[0]) << "\" y=\"" << Y(ob.hi[1])
        << "\" width=\"" << fmt(ob.hi[0] - ob.lo[0]) << "\" height=\"" << fmt(ob.hi[1] - ob.lo[1])
        << "\" fill=\"#444\"/>\n";

  if (result) {
    const Tree& tree = result->tree;
    out << "<g class=\"tree\" stroke=\"#3a7\" stroke-width=\"" << fmt(stroke) << "\">\n";
    for (std::uint32_t v = 1; v < tree.size(); ++v) {
      const auto a = tree.state(VertexId{v});
      const auto b = tree.state(tree.parent(VertexId{v}));
      out << "<line x1=\"" << X(a[0]) << "\" y1=\"" << Y(a[1]) << "\" x2=\"" << X(b[0])
          << "\" y2=\"" << Y(b[1]) << "\"/>\n";
    }
    out << "</g>\n";
    if (result->best_vertex) {
      const PathSeq path = extract_path(*result);
      out << "<polyline class=\"path\" fill=\"none\" stroke=\"#c22\" stroke-width=\""
          << fmt(3 * stroke) << "\" points=\"";
      for (const auto& p : path) out << X(p[0]) << ',' << Y(p[1]) << ' ';
      out << "\"/>\n";

      const double c_best = result->best_cost.value();
      const double c_min = problem.c_min();
      const double rx = 0.5 * c_best;
      const double ry = 0.5 * std::sqrt(std::max(0.0, c_best * c_best - c_min * c_min));
      const auto& s = problem.x_start();
      const auto& g = problem.x_goal();
      const double angle =
          -std::atan2(g[1] - s[1], g[0] - s[0]) * 180.0 / std::numbers::pi;
      const double cx = 0.5 * (s[0] + g[0]);
      const double cy = 0.5 * (s[1] + g[1]);
      out << "<ellipse class=\"informed\" cx=\"" << X(cx) << "\" cy=\"" << Y(cy) << "\" rx=\""
          << fmt(rx) << "\" ry=\"" << fmt(ry) << "\" transform=\"rotate(" << fmt(angle) << ' '
          << X(cx) << ' ' << Y(cy) << ")\" fill=\"none\" stroke=\"#22c\" stroke-dasharray=\""
          << fmt(4 * stroke) << "\" stroke-width=\"" << fmt(stroke) << "\"/>\n";
    }
  }
  const auto& s = problem.x_start();
  const auto& g = problem.x_goal();
  out << "<circle class=\"start\" cx=\"" << X(s[0]) << "\" cy=\"" << Y(s[1]) << "\" r=\""
      << fmt(6 * stroke) << "\" fill=\"#0a0\"/>\n"
      << "<circle class=\"goal\" cx=\"" << X(g[0]) << "\" cy=\"" << Y(g[1]) << "\" r=\""
      << fmt(std::max(problem.r_goal(), 6 * stroke)) << "\" fill=\"none\" stroke=\"#a00\""
      << " stroke-width=\"" << fmt(stroke) << "\"/>\n"
      << "</svg>\n";
  return out.str();
}

}  // namespace irrt::bench
