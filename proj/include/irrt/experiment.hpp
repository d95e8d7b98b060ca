#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "irrt/collision_worlds.hpp"
#include "irrt/planner.hpp"

namespace irrt::bench {

enum class Family { wall_width, tolerance, gap, random_worlds, machine_zero };

std::string to_string(Family family);
Family family_from_string(const std::string& name);

/// One experiment: a family, its parameter lists, and the run protocol.
/// Every cell runs both planner modes on the same world and seed.
struct ExperimentSpec {
  Family family = Family::wall_width;
  std::size_t runs_per_cell = 100;
  std::uint64_t base_seed = 1;

  // Cell parameter lists. Which one is used depends on the family.
  std::vector<double> widths{1.0, 2.0, 4.0};  // map width l as a multiple of d
  std::vector<double> tolerances{0.1, 0.05, 0.02, 0.01};
  std::vector<double> gap_ratios{0.05};  // h_g / h
  std::vector<std::size_t> dimensions{2};

  // Toy problem geometry.
  double d = 100.0;
  double wall_w_min = 10.0;  // wall thickness drawn per run from [min, max]
  double wall_w_max = 10.0;
  double wall_h = 50.0;
  double target_tolerance = 0.02;  // wall_width: relative gap to the optimum
  double gap_h = 100.0;
  double gap_w = 60.0;
  double gap_offset = 0.03;  // gap centre offset as a fraction of gap_h
  double gap_map = 2.0;      // gap map width as a multiple of d
  double empty_map = 1.5;    // machine_zero map width as a multiple of d
  double machine_zero_tolerance = 1e-6;
  double r_goal_fraction = 0.1;

  // Random worlds: obstacle count per entry of `dimensions`, or one for all.
  std::vector<std::size_t> obstacle_counts{30};
  double obstacle_size_min = 5.0;
  double obstacle_size_max = 20.0;
  double world_extent = 100.0;  // side of the bounds box
  std::size_t probe_iterations = 50'000;

  // Planner budgets.
  std::size_t max_iterations = 200'000;
  std::optional<std::size_t> iterations_after_solution;
  std::optional<double> time_budget;
  double gamma_factor = 1.1;
  std::size_t checkpoint_every = 0;

  std::size_t jobs = 1;
};

/// Validates the spec; throws InvalidInput on an empty list or bad count.
void validate(const ExperimentSpec& spec);

/// Flat `key = value` text, lists comma separated, `#` comments.
ExperimentSpec parse_config(const std::string& text);
std::string format_config(const ExperimentSpec& spec);

using CellParams = std::vector<std::pair<std::string, double>>;

struct RunRecord {
  std::size_t run_id = 0;
  Family family = Family::wall_width;
  std::size_t cell_index = 0;
  CellParams cell;
  PlannerMode planner = PlannerMode::rrt_star;
  std::uint64_t seed = 0;
  std::uint64_t world_hash = 0;
  std::vector<CostEvent> events;
  std::optional<Termination> termination;  // unset when the world failed to generate
  std::string failure;
  std::size_t iterations = 0;
  std::optional<std::size_t> first_solution_iteration;
  Cost final_cost = Cost::infinite();
  /// Iteration at which the family's target was met, if it was.
  std::optional<std::size_t> target_iteration;
  std::optional<double> target_time_s;
  double optimum = 0.0;  // reference cost for relative metrics
};

struct SummaryRow {
  CellParams cell;
  std::string planner;  // planner mode, or "paired" for paired metrics
  std::string metric;
  double median = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::size_t n = 0;
  std::size_t failures = 0;
  bool low_n = false;  // the interval does not reach 95% coverage
  bool operator==(const SummaryRow&) const = default;
};

struct MedianInterval {
  double median = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t lo_rank = 0;  // 1-based order statistics
  std::size_t hi_rank = 0;
  double coverage = 0.0;
  bool low_n = false;
};

/// Median with a nonparametric 95% interval from binomial(n, 1/2) order
/// statistics. Infinite values sort last.
MedianInterval median_interval(std::vector<double> values, double confidence = 0.95);

struct ExperimentResult {
  std::vector<RunRecord> records;  // sorted by run_id
  std::vector<SummaryRow> summary;
};

/// The world and planner budgets used for one run. Exposed for replay and tests.
struct RunSetup {
  WorldProblem world;
  PlannerConfig config;
  double optimum = 0.0;
  std::optional<double> target;
};

std::vector<CellParams> cells_of(const ExperimentSpec& spec);
std::uint64_t run_seed(const ExperimentSpec& spec, std::size_t run_index);
RunSetup setup_run(const ExperimentSpec& spec, std::size_t cell_index, std::uint64_t seed,
                   PlannerMode mode);
RunRecord execute_run(const ExperimentSpec& spec, std::size_t run_id);
std::size_t run_count(const ExperimentSpec& spec);

/// Runs every (cell, seed, planner) and summarises. Writes raw.csv, runs.csv,
/// summary.csv and config.txt into out_dir when it is given.
ExperimentResult run_experiment(const ExperimentSpec& spec,
                                const std::optional<std::filesystem::path>& out_dir = {});

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records);

// CSV schemas (column order is fixed):
//   raw.csv     run_id,family,<cell params>,planner,seed,world_hash,event_iter,event_time_s,event_cost
//   runs.csv    run_id,family,<cell params>,planner,seed,world_hash,termination,iterations,
//               first_solution_iter,target_iter,final_cost,failure
//   summary.csv <cell params>,planner,metric_name,median,ci_lo,ci_hi,n,failures
std::string raw_csv(const std::vector<RunRecord>& records);
std::string runs_csv(const std::vector<RunRecord>& records);
std::string summary_csv(const std::vector<SummaryRow>& rows);

/// Plot series: one tab-separated file per metric, one row per cell, with
/// median/ci_lo/ci_hi/n columns for each planner. Supported formats: "tsv".
std::vector<std::filesystem::path> emit_plot_data(const std::vector<SummaryRow>& summary,
                                                  const std::string& format,
                                                  const std::filesystem::path& out_dir);
std::string series_tsv(const std::vector<SummaryRow>& rows, const std::string& metric);
std::vector<SummaryRow> parse_series_tsv(const std::string& text, const std::string& metric);

/// SVG drawing of a 2D problem, optionally with a planner tree, its best path
/// and the informed ellipse for the best cost.
std::string render_svg(const ProblemDef& problem, const PlanResult* result = nullptr);

/// Planner-based feasibility probe for random worlds with n >= 4.
FeasibilityProbe planner_probe(std::size_t iterations, std::uint64_t seed);

}  // namespace irrt::bench
