#pragma once

// Brute-force validators. None of these call into the code they check: the
// hyperspheroid oracles work in the axis-aligned frame with their own
// rejection sampler, the index oracle is a linear scan, and the collision
// oracle samples points along the segment.

#include <cstddef>
#include <span>
#include <vector>

#include "irrt/collision_worlds.hpp"
#include "irrt/core_types.hpp"
#include "irrt/informed_sampling.hpp"
#include "irrt/nn_index.hpp"

namespace irrt::oracle {

struct ChiSquareReport {
  std::size_t bins = 0;
  double statistic = 0.0;
  std::size_t dof = 0;
  double threshold = 0.0;
  bool pass = false;
};

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

struct VolumeEstimate {
  Estimate volume;
  /// Fraction of box draws that landed inside the hyperspheroid.
  Estimate acceptance;
  double box_measure = 0.0;
};

/// Rejection estimate of the hyperspheroid measure from uniform draws in the
/// tight bounding hyperrectangle. Requires draws >= 10^4.
VolumeEstimate mc_volume_estimate(double c_best, double c_min, std::size_t n, std::size_t draws,
                                  Rng& rng);

/// Bins samples into `bins` concentric ellipsoidal shells of equal measure and
/// runs a chi-square goodness-of-fit test at the 0.999 quantile. Throws
/// InvalidInput for a degenerate hyperspheroid or fewer than 50 expected
/// samples per bin.
ChiSquareReport chi_square_uniformity(std::span<const StateVec> samples,
                                      const ProlateHyperspheroid& phs, std::size_t bins);

/// Upper 0.999 quantile of the chi-square distribution.
double chi_square_quantile_999(std::size_t dof);

/// Mean heuristic value over uniform draws from the informed set, drawn by
/// box rejection in the aligned frame. Requires c_best > c_min.
Estimate one_step_contraction_estimate(double c_best, double c_min, std::size_t n,
                                       std::size_t draws, Rng& rng);

struct GridOptimum {
  Cost cost = Cost::infinite();
  /// Worst-case relative excess of grid paths over straight lines.
  double bias_bound = 0.0;
};

/// Shortest 8-connected (2D) or 26-connected (3D) path over a lattice with
/// spacing `resolution`, which must divide every bounds side. Start and goal
/// connect to lattice nodes within one cell.
GridOptimum grid_dijkstra_optimum(const ProblemDef& problem, double resolution);

/// Metrication bias of the full-neighbourhood lattice in n <= 3 dimensions.
double metrication_bias(std::size_t n);

/// Linear-scan nearest: smallest squared distance, ties by smallest id.
VertexId linear_nearest(std::span<const StateVec> points, std::span<const VertexId> ids,
                        std::span<const double> x);
/// Linear-scan radius query in ascending id order.
std::vector<VertexId> linear_near(std::span<const StateVec> points,
                                  std::span<const VertexId> ids, std::span<const double> x,
                                  double r);

/// Point-sampling collision check of the segment at `samples` evenly spaced
/// parameters including both endpoints.
bool segment_free_dense(const World& world, const StateVec& a, const StateVec& b,
                        std::size_t samples = 10'000);

/// Distance from a free segment to the nearest obstacle, or the deepest
/// penetration into any obstacle for a colliding segment. Small values mark
/// segments whose classification is numerically ambiguous.
double segment_clearance(const World& world, const StateVec& a, const StateVec& b);

}  // namespace irrt::oracle
