#pragma once

#include <cstddef>
#include <vector>

#include "irrt/core_types.hpp"

namespace irrt {

/// Dense row-major n x n matrix, used only for the hyperspheroid rotation.
class RotationMatrix {
 public:
  explicit RotationMatrix(std::size_t n);
  static RotationMatrix identity(std::size_t n);

  std::size_t dim() const { return n_; }
  double operator()(std::size_t r, std::size_t c) const { return entries_[r * n_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return entries_[r * n_ + c]; }

  /// out = C * v
  void apply(std::span<const double> v, std::span<double> out) const;

 private:
  std::size_t n_;
  std::vector<double> entries_;
};

/// Determinant by LU with partial pivoting.
double determinant(const RotationMatrix& m);

/// Uniform draw from the volume of the unit n-ball.
///
/// Direction from n normalised standard normals, radius u^(1/n). Consumes n
/// normal draws followed by one uniform draw.
StateVec sample_unit_n_ball(Rng& rng, std::size_t n);

/// Rotation from the hyperspheroid frame to the world frame.
///
/// Solves the Wahba problem for M = a1 * e1^T without a general SVD: the
/// left singular vectors U are a1 completed to an orthonormal basis, the
/// right singular vectors V are the identity, and
/// C = U diag{1, ..., 1, det(U) det(V)} V^T.
/// Throws DegenerateGeometry if the foci coincide.
RotationMatrix rotation_to_world_frame(const StateVec& x_start, const StateVec& x_goal);

/// Informed set {x : |x - x_start| + |x - x_goal| <= c_best}.
class ProlateHyperspheroid {
 public:
  /// Builds the rotation and centre once; c_best may be updated later.
  ProlateHyperspheroid(StateVec x_start_focus, StateVec x_goal_focus, double c_best);

  /// Updates the transverse diameter. Values within 1e-9 * c_min below c_min
  /// are clamped up to c_min; smaller values throw InfeasibleCost.
  void set_c_best(double c_best);

  std::size_t dim() const { return centre_.dim(); }
  const StateVec& x_start_focus() const { return start_; }
  const StateVec& x_goal_focus() const { return goal_; }
  const StateVec& centre() const { return centre_; }
  const RotationMatrix& rotation() const { return rotation_; }
  double c_min() const { return c_min_; }
  double c_best() const { return c_best_; }
  /// [c_best / 2, sqrt(c_best^2 - c_min^2) / 2, ...]
  const std::vector<double>& radii() const { return radii_; }

  /// Lebesgue measure of the hyperspheroid.
  double measure() const;
  /// Half-widths of the axis-aligned box tightly enclosing the hyperspheroid.
  std::vector<double> world_half_extents() const;

 private:
  StateVec start_;
  StateVec goal_;
  StateVec centre_;
  RotationMatrix rotation_;
  double c_min_;
  double c_best_ = 0.0;
  std::vector<double> radii_;
};

ProlateHyperspheroid phs_new(const StateVec& x_start, const StateVec& x_goal, double c_best);

/// x = C L x_ball + x_centre
StateVec phs_sample(const ProlateHyperspheroid& phs, Rng& rng);

/// Informed Sample(x_start, x_goal, c_max) bound to one problem. The rotation
/// and centre are computed at construction.
class InformedSampler {
 public:
  static constexpr std::size_t kMaxAttempts = 1'000'000;

  explicit InformedSampler(const ProblemDef& problem);

  /// Uniform over the bounds box for infinite c_max, otherwise uniform over
  /// the intersection of the informed set with the bounds box.
  StateVec sample(const Cost& c_max, Rng& rng);

  /// Draws rejected by the most recent sample() call.
  std::size_t last_rejections() const { return last_rejections_; }

 private:
  StateVec sample_bounds(Rng& rng) const;

  const ProblemDef* problem_;
  ProlateHyperspheroid phs_;
  double bounds_measure_;
  std::size_t last_rejections_ = 0;
};

/// Volume of the unit n-ball, pi^(n/2) / Gamma(n/2 + 1).
double unit_ball_measure(std::size_t n);

/// c_best (c_best^2 - c_min^2)^((n-1)/2) zeta_n / 2^n
double phs_measure(double c_best, double c_min, std::size_t n);

/// Upper bound on the chance that one uniform draw from a set of the given
/// measure improves the solution: min(1, phs_measure / sample_measure).
double improvement_probability_bound(double c_best, double c_min, std::size_t n,
                                     double sample_measure);

/// Mean heuristic value of a uniform draw from the informed set,
/// (n c_best^2 + c_min^2) / ((n + 1) c_best).
double expected_heuristic(double c_best, double c_min, std::size_t n);

/// Obstacle-free linear convergence rate (n - 1) / (n + 1).
double convergence_rate(std::size_t n);

}  // namespace irrt
