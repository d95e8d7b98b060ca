#pragma once

#include <cstddef>
#include <initializer_list>
#include <limits>
#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace irrt {

/// Random source used everywhere a draw is needed. One instance per run.
using Rng = std::mt19937_64;

// Error taxonomy. Every failure surfaces as one of these.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidInput : Error {
  using Error::Error;
};
struct DegenerateGeometry : Error {
  using Error::Error;
};
struct InfeasibleCost : Error {
  using Error::Error;
};
struct EmptyIndex : Error {
  using Error::Error;
};
struct NoSolution : Error {
  using Error::Error;
};
struct GenerationFailed : Error {
  using Error::Error;
};
struct Unsupported : Error {
  using Error::Error;
};
struct SamplingStalled : Error {
  SamplingStalled(const std::string& what, std::size_t attempts)
      : Error(what), attempts(attempts) {}
  std::size_t attempts;
};

/// A point in R^n. All coordinates are finite.
class StateVec {
 public:
  StateVec() = default;
  explicit StateVec(std::size_t n, double fill = 0.0);
  StateVec(std::initializer_list<double> coords);
  explicit StateVec(std::vector<double> coords);

  std::size_t dim() const { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  double& operator[](std::size_t i) { return coords_[i]; }
  std::span<const double> coords() const { return coords_; }
  const double* data() const { return coords_.data(); }

  bool operator==(const StateVec& other) const = default;

 private:
  std::vector<double> coords_;
};

StateVec operator+(const StateVec& a, const StateVec& b);
StateVec operator-(const StateVec& a, const StateVec& b);
StateVec operator*(double s, const StateVec& a);

/// Squared Euclidean distance, summed in coordinate order. Callers that need
/// bit-identical comparisons (nearest-neighbour oracles) rely on this order.
inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}
double distance(const StateVec& a, const StateVec& b);
double norm(const StateVec& a);

/// Non-negative path cost with an explicit infinity.
class Cost {
 public:
  constexpr Cost() = default;
  explicit Cost(double value);

  static constexpr Cost infinite() { return Cost(Tag{}); }

  bool is_finite() const { return finite_; }
  /// Throws if infinite.
  double value() const;

  friend bool operator==(const Cost& a, const Cost& b) {
    return a.finite_ == b.finite_ && (!a.finite_ || a.value_ == b.value_);
  }
  friend bool operator<(const Cost& a, const Cost& b) {
    if (!a.finite_) return false;
    if (!b.finite_) return true;
    return a.value_ < b.value_;
  }
  friend bool operator>(const Cost& a, const Cost& b) { return b < a; }
  friend bool operator<=(const Cost& a, const Cost& b) { return !(b < a); }
  friend bool operator>=(const Cost& a, const Cost& b) { return !(a < b); }

  /// Finite value or +inf, for arithmetic and output.
  double as_double() const {
    return finite_ ? value_ : std::numeric_limits<double>::infinity();
  }

 private:
  struct Tag {};
  constexpr explicit Cost(Tag) : value_(0.0), finite_(false) {}

  double value_ = 0.0;
  bool finite_ = true;
};

using PathSeq = std::vector<StateVec>;

Cost path_cost(const PathSeq& path);

/// Admissible path-length estimate through x: |x_start - x| + |x - x_goal|.
Cost heuristic_f(const StateVec& x, const StateVec& x_start, const StateVec& x_goal);

/// Same as heuristic_f without the dimension checks or Cost wrapping.
double heuristic_value(std::span<const double> x, std::span<const double> x_start,
                       std::span<const double> x_goal);

class World;

/// A validated planning query. Immutable once built.
class ProblemDef {
 public:
  /// Validates the bounds, the start/goal states against the world, and
  /// that the start and goal are distinct.
  ProblemDef(std::shared_ptr<const World> world, StateVec x_start, StateVec x_goal,
             double r_goal);

  std::size_t dim() const { return x_start_.dim(); }
  const World& world() const { return *world_; }
  std::shared_ptr<const World> world_ptr() const { return world_; }
  const StateVec& bounds_lo() const;
  const StateVec& bounds_hi() const;
  const StateVec& x_start() const { return x_start_; }
  const StateVec& x_goal() const { return x_goal_; }
  double r_goal() const { return r_goal_; }
  double c_min() const { return c_min_; }

  /// Lebesgue measure of the bounds box.
  double bounds_measure() const;
  double bounds_diameter() const;

  bool in_goal_region(const StateVec& x) const;

 private:
  std::shared_ptr<const World> world_;
  StateVec x_start_;
  StateVec x_goal_;
  double r_goal_;
  double c_min_;
};

}  // namespace irrt
