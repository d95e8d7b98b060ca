#include "irrt/core_types.hpp"

#include <cmath>
#include <utility>

#include "irrt/collision_worlds.hpp"

namespace irrt {

namespace {

void check_finite(std::span<const double> coords) {
  for (double c : coords) {
    if (!std::isfinite(c)) throw InvalidInput("state coordinate is not finite");
  }
}

void check_same_dim(const StateVec& a, const StateVec& b) {
  if (a.dim() != b.dim()) throw InvalidInput("state dimension mismatch");
}

}  // namespace

StateVec::StateVec(std::size_t n, double fill) : coords_(n, fill) { check_finite(coords_); }

StateVec::StateVec(std::initializer_list<double> coords) : coords_(coords) {
  check_finite(coords_);
}

StateVec::StateVec(std::vector<double> coords) : coords_(std::move(coords)) {
  check_finite(coords_);
}

StateVec operator+(const StateVec& a, const StateVec& b) {
  check_same_dim(a, b);
  StateVec out(a);
  for (std::size_t i = 0; i < a.dim(); ++i) out[i] += b[i];
  return out;
}

StateVec operator-(const StateVec& a, const StateVec& b) {
  check_same_dim(a, b);
  StateVec out(a);
  for (std::size_t i = 0; i < a.dim(); ++i) out[i] -= b[i];
  return out;
}

StateVec operator*(double s, const StateVec& a) {
  StateVec out(a);
  for (std::size_t i = 0; i < a.dim(); ++i) out[i] *= s;
  return out;
}

double distance(const StateVec& a, const StateVec& b) {
  check_same_dim(a, b);
  return std::sqrt(squared_distance(a.coords(), b.coords()));
}

double norm(const StateVec& a) {
  double sum = 0.0;
  for (double c : a.coords()) sum += c * c;
  return std::sqrt(sum);
}

Cost::Cost(double value) : value_(value) {
  if (std::isnan(value) || value < 0.0) throw InvalidInput("cost must be a non-negative number");
  if (std::isinf(value)) finite_ = false;
}

double Cost::value() const {
  if (!finite_) throw InvalidInput("infinite cost has no finite value");
  return value_;
}

Cost path_cost(const PathSeq& path) {
  if (path.size() < 2) throw InvalidInput("path needs at least two states");
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) total += distance(path[k], path[k + 1]);
  return Cost(total);
}

double heuristic_value(std::span<const double> x, std::span<const double> x_start,
                       std::span<const double> x_goal) {
  return std::sqrt(squared_distance(x_start, x)) + std::sqrt(squared_distance(x, x_goal));
}

Cost heuristic_f(const StateVec& x, const StateVec& x_start, const StateVec& x_goal) {
  check_same_dim(x, x_start);
  check_same_dim(x, x_goal);
  return Cost(heuristic_value(x.coords(), x_start.coords(), x_goal.coords()));
}

ProblemDef::ProblemDef(std::shared_ptr<const World> world, StateVec x_start, StateVec x_goal,
                       double r_goal)
    : world_(std::move(world)),
      x_start_(std::move(x_start)),
      x_goal_(std::move(x_goal)),
      r_goal_(r_goal),
      c_min_(0.0) {
  if (!world_) throw InvalidInput("problem needs a world");
  if (x_start_.dim() == 0) throw InvalidInput("state dimension must be at least 1");
  if (x_start_.dim() != world_->dim() || x_goal_.dim() != world_->dim())
    throw InvalidInput("start/goal dimension does not match the world");
  if (!(r_goal_ >= 0.0) || !std::isfinite(r_goal_))
    throw InvalidInput("goal radius must be finite and non-negative");
  if (!is_state_free(*world_, x_start_)) throw InvalidInput("start state is not free");
  if (!is_state_free(*world_, x_goal_)) throw InvalidInput("goal state is not free");
  c_min_ = distance(x_start_, x_goal_);
  if (!(c_min_ > 0.0)) throw DegenerateGeometry("start and goal coincide");
}

const StateVec& ProblemDef::bounds_lo() const { return world_->bounds_lo(); }
const StateVec& ProblemDef::bounds_hi() const { return world_->bounds_hi(); }

double ProblemDef::bounds_measure() const {
  double m = 1.0;
  for (std::size_t i = 0; i < dim(); ++i) m *= bounds_hi()[i] - bounds_lo()[i];
  return m;
}

double ProblemDef::bounds_diameter() const { return distance(bounds_lo(), bounds_hi()); }

bool ProblemDef::in_goal_region(const StateVec& x) const {
  return squared_distance(x.coords(), x_goal_.coords()) <= r_goal_ * r_goal_ &&
         is_state_free(*world_, x);
}

}  // namespace irrt
