#include "irrt/informed_sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "irrt/collision_worlds.hpp"

namespace irrt {

RotationMatrix::RotationMatrix(std::size_t n) : n_(n), entries_(n * n, 0.0) {}

RotationMatrix RotationMatrix::identity(std::size_t n) {
  RotationMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void RotationMatrix::apply(std::span<const double> v, std::span<double> out) const {
  for (std::size_t r = 0; r < n_; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < n_; ++c) sum += entries_[r * n_ + c] * v[c];
    out[r] = sum;
  }
}

double determinant(const RotationMatrix& m) {
  const std::size_t n = m.dim();
  std::vector<double> a(n * n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) a[r * n + c] = m(r, c);
  double det = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = k;
    for (std::size_t r = k + 1; r < n; ++r) {
      if (std::abs(a[r * n + k]) > std::abs(a[pivot * n + k])) pivot = r;
    }
    if (a[pivot * n + k] == 0.0) return 0.0;
    if (pivot != k) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[k * n + c], a[pivot * n + c]);
      det = -det;
    }
    det *= a[k * n + k];
    for (std::size_t r = k + 1; r < n; ++r) {
      const double f = a[r * n + k] / a[k * n + k];
      for (std::size_t c = k; c < n; ++c) a[r * n + c] -= f * a[k * n + c];
    }
  }
  return det;
}

StateVec sample_unit_n_ball(Rng& rng, std::size_t n) {
  if (n == 0) throw InvalidInput("unit ball dimension must be at least 1");
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> x(n);
  double sq = 0.0;
  // A zero vector has no direction; redraw (probability zero in exact arithmetic).
  do {
    sq = 0.0;
    for (auto& c : x) {
      c = normal(rng);
      sq += c * c;
    }
  } while (sq == 0.0);
  const double radius = std::pow(unit(rng), 1.0 / static_cast<double>(n));
  const double scale = radius / std::sqrt(sq);
  for (auto& c : x) c *= scale;
  return StateVec(std::move(x));
}

RotationMatrix rotation_to_world_frame(const StateVec& x_start, const StateVec& x_goal) {
  if (x_start.dim() != x_goal.dim()) throw InvalidInput("focus dimension mismatch");
  const std::size_t n = x_start.dim();
  const double c_min = distance(x_start, x_goal);
  if (!(c_min > 0.0)) throw DegenerateGeometry("hyperspheroid foci coincide");

  // Columns of U, starting with the transverse axis a1.
  std::vector<std::vector<double>> basis;
  basis.reserve(n);
  std::vector<double> a1(n);
  for (std::size_t i = 0; i < n; ++i) a1[i] = (x_goal[i] - x_start[i]) / c_min;
  basis.push_back(a1);

  std::size_t most_parallel = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs(a1[i]) > std::abs(a1[most_parallel])) most_parallel = i;
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (j == most_parallel) continue;
    std::vector<double> v(n, 0.0);
    v[j] = 1.0;
    // Two passes of modified Gram-Schmidt keep the basis orthonormal to ~1e-16.
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& u : basis) {
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += u[i] * v[i];
        for (std::size_t i = 0; i < n; ++i) v[i] -= dot * u[i];
      }
    }
    double len = 0.0;
    for (double c : v) len += c * c;
    len = std::sqrt(len);
    for (auto& c : v) c /= len;
    basis.push_back(std::move(v));
  }

  RotationMatrix u(n);
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t r = 0; r < n; ++r) u(r, c) = basis[c][r];

  // V = I, so C = U diag{1, ..., 1, det(U)}.
  const double sign = determinant(u) < 0.0 ? -1.0 : 1.0;
  for (std::size_t r = 0; r < n; ++r) u(r, n - 1) *= sign;
  return u;
}

ProlateHyperspheroid::ProlateHyperspheroid(StateVec x_start_focus, StateVec x_goal_focus,
                                           double c_best)
    : start_(std::move(x_start_focus)),
      goal_(std::move(x_goal_focus)),
      centre_(0.5 * (start_ + goal_)),
      rotation_(rotation_to_world_frame(start_, goal_)),
      c_min_(distance(start_, goal_)),
      radii_(start_.dim(), 0.0) {
  set_c_best(c_best);
}

void ProlateHyperspheroid::set_c_best(double c_best) {
  if (!std::isfinite(c_best)) throw InfeasibleCost("hyperspheroid needs a finite c_best");
  if (c_best < c_min_) {
    if (c_best < c_min_ - 1e-9 * c_min_)
      throw InfeasibleCost("c_best is below the theoretical minimum");
    c_best = c_min_;
  }
  c_best_ = c_best;
  radii_[0] = c_best / 2.0;
  const double conjugate = std::sqrt(c_best * c_best - c_min_ * c_min_) / 2.0;
  for (std::size_t i = 1; i < radii_.size(); ++i) radii_[i] = conjugate;
}

double ProlateHyperspheroid::measure() const { return phs_measure(c_best_, c_min_, dim()); }

std::vector<double> ProlateHyperspheroid::world_half_extents() const {
  std::vector<double> out(dim());
  for (std::size_t r = 0; r < dim(); ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < dim(); ++c) {
      const double v = rotation_(r, c) * radii_[c];
      sum += v * v;
    }
    out[r] = std::sqrt(sum);
  }
  return out;
}

ProlateHyperspheroid phs_new(const StateVec& x_start, const StateVec& x_goal, double c_best) {
  return ProlateHyperspheroid(x_start, x_goal, c_best);
}

StateVec phs_sample(const ProlateHyperspheroid& phs, Rng& rng) {
  const std::size_t n = phs.dim();
  StateVec ball = sample_unit_n_ball(rng, n);
  std::vector<double> scaled(n);
  for (std::size_t i = 0; i < n; ++i) scaled[i] = phs.radii()[i] * ball[i];
  std::vector<double> out(n);
  phs.rotation().apply(scaled, out);
  for (std::size_t i = 0; i < n; ++i) out[i] += phs.centre()[i];
  return StateVec(std::move(out));
}

InformedSampler::InformedSampler(const ProblemDef& problem)
    : problem_(&problem),
      phs_(problem.x_start(), problem.x_goal(), problem.c_min()),
      bounds_measure_(problem.bounds_measure()) {}

StateVec InformedSampler::sample_bounds(Rng& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t n = problem_->dim();
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = problem_->bounds_lo()[i];
    const double hi = problem_->bounds_hi()[i];
    x[i] = lo + unit(rng) * (hi - lo);
  }
  return StateVec(std::move(x));
}

StateVec InformedSampler::sample(const Cost& c_max, Rng& rng) {
  last_rejections_ = 0;
  if (!c_max.is_finite()) return sample_bounds(rng);

  phs_.set_c_best(c_max.value());
  const World& world = problem_->world();
  // Both branches are uniform over the informed set intersected with the
  // bounds; the proposal with the smaller measure wastes fewer draws.
  const bool propose_from_phs = phs_.measure() <= bounds_measure_;
  const auto& start = problem_->x_start();
  const auto& goal = problem_->x_goal();
  for (std::size_t attempt = 0; attempt < kMaxAttempts; ++attempt) {
    if (propose_from_phs) {
      StateVec x = phs_sample(phs_, rng);
      if (world.in_bounds(x.coords())) return x;
    } else {
      StateVec x = sample_bounds(rng);
      if (heuristic_value(x.coords(), start.coords(), goal.coords()) <= phs_.c_best()) return x;
    }
    ++last_rejections_;
  }
  throw SamplingStalled("informed sampling exhausted its rejection budget", kMaxAttempts);
}

double unit_ball_measure(std::size_t n) {
  const double half = static_cast<double>(n) / 2.0;
  return std::pow(std::numbers::pi, half) / std::tgamma(half + 1.0);
}

double phs_measure(double c_best, double c_min, std::size_t n) {
  if (n == 0) throw InvalidInput("dimension must be at least 1");
  if (c_best < c_min) throw InfeasibleCost("c_best is below c_min");
  const double conj_sq = c_best * c_best - c_min * c_min;
  return c_best * std::pow(conj_sq, (static_cast<double>(n) - 1.0) / 2.0) * unit_ball_measure(n) /
         std::pow(2.0, static_cast<double>(n));
}

double improvement_probability_bound(double c_best, double c_min, std::size_t n,
                                     double sample_measure) {
  if (!(sample_measure > 0.0)) throw InvalidInput("sample measure must be positive");
  return std::min(1.0, phs_measure(c_best, c_min, n) / sample_measure);
}

double expected_heuristic(double c_best, double c_min, std::size_t n) {
  if (!(c_min > 0.0) || c_best < c_min || n == 0)
    throw InvalidInput("expected_heuristic needs c_best >= c_min > 0");
  const double nd = static_cast<double>(n);
  return (nd * c_best * c_best + c_min * c_min) / ((nd + 1.0) * c_best);
}

double convergence_rate(std::size_t n) {
  if (n == 0) throw InvalidInput("dimension must be at least 1");
  const double nd = static_cast<double>(n);
  return (nd - 1.0) / (nd + 1.0);
}

}  // namespace irrt
