#include "aggsplit/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace aggsplit {

namespace {

constexpr int kMaxBisections = 200;
constexpr double kSumTolerance = 1e-12;

double clamp_entry(double v, double theta, double w, double upper) {
  return std::clamp(v - theta / w, 0.0, upper);
}

double total_at(const Vector& v, const Vector& upper, const Vector& w, double theta) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < v.size(); ++j) s += clamp_entry(v[j], theta, w[j], upper[j]);
  return s;
}

// Solve sum(x(theta)) = total assuming the clamp pattern observed at `probe`
// stays fixed. Returns NaN when every coordinate is clamped.
double solve_on_pattern(const Vector& v, const Vector& upper, const Vector& w, double total,
                        double probe) {
  double fixed = 0.0;
  double free_v = 0.0;
  double free_inv_w = 0.0;
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    const double raw = v[j] - probe / w[j];
    if (raw <= 0.0) continue;
    if (raw >= upper[j]) {
      fixed += upper[j];
      continue;
    }
    free_v += v[j];
    free_inv_w += 1.0 / w[j];
  }
  if (free_inv_w == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (free_v - (total - fixed)) / free_inv_w;
}

}  // namespace

Vector project_box_simplex(const Vector& v, const Vector& upper, double total,
                           const Vector& weights) {
  const Eigen::Index n = v.size();
  require_size(upper, n, "project_box_simplex upper");
  require_size(weights, n, "project_box_simplex weights");
  if (!(total >= 0.0) || upper.minCoeff() < 0.0 || upper.sum() < total)
    fail(ErrorCode::EmptySet, "project_box_simplex: sum(upper) < total or negative bounds");
  if (weights.minCoeff() <= 0.0)
    fail(ErrorCode::InvalidArgument, "project_box_simplex: weights must be positive");

  // At theta_lo every coordinate sits at its upper bound, at theta_hi at zero.
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < n; ++j) {
    lo = std::min(lo, weights[j] * (v[j] - upper[j]));
    hi = std::max(hi, weights[j] * v[j]);
  }
  // Bracket expansion guards against rounding in the bound formulas.
  double width = std::max(1.0, hi - lo);
  while (total_at(v, upper, weights, lo) < total) lo -= (width *= 2.0);
  while (total_at(v, upper, weights, hi) > total) hi += (width *= 2.0);

  auto make = [&](double theta) {
    Vector x(n);
    for (Eigen::Index j = 0; j < n; ++j) x[j] = clamp_entry(v[j], theta, weights[j], upper[j]);
    return x;
  };

  for (int it = 0; it < kMaxBisections; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double candidate = solve_on_pattern(v, upper, weights, total, mid);
    if (std::isfinite(candidate) && candidate >= lo && candidate <= hi) {
      const double s = total_at(v, upper, weights, candidate);
      if (std::abs(s - total) <= kSumTolerance * std::max(1.0, total)) return make(candidate);
    }
    const double s_mid = total_at(v, upper, weights, mid);
    if (std::abs(s_mid - total) <= kSumTolerance * std::max(1.0, total)) return make(mid);
    if (s_mid > total)
      lo = mid;
    else
      hi = mid;
    if (!(hi > lo)) return make(mid);
  }
  fail(ErrorCode::NoConvergence, "project_box_simplex: bisection cap reached");
}

}  // namespace aggsplit
