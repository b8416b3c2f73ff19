#pragma once

#include "aggsplit/common.hpp"

namespace aggsplit {

/// Weighted projection onto {x | 0 <= x <= upper, sum(x) = total}:
///   argmin sum_j w_j (x_j - v_j)^2.
///
/// The minimizer has the form x_j(theta) = clamp(v_j - theta / w_j, 0, upper_j)
/// for a scalar multiplier theta; sum(x(theta)) is nonincreasing and piecewise
/// linear in theta. We bisect on theta and, at every step, try the exact
/// solve for the active set seen at the midpoint, so the result is exact to
/// rounding once the breakpoint interval is isolated.
///
/// Throws EmptySet when sum(upper) < total or total < 0, NoConvergence if the
/// bisection cap (200 halvings) is hit.
Vector project_box_simplex(const Vector& v, const Vector& upper, double total,
                           const Vector& weights);

inline Vector project_box_simplex(const Vector& v, const Vector& upper, double total) {
  return project_box_simplex(v, upper, total, Vector::Ones(v.size()));
}

inline Vector project_nonnegative(const Vector& v) { return v.cwiseMax(0.0); }

}  // namespace aggsplit
