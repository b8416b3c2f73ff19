#pragma once

#include "aggsplit/game.hpp"

#include <cmath>
#include <cstdint>

namespace aggsplit {

/// omega = (x, y, sigma, mu, lambda), the state of the extended inclusion.
struct ExtendedPoint {
  Vector x;       ///< nN
  Vector y;       ///< mN
  Vector sigma;   ///< n
  Vector mu;      ///< n
  Vector lambda;  ///< m

  static ExtendedPoint zeros(const Dimensions& dims);
  /// Packs the blocks in (x, y, sigma, mu, lambda) order.
  Vector flatten() const;
  static ExtendedPoint unflatten(const Dimensions& dims, const Vector& v);
  void check(const Dimensions& dims) const;

  ExtendedPoint& operator+=(const ExtendedPoint& o);
  ExtendedPoint& operator-=(const ExtendedPoint& o);
  ExtendedPoint& operator*=(double s);
  double dot(const ExtendedPoint& o) const;
  double norm() const { return std::sqrt(dot(*this)); }
  double max_abs_diff(const ExtendedPoint& o) const;
};

ExtendedPoint operator+(ExtendedPoint a, const ExtendedPoint& b);
ExtendedPoint operator-(ExtendedPoint a, const ExtendedPoint& b);
ExtendedPoint operator*(double s, ExtendedPoint a);

/// col(d/dx_i f_i(x_i, M_n x)) including x_i's own weight in the average.
Vector pseudo_subdifferential(const GameSpec& game, const Vector& x);

/// col(d/dz f_i(z, s)|_{z = x_i, s = M_n x}): aggregate frozen, then substituted.
Vector aggregative_subdifferential(const GameSpec& game, const Vector& x);

/// col(d/dx_i f_i(x_i, sigma)) with sigma an independent variable.
Vector extended_subdifferential(const GameSpec& game, const Vector& x, const Vector& sigma);

/// How the y/lambda rows of the skew operator are scaled.
///  Average: y-row M_m^T lambda, lambda-row -M_m y (as in T).
///  Sum:     y-row P^T lambda,   lambda-row -P y, P = 1_N^T (x) I_m. This is
///           the normalization the closed-form resolvent of B and the
///           coordinator updates are written in.
enum class CouplingScale { Average, Sum };

/// S w = (-M_n^T mu, M_m^T lambda, mu, M_n x - sigma, -M_m y).
ExtendedPoint apply_S(const Dimensions& dims, const ExtendedPoint& w,
                      CouplingScale scale = CouplingScale::Average);

/// Single-valued parts (normal cones dropped) of A, B and T = A + B.
ExtendedPoint operator_A_part(const GameSpec& game, const ExtendedPoint& w);
ExtendedPoint operator_B_part(const Dimensions& dims, const ExtendedPoint& w,
                              CouplingScale scale = CouplingScale::Average);
ExtendedPoint operator_T_part(const GameSpec& game, const ExtendedPoint& w,
                              CouplingScale scale = CouplingScale::Average);

struct KktResidual {
  double stationarity = 0.0;
  double primal = 0.0;
  double complementarity = 0.0;
  double dual_sign = 0.0;
  double consensus = 0.0;
  double link = 0.0;

  double max() const;
  bool operator==(const KktResidual&) const = default;
};

/// Natural-residual KKT measures at w. Stationarity uses
/// g_i = grad_x f_i(x_i, M_n x) + A_i^T lambda and |x_i - proj(x_i - g_i)|.
KktResidual kkt_residual(const GameSpec& game, const ExtendedPoint& w);

struct ProbeReport {
  std::size_t samples = 0;
  double min_inner_product = 0.0;
  /// min of the inner product divided by |(dx, dsigma)|^2
  double min_normalized = 0.0;
  std::size_t negative_count = 0;

  bool monotone_on_samples() const { return negative_count == 0; }
};

/// Samples pairs (x, sigma), (x', sigma') in the bounding box of
/// prod Omega_i x conv(averages) and records
/// <F_e(x,sigma) - F_e(x',sigma'), x - x'> (the sigma component of the
/// extended map is identically zero). A negative minimum falsifies extended
/// monotonicity on this instance.
ProbeReport monotonicity_probe(const GameSpec& game, std::size_t sample_count,
                               std::uint64_t seed = 1);

}  // namespace aggsplit
