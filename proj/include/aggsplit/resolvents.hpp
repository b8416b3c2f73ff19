#pragma once

#include "aggsplit/coordinator.hpp"
#include "aggsplit/operators.hpp"

#include <vector>

namespace aggsplit {

/// Preconditioner Gamma = blkdiag(gamma (x) I_n, gamma (x) I_m, alpha I_n,
/// beta I_n, delta I_m) together with the coordinator-side parameters
///   delta_c = delta / (delta * gamma_hat + 1/N)          in (0, 1/gamma_hat)
///   beta_c  = beta / (1 + beta * (alpha + gamma_hat/N))  in (0, 1/(alpha + gamma_hat/N))
struct StepSizes {
  std::vector<double> gamma;
  double alpha = 1.0;
  double beta = 1.0;
  double delta = 1.0;
  double gamma_hat = 1.0;
  double delta_c = 0.0;
  double beta_c = 0.0;

  std::size_t agents() const { return gamma.size(); }
  CentralSteps central() const { return {alpha, delta_c, beta_c}; }

  static StepSizes from_raw(std::vector<double> gamma, double alpha, double beta, double delta);
  /// Throws InvalidStepSizes unless delta_c and beta_c lie in their open intervals.
  static StepSizes from_central(std::vector<double> gamma, double alpha, double delta_c,
                                double beta_c);
  static StepSizes uniform_central(std::size_t N, double gamma, double alpha, double delta_c,
                                   double beta_c) {
    return from_central(std::vector<double>(N, gamma), alpha, delta_c, beta_c);
  }

  static double delta_to_central(double delta, double gamma_hat, std::size_t N);
  static double delta_from_central(double delta_c, double gamma_hat, std::size_t N);
  static double beta_to_central(double beta, double alpha, double gamma_hat, std::size_t N);
  static double beta_from_central(double beta_c, double alpha, double gamma_hat, std::size_t N);

  double delta_c_upper() const { return 1.0 / gamma_hat; }
  double beta_c_upper() const {
    return 1.0 / (alpha + gamma_hat / static_cast<double>(gamma.size()));
  }
};

/// <a, b> in the Gamma^{-1} geometry.
double gamma_inv_dot(const StepSizes& steps, const Dimensions& dims, const ExtendedPoint& a,
                     const ExtendedPoint& b);
inline double gamma_inv_norm(const StepSizes& steps, const Dimensions& dims,
                             const ExtendedPoint& a) {
  return std::sqrt(gamma_inv_dot(steps, dims, a, a));
}

/// argmin_{z in Omega_i} f_i(z, sigma) + linear^T z + 1/2 (z - center)^T metric (z - center)
struct ProxProblem {
  std::size_t agent = 0;
  Vector sigma;
  Vector linear;
  Vector center;
  Matrix metric;
  double tolerance = 1e-10;
  int max_iters = 200000;
};

enum class ProxPath { Auto, Generic };

/// Solves a ProxProblem. Auto takes the exact diagonal fast path (weighted
/// box-simplex projection) when the cost is QuadraticAgg and the metric is
/// diagonal; otherwise, or with ProxPath::Generic, runs accelerated projected
/// gradient with adaptive restart until the natural residual is below
/// p.tolerance.
Vector local_prox(const AgentSpec& agent, const ProxProblem& p, ProxPath path = ProxPath::Auto);

/// |z - proj(z - grad phi(z))| for the prox objective phi.
double prox_natural_residual(const AgentSpec& agent, const ProxProblem& p, const Vector& z);

/// J_{Gamma A}: per-agent prox steps on (x, y), (sigma, mu, lambda) passed through.
ExtendedPoint resolvent_A(const GameSpec& game, const StepSizes& steps, const ExtendedPoint& w,
                          ProxPath path = ProxPath::Auto);

/// J_{Gamma B}: closed form (mu, lambda first, then x, y, sigma).
ExtendedPoint resolvent_B(const Dimensions& dims, const StepSizes& steps,
                          const ExtendedPoint& w);

template <class Resolvent>
ExtendedPoint reflect(const Resolvent& J, const ExtendedPoint& w) {
  ExtendedPoint r = J(w);
  r *= 2.0;
  r -= w;
  return r;
}

/// Residual of w+ + Gamma A(w+) containing w (natural-residual form).
double resolvent_A_inclusion_residual(const GameSpec& game, const StepSizes& steps,
                                      const ExtendedPoint& w, const ExtendedPoint& wplus);

/// Residual of w+ + Gamma B(w+) containing w, with B in the sum normalization.
double resolvent_B_inclusion_residual(const Dimensions& dims, const StepSizes& steps,
                                      const ExtendedPoint& w, const ExtendedPoint& wplus);

}  // namespace aggsplit
