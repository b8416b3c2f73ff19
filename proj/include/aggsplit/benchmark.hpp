#pragma once

#include "aggsplit/engine.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace aggsplit {

/// Resource-allocation game: each agent spreads a unit task over n slots,
///   Omega_i = {0 <= x_i <= u_i, 1^T x_i = 1},  sum_i w_i x_i <= b,
///   f_i(x_i, s) = 1/2 a_i |x_i - target_i|^2 + (Q_i s)^T x_i.
struct BenchmarkParams {
  std::size_t N = 1000;
  std::size_t n = 10;
  double a_lo = 1.0, a_hi = 2.0;
  double w_lo = 1.0, w_hi = 2.0;
  double q_lo = 1.0, q_hi = 2.0;
  double qbar_lo = 0.0, qbar_hi = 0.1;
  double upper_total = 2.0;  ///< 1^T u_i
  double task_total = 1.0;   ///< 1^T x_i
  double b_lo = 0.5;         ///< b(h) >= b_lo (A u)(h)
  double b_hi = 2.0 / 3.0;   ///< b(h) <= b_hi (A u)(h)
  std::uint64_t seed = 1;

  /// N = 1000, n = 10 and the ranges above.
  static BenchmarkParams standard();
  void check() const;
};

/// Draws a game; agent i uses RNG stream (seed, i), the capacity vector b a
/// separate stream, so changing N does not reshuffle earlier agents.
/// Throws GenerationFailed if a box bound cannot be drawn in 100 attempts.
GameSpec generate_benchmark(const BenchmarkParams& params);

/// Reads per-agent weights w_i back from A_i = w_i I.
std::vector<double> benchmark_weights(const GameSpec& game);

struct GroundTruthOptions {
  double tol = 1e-9;
  std::size_t max_iters = 1000000;
  RunConfig config;  ///< step sizes; stop rule and tolerance are overridden
  bool cross_check = true;
  double cross_check_tol_factor = 10.0;
};

struct GroundTruth {
  Vector x;
  ExtendedPoint point;
  KktResidual kkt;
  std::size_t iterations = 0;
  std::optional<double> pfb_agreement;
};

/// High-accuracy reference: DR run at stop_tol = tol * 1e-3, certified by
/// kkt_residual <= tol, optionally cross-checked against the baseline.
/// Throws NotCertified when either check fails.
GroundTruth ground_truth(const GameSpec& game, const GroundTruthOptions& options);

/// Euclidean projection onto the coupled set {x_i in Omega_i, A x <= b}, by
/// accelerated projected ascent on the multiplier of A x <= b.
Vector project_coupled_set(const GameSpec& game, const Vector& v, double tolerance = 1e-14);

/// Natural residual of GVI(X, F_a): |x - proj_X(x - F_a(x))|. With a multiplier
/// it is instead the KKT stationarity |x - proj_Omega(x - F_a(x) - A^T lambda)|.
double gae_vi_residual(const GameSpec& game, const Vector& x,
                       const std::optional<Vector>& lambda = std::nullopt);

struct EpsilonGap {
  std::vector<double> per_agent;
  double max = 0.0;
};

/// eps_i = f_i(x_i, M_n x) - min_{z in X_i(x_-i)} f_i(z, (z + sum_{j != i} x_j)/N).
EpsilonGap epsilon_nash_gap(const GameSpec& game, const Vector& x, double tolerance = 1e-10);

struct MethodOutcome {
  std::string method;
  /// |x^k - ref| / |x^0 - ref| for k = 0..iterations
  std::vector<double> normalized_curve;
  std::optional<std::size_t> iters_to_tol;
  std::size_t iterations = 0;
  double final_kkt = 0.0;
  double wall_ms = 0.0;
};

struct SeedOutcome {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double reference_kkt = 0.0;
  std::vector<MethodOutcome> methods;
};

struct ComparisonOptions {
  std::vector<std::string> methods{"dr", "pfb"};
  double tol = 1e-6;  ///< normalized-error target
  std::size_t max_iters = 20000;
  double reference_tol = 1e-9;
  double gamma = 1.0, alpha = 1.0, delta_c = 0.5, beta_c = 0.5;
  bool record_timing = false;
};

struct ExperimentReport {
  BenchmarkParams params;
  ComparisonOptions options;
  std::vector<SeedOutcome> seeds;
  /// Mean normalized error per method; finished runs hold their last value.
  std::map<std::string, std::vector<double>> mean_curve;
  /// Fraction of successful seeds where DR reached tol in strictly fewer
  /// iterations than the baseline (a baseline miss counts as max_iters + 1).
  double dr_win_fraction = 0.0;
  /// Median baseline iterations-to-tol (max_iters + 1 for misses).
  double pfb_median_iters = 0.0;
  /// mean over seeds of baseline iters / DR iters
  double speed_ratio = 0.0;
  std::size_t successful_seeds() const;
};

/// Seeds params.seed, params.seed + 1, ...; per-seed failures are recorded.
/// Throws GenerationFailed if no seed succeeds.
ExperimentReport run_comparison(const BenchmarkParams& params, std::size_t num_seeds,
                                const ComparisonOptions& options);

}  // namespace aggsplit
