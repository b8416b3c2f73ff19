#pragma once

#include "aggsplit/coordinator.hpp"
#include "aggsplit/resolvents.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace aggsplit {

struct AgentState {
  Vector x;  ///< n
  Vector y;  ///< m, kept equal to A_i x - b_i
};

enum class StopRule {
  /// max(step norm, consensus, primal violation / max(1, |b|_inf)) <= stop_tol
  Residual,
  /// |x^k - ref| / |x^0 - ref| <= stop_tol (needs a reference)
  ReferenceDistance,
};

struct RunConfig {
  StepSizes steps;
  /// Constant relaxation lambda_k in (0, 2). The semi-decentralized iteration is the lambda_k = 1
  /// case; other values run the relaxed raw iteration.
  double relaxation = 1.0;
  std::size_t max_iters = 100000;
  double stop_tol = 1e-8;
  StopRule stop_rule = StopRule::Residual;
  std::uint64_t rng_seed = 0;
  std::size_t record_every = 1;
  /// When false wall_nanos is written as 0 so traces are reproducible bytewise.
  bool record_timing = false;
  ProxPath prox_path = ProxPath::Auto;
  double prox_tolerance = 1e-10;
  /// Forward-backward baseline step scale (tau = scale / Lipschitz estimate).
  double pfb_scale = 0.4;

  /// gamma_i = 1, alpha = 1, delta_c = beta_c = 0.5.
  static RunConfig defaults(std::size_t N);
  void check(std::size_t N) const;
};

struct TraceRow {
  std::size_t iter = 0;
  std::optional<double> dist_to_ref;
  KktResidual kkt;
  double step_norm = 0.0;
  std::int64_t wall_nanos = 0;
};

struct RunTrace {
  std::vector<TraceRow> rows;
  /// |x^0 - ref| when a reference was supplied.
  std::optional<double> initial_dist_to_ref;
};

struct RunResult {
  std::string method;
  RunTrace trace;
  ExtendedPoint final_point;
  std::size_t iterations = 0;
  bool converged = false;
  double final_metric = 0.0;
  /// First iteration whose |x^k - ref| / |x^0 - ref| <= stop_tol (reference runs).
  std::optional<std::size_t> iters_to_tol;
};

/// Thrown when max_iters is reached; carries the partial result.
class MaxItersExceeded : public Error {
 public:
  explicit MaxItersExceeded(RunResult partial)
      : Error(ErrorCode::MaxItersExceeded,
              partial.method + ": no convergence within " + std::to_string(partial.iterations) +
                  " iterations"),
        result_(std::move(partial)) {}
  const RunResult& result() const { return result_; }

 private:
  RunResult result_;
};

/// One local strategy update:
///   x+ = argmin_{z in Omega_i} f_i(z, sigma) + (A_i^T lambda - mu/N)^T z
///        + 1/(2 gamma_i) |z - x|^2_{I + A_i^T A_i},   y+ = A_i x+ - b_i.
AgentState agent_update(const AgentSpec& agent, const AgentState& state,
                        const BroadcastMessage& bcast, double gamma_i, std::size_t N,
                        double prox_tolerance = 1e-10, ProxPath path = ProxPath::Auto);

/// Fixed-order average of agent strategies and auxiliary variables.
AggregateMessage aggregate(const std::vector<AgentState>& agents);

/// Semi-decentralized Douglas-Rachford (relaxation 1). Agents and the
/// coordinator only interact through AggregateMessage / BroadcastMessage.
class DrEngine {
 public:
  /// x0 blocks outside Omega_i are projected (x0_projected() reports it).
  /// Throws InvalidStepSizes for central parameters outside their intervals.
  DrEngine(const GameSpec& game, RunConfig config, std::optional<Vector> x0 = std::nullopt,
           std::optional<Vector> lambda0 = std::nullopt);

  /// One round; returns |omega^{k+1} - omega^k| in the Gamma^{-1} norm.
  double step();

  ExtendedPoint point() const;
  Vector strategies() const;
  const std::vector<AgentState>& agents() const { return agents_; }
  const CoordinatorState& coordinator() const { return coord_; }
  const BroadcastMessage& broadcast() const { return bcast_; }
  std::size_t iteration() const { return iter_; }
  bool x0_projected() const { return x0_projected_; }
  const AggregateMessage& last_uplink() const { return last_uplink_; }

 private:
  const GameSpec* game_;
  RunConfig cfg_;
  std::vector<AgentState> agents_;
  CoordinatorState coord_;
  BroadcastMessage bcast_;
  AggregateMessage last_uplink_;
  std::size_t iter_ = 0;
  bool x0_projected_ = false;
};

/// Default starting strategies: x_i^0 = proj_{Omega_i}(0).
Vector default_start(const GameSpec& game);

/// Runs the semi-decentralized DR until the stop rule holds. Throws
/// MaxItersExceeded with the partial trace otherwise.
RunResult run_dr(const GameSpec& game, const RunConfig& config,
                 const std::optional<Vector>& reference = std::nullopt,
                 const std::optional<Vector>& x0 = std::nullopt);

struct RawDrStep {
  ExtendedPoint half;  ///< omega^{k+1/2} = J_A(w~^k)
  ExtendedPoint full;  ///< omega^{k+1} = J_B(2 omega^{k+1/2} - w~^k)
  ExtendedPoint next;  ///< w~^{k+1}
};

/// One iteration of the relaxed DR recursion on Gamma A, Gamma B.
RawDrStep raw_dr_step(const ExtendedPoint& wtilde, const GameSpec& game, const StepSizes& steps,
                      double relaxation, ProxPath path = ProxPath::Auto);

/// Raw starting point matching the semi-decentralized iteration started from (x0, lambda0):
/// w~^0 = (x0, y0 - gamma lambda0, M_n x0, 0, lambda0).
ExtendedPoint raw_dr_start(const GameSpec& game, const StepSizes& steps, const Vector& x0,
                           const Vector& lambda0);

/// Projected pseudo-gradient forward-backward baseline with a reflected dual
/// step; same trace schema as run_dr.
RunResult run_pfb(const GameSpec& game, const RunConfig& config,
                  const std::optional<Vector>& reference = std::nullopt,
                  const std::optional<Vector>& x0 = std::nullopt);

struct PfbSteps {
  std::vector<double> tau;
  double tau_lambda = 0.0;
};

/// tau_lambda = scale / |A|^2, tau_i = scale / (L_i + tau_lambda |A_i|^2)
/// with L_i = curvature_i + |Q_i| / N.
PfbSteps pfb_steps(const GameSpec& game, double scale);

}  // namespace aggsplit
