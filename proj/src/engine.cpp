#include "aggsplit/engine.hpp"

#include "aggsplit/parallel.hpp"

#include <chrono>
#include <cmath>

namespace aggsplit {

RunConfig RunConfig::defaults(std::size_t N) {
  RunConfig c;
  c.steps = StepSizes::uniform_central(N, 1.0, 1.0, 0.5, 0.5);
  return c;
}

void RunConfig::check(std::size_t N) const {
  if (steps.agents() != N)
    fail(ErrorCode::InvalidStepSizes, "step sizes sized for " + std::to_string(steps.agents()) +
                                          " agents, game has " + std::to_string(N));
  if (!(steps.delta_c > 0.0 && steps.delta_c < steps.delta_c_upper()))
    fail(ErrorCode::InvalidStepSizes, "delta_c outside (0, 1/gamma_hat)");
  if (!(steps.beta_c > 0.0 && steps.beta_c < steps.beta_c_upper()))
    fail(ErrorCode::InvalidStepSizes, "beta_c outside (0, 1/(alpha + gamma_hat/N))");
  if (!(relaxation > 0.0 && relaxation < 2.0))
    fail(ErrorCode::InvalidArgument, "relaxation must lie in (0, 2)");
  if (max_iters == 0) fail(ErrorCode::InvalidArgument, "max_iters must be >= 1");
  if (record_every == 0) fail(ErrorCode::InvalidArgument, "record_every must be >= 1");
  if (!(stop_tol >= 0.0)) fail(ErrorCode::InvalidArgument, "stop_tol must be >= 0");
}

// ------------------------------------------------------------ agent side

AgentState agent_update(const AgentSpec& agent, const AgentState& state,
                        const BroadcastMessage& bcast, double gamma_i, std::size_t N,
                        double prox_tolerance, ProxPath path) {
  const Eigen::Index n = agent.omega.dim();
  ProxProblem p;
  p.sigma = bcast.sigma;
  p.linear = agent.A.transpose() * bcast.lambda - bcast.mu / static_cast<double>(N);
  p.center = state.x;
  p.metric = (Matrix::Identity(n, n) + agent.A.transpose() * agent.A) / gamma_i;
  p.tolerance = prox_tolerance;
  AgentState next;
  next.x = local_prox(agent, p, path);
  next.y = agent.A * next.x - agent.b;
  return next;
}

AggregateMessage aggregate(const std::vector<AgentState>& agents) {
  AggregateMessage msg;
  msg.xhat = Vector::Zero(agents.front().x.size());
  msg.yhat = Vector::Zero(agents.front().y.size());
  for (const auto& a : agents) {
    msg.xhat += a.x;
    msg.yhat += a.y;
  }
  const double inv = 1.0 / static_cast<double>(agents.size());
  msg.xhat *= inv;
  msg.yhat *= inv;
  return msg;
}

Vector default_start(const GameSpec& game) {
  const auto& dm = game.dims();
  Vector x(static_cast<Eigen::Index>(dm.n * dm.N));
  for (std::size_t i = 0; i < dm.N; ++i)
    GameSpec::block(x, i, dm.n) =
        game.agent(i).omega.project(Vector::Zero(static_cast<Eigen::Index>(dm.n)));
  return x;
}

// -------------------------------------------------------------- DrEngine

DrEngine::DrEngine(const GameSpec& game, RunConfig config, std::optional<Vector> x0,
                   std::optional<Vector> lambda0)
    : game_(&game), cfg_(std::move(config)) {
  const auto& dm = game.dims();
  cfg_.check(dm.N);
  Vector x = x0 ? *x0 : default_start(game);
  require_size(x, static_cast<Eigen::Index>(dm.n * dm.N), "x0");
  agents_.resize(dm.N);
  for (std::size_t i = 0; i < dm.N; ++i) {
    const auto& ag = game.agent(i);
    Vector xi = GameSpec::block(x, i, dm.n);
    if (!ag.omega.contains(xi, 1e-12)) {
      xi = ag.omega.project(xi);
      x0_projected_ = true;
    }
    agents_[i].x = xi;
    agents_[i].y = ag.A * xi - ag.b;
  }
  const Vector lam = lambda0 ? *lambda0 : Vector::Zero(static_cast<Eigen::Index>(dm.m));
  last_uplink_ = aggregate(agents_);
  coord_ = coordinator_init(last_uplink_, lam);
  bcast_ = broadcast_of(coord_);
}

double DrEngine::step() {
  const auto& dm = game_->dims();
  const ExtendedPoint before = point();

  std::vector<AgentState> next(agents_.size());
  parallel_for(dm.N, [&](std::size_t i) {
    next[i] = agent_update(game_->agent(i), agents_[i], bcast_, cfg_.steps.gamma[i], dm.N,
                           cfg_.prox_tolerance, cfg_.prox_path);
  });
  agents_ = std::move(next);

  last_uplink_ = aggregate(agents_);
  auto [coord, bcast] = coordinator_update(coord_, last_uplink_, cfg_.steps.central());
  coord_ = std::move(coord);
  bcast_ = std::move(bcast);
  ++iter_;

  return gamma_inv_norm(cfg_.steps, dm, point() - before);
}

ExtendedPoint DrEngine::point() const {
  const auto& dm = game_->dims();
  ExtendedPoint w = ExtendedPoint::zeros(dm);
  for (std::size_t i = 0; i < dm.N; ++i) {
    GameSpec::block(w.x, i, dm.n) = agents_[i].x;
    GameSpec::block(w.y, i, dm.m) = agents_[i].y;
  }
  w.sigma = coord_.sigma;
  w.mu = coord_.mu;
  w.lambda = coord_.lambda;
  return w;
}

Vector DrEngine::strategies() const {
  const auto& dm = game_->dims();
  Vector x(static_cast<Eigen::Index>(dm.n * dm.N));
  for (std::size_t i = 0; i < dm.N; ++i) GameSpec::block(x, i, dm.n) = agents_[i].x;
  return x;
}

// ------------------------------------------------------------ raw DR

RawDrStep raw_dr_step(const ExtendedPoint& wtilde, const GameSpec& game, const StepSizes& steps,
                      double relaxation, ProxPath path) {
  const auto& dm = game.dims();
  RawDrStep s;
  s.half = resolvent_A(game, steps, wtilde, path);
  ExtendedPoint reflected = 2.0 * s.half;
  reflected -= wtilde;
  s.full = resolvent_B(dm, steps, reflected);
  s.next = wtilde + relaxation * (s.full - s.half);
  return s;
}

ExtendedPoint raw_dr_start(const GameSpec& game, const StepSizes& steps, const Vector& x0,
                           const Vector& lambda0) {
  const auto& dm = game.dims();
  ExtendedPoint w = ExtendedPoint::zeros(dm);
  w.x = x0;
  for (std::size_t i = 0; i < dm.N; ++i) {
    const auto& ag = game.agent(i);
    GameSpec::block(w.y, i, dm.m) =
        ag.A * GameSpec::block(x0, i, dm.n) - ag.b - steps.gamma[i] * lambda0;
  }
  w.sigma = average(x0, dm.n);
  w.lambda = lambda0;
  return w;
}

// ------------------------------------------------------------ run loop

namespace {

using Clock = std::chrono::steady_clock;

struct Progress {
  double step_norm;
  ExtendedPoint point;
};

// Drives a stepper (returning Progress) under the configured stop rule.
template <class Stepper>
RunResult drive(const GameSpec& game, const RunConfig& cfg, const std::optional<Vector>& ref,
                std::string method, const Vector& x_initial, Stepper&& stepper) {
  const auto& dm = game.dims();
  if (cfg.stop_rule == StopRule::ReferenceDistance && !ref)
    fail(ErrorCode::InvalidArgument, "reference stop rule needs a reference solution");
  if (ref) require_size(*ref, static_cast<Eigen::Index>(dm.n * dm.N), "reference");

  RunResult res;
  res.method = std::move(method);
  double initial = 0.0;
  if (ref) {
    initial = (x_initial - *ref).norm();
    res.trace.initial_dist_to_ref = initial;
  }
  const double b_scale = std::max(1.0, game.b().lpNorm<Eigen::Infinity>());
  const auto t0 = Clock::now();

  for (std::size_t k = 1; k <= cfg.max_iters; ++k) {
    Progress pr = stepper();
    const Vector viol = coupling_residual(game, pr.point.x);
    // relative to |b| so the floor does not grow with N
    const double primal = viol.cwiseMax(0.0).lpNorm<Eigen::Infinity>() / b_scale;
    const double consensus = (pr.point.sigma - average(pr.point.x, dm.n)).lpNorm<Eigen::Infinity>();

    std::optional<double> dist;
    double normalized = 0.0;
    if (ref) {
      dist = (pr.point.x - *ref).norm();
      normalized = initial > 0.0 ? *dist / initial : *dist;
      if (cfg.stop_rule == StopRule::ReferenceDistance && !res.iters_to_tol &&
          normalized <= cfg.stop_tol)
        res.iters_to_tol = k;
    }

    const double metric = cfg.stop_rule == StopRule::Residual
                              ? std::max({pr.step_norm, consensus, primal})
                              : normalized;
    const bool done = metric <= cfg.stop_tol;
    const bool last = done || k == cfg.max_iters;

    if (k % cfg.record_every == 0 || last) {
      TraceRow row;
      row.iter = k;
      row.dist_to_ref = dist;
      row.kkt = kkt_residual(game, pr.point);
      row.step_norm = pr.step_norm;
      if (cfg.record_timing)
        row.wall_nanos =
            std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0).count();
      res.trace.rows.push_back(row);
    }
    if (last) {
      res.final_point = std::move(pr.point);
      res.iterations = k;
      res.converged = done;
      res.final_metric = metric;
      break;
    }
  }
  if (!res.converged) throw MaxItersExceeded(std::move(res));
  return res;
}

}  // namespace

RunResult run_dr(const GameSpec& game, const RunConfig& config,
                 const std::optional<Vector>& reference, const std::optional<Vector>& x0) {
  const auto& dm = game.dims();
  config.check(dm.N);
  if (config.relaxation == 1.0) {
    DrEngine engine(game, config, x0);
    const Vector start = engine.strategies();
    return drive(game, config, reference, "dr", start, [&] {
      const double s = engine.step();
      return Progress{s, engine.point()};
    });
  }

  // Relaxed variant: iterate the raw recursion directly.
  DrEngine init(game, config, x0);
  const Vector start = init.strategies();
  ExtendedPoint wt = raw_dr_start(game, config.steps, start, init.coordinator().lambda);
  return drive(game, config, reference, "dr", start, [&] {
    RawDrStep s = raw_dr_step(wt, game, config.steps, config.relaxation, config.prox_path);
    const double norm = gamma_inv_norm(config.steps, dm, s.next - wt);
    wt = std::move(s.next);
    ExtendedPoint p = std::move(s.full);
    p.x = std::move(s.half.x);
    p.y = std::move(s.half.y);
    return Progress{norm, std::move(p)};
  });
}

// ------------------------------------------------------------- baseline

PfbSteps pfb_steps(const GameSpec& game, double scale) {
  const auto& dm = game.dims();
  const auto m = static_cast<Eigen::Index>(dm.m);
  Matrix AAt = Matrix::Zero(m, m);
  for (const auto& ag : game.agents()) AAt += ag.A * ag.A.transpose();
  const double a_norm2 =
      Eigen::SelfAdjointEigenSolver<Matrix>(AAt, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();

  PfbSteps s;
  s.tau_lambda = a_norm2 > 0.0 ? scale / a_norm2 : scale;
  s.tau.resize(dm.N);
  for (std::size_t i = 0; i < dm.N; ++i) {
    const auto& ag = game.agent(i);
    double lip = ag.cost.curvature_bound();
    if (const auto* q = ag.cost.as_quadratic())
      lip += Eigen::JacobiSVD<Matrix>(q->Q).singularValues()(0) / static_cast<double>(dm.N);
    const double ai2 = ag.A.size() > 0 ? Eigen::JacobiSVD<Matrix>(ag.A).singularValues()(0) : 0.0;
    lip += s.tau_lambda * ai2 * ai2;
    s.tau[i] = scale / lip;
  }
  return s;
}

RunResult run_pfb(const GameSpec& game, const RunConfig& config,
                  const std::optional<Vector>& reference, const std::optional<Vector>& x0) {
  const auto& dm = game.dims();
  if (config.max_iters == 0 || config.record_every == 0)
    fail(ErrorCode::InvalidArgument, "max_iters and record_every must be >= 1");
  const PfbSteps st = pfb_steps(game, config.pfb_scale);

  Vector x = x0 ? *x0 : default_start(game);
  require_size(x, static_cast<Eigen::Index>(dm.n * dm.N), "x0");
  for (std::size_t i = 0; i < dm.N; ++i)
    GameSpec::block(x, i, dm.n) = game.agent(i).omega.project(GameSpec::block(x, i, dm.n));
  const Vector start = x;
  Vector lambda = Vector::Zero(static_cast<Eigen::Index>(dm.m));

  return drive(game, config, reference, "pfb", start, [&] {
    const Vector xhat = average(x, dm.n);
    Vector xn(x.size());
    parallel_for(dm.N, [&](std::size_t i) {
      const auto& ag = game.agent(i);
      const Vector xi = GameSpec::block(x, i, dm.n);
      const Vector g = ag.cost.grad_x(xi, xhat) + ag.A.transpose() * lambda;
      GameSpec::block(xn, i, dm.n) = ag.omega.project(xi - st.tau[i] * g);
    });
    // The coordinator only needs sum_i A_i (2 x_i+ - x_i), an aggregate.
    const Vector reflected = 2.0 * xn - x;
    const Vector ln =
        (lambda + st.tau_lambda * coupling_residual(game, reflected)).cwiseMax(0.0);
    const double norm = std::sqrt((xn - x).squaredNorm() + (ln - lambda).squaredNorm());
    x = xn;
    lambda = ln;

    ExtendedPoint p = ExtendedPoint::zeros(dm);
    p.x = x;
    for (std::size_t i = 0; i < dm.N; ++i) {
      const auto& ag = game.agent(i);
      GameSpec::block(p.y, i, dm.m) = ag.A * GameSpec::block(x, i, dm.n) - ag.b;
    }
    p.sigma = average(x, dm.n);
    p.lambda = lambda;
    return Progress{norm, std::move(p)};
  });
}

}  // namespace aggsplit
