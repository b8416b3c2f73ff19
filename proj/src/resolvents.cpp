#include "aggsplit/resolvents.hpp"

#include "aggsplit/parallel.hpp"
#include "aggsplit/projection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace aggsplit {

// -------------------------------------------------------------- StepSizes

namespace {

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void check_gamma(const std::vector<double>& gamma, double alpha) {
  if (gamma.empty()) fail(ErrorCode::InvalidStepSizes, "step sizes: gamma is empty");
  for (double g : gamma)
    if (!(g > 0.0) || !std::isfinite(g))
      fail(ErrorCode::InvalidStepSizes, "step sizes: every gamma_i must be > 0");
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    fail(ErrorCode::InvalidStepSizes, "step sizes: alpha must be > 0");
}

}  // namespace

double StepSizes::delta_to_central(double delta, double gamma_hat, std::size_t N) {
  return delta / (delta * gamma_hat + 1.0 / static_cast<double>(N));
}

double StepSizes::delta_from_central(double delta_c, double gamma_hat, std::size_t N) {
  return delta_c / (static_cast<double>(N) * (1.0 - delta_c * gamma_hat));
}

double StepSizes::beta_to_central(double beta, double alpha, double gamma_hat, std::size_t N) {
  return beta / (1.0 + beta * (alpha + gamma_hat / static_cast<double>(N)));
}

double StepSizes::beta_from_central(double beta_c, double alpha, double gamma_hat, std::size_t N) {
  return beta_c / (1.0 - beta_c * (alpha + gamma_hat / static_cast<double>(N)));
}

StepSizes StepSizes::from_raw(std::vector<double> gamma, double alpha, double beta, double delta) {
  check_gamma(gamma, alpha);
  if (!(beta > 0.0) || !(delta > 0.0) || !std::isfinite(beta) || !std::isfinite(delta))
    fail(ErrorCode::InvalidStepSizes, "step sizes: beta and delta must be > 0");
  StepSizes s;
  s.gamma = std::move(gamma);
  s.alpha = alpha;
  s.beta = beta;
  s.delta = delta;
  s.gamma_hat = mean(s.gamma);
  const std::size_t N = s.gamma.size();
  s.delta_c = delta_to_central(delta, s.gamma_hat, N);
  s.beta_c = beta_to_central(beta, alpha, s.gamma_hat, N);
  return s;
}

StepSizes StepSizes::from_central(std::vector<double> gamma, double alpha, double delta_c,
                                  double beta_c) {
  check_gamma(gamma, alpha);
  StepSizes s;
  s.gamma = std::move(gamma);
  s.alpha = alpha;
  s.gamma_hat = mean(s.gamma);
  const std::size_t N = s.gamma.size();
  if (!(delta_c > 0.0 && delta_c < s.delta_c_upper())) {
    std::ostringstream os;
    os << "delta_c = " << delta_c << " outside (0, " << s.delta_c_upper() << ")";
    fail(ErrorCode::InvalidStepSizes, os.str());
  }
  if (!(beta_c > 0.0 && beta_c < s.beta_c_upper())) {
    std::ostringstream os;
    os << "beta_c = " << beta_c << " outside (0, " << s.beta_c_upper() << ")";
    fail(ErrorCode::InvalidStepSizes, os.str());
  }
  s.delta_c = delta_c;
  s.beta_c = beta_c;
  s.delta = delta_from_central(delta_c, s.gamma_hat, N);
  s.beta = beta_from_central(beta_c, alpha, s.gamma_hat, N);
  return s;
}

double gamma_inv_dot(const StepSizes& steps, const Dimensions& dm, const ExtendedPoint& a,
                     const ExtendedPoint& b) {
  if (steps.agents() != dm.N) fail(ErrorCode::DimensionMismatch, "gamma length differs from N");
  double s = 0.0;
  for (std::size_t i = 0; i < dm.N; ++i) {
    const double w = 1.0 / steps.gamma[i];
    s += w * GameSpec::block(a.x, i, dm.n).dot(GameSpec::block(b.x, i, dm.n));
    s += w * GameSpec::block(a.y, i, dm.m).dot(GameSpec::block(b.y, i, dm.m));
  }
  s += a.sigma.dot(b.sigma) / steps.alpha;
  s += a.mu.dot(b.mu) / steps.beta;
  s += a.lambda.dot(b.lambda) / steps.delta;
  return s;
}

// ------------------------------------------------------------- local prox

namespace {

bool is_diagonal(const Matrix& M) {
  for (Eigen::Index c = 0; c < M.cols(); ++c)
    for (Eigen::Index r = 0; r < M.rows(); ++r)
      if (r != c && M(r, c) != 0.0) return false;
  return true;
}

Vector prox_gradient(const AgentSpec& agent, const ProxProblem& p, const Vector& z) {
  return agent.cost.grad_x(z, p.sigma) + p.linear + p.metric * (z - p.center);
}

void check_problem(const AgentSpec& agent, const ProxProblem& p) {
  const Eigen::Index n = agent.omega.dim();
  require_size(p.sigma, n, "prox sigma");
  require_size(p.linear, n, "prox linear term");
  require_size(p.center, n, "prox center");
  if (p.metric.rows() != n || p.metric.cols() != n)
    fail(ErrorCode::DimensionMismatch, "prox metric must be n x n");
}

Vector prox_fast(const QuadraticAgg& q, const AgentSpec& agent, const ProxProblem& p) {
  // gradient: (a I + D) z - (a target - Q sigma - linear + D center), D diagonal
  const Vector h = p.metric.diagonal().array() + q.a;
  const Vector rhs =
      q.a * q.target - q.Q * p.sigma - p.linear + p.metric.diagonal().cwiseProduct(p.center);
  return agent.omega.project(rhs.cwiseQuotient(h), h);
}

Vector prox_generic(const AgentSpec& agent, const ProxProblem& p) {
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (p.metric + p.metric.transpose()),
                                                  Eigen::EigenvaluesOnly);
  const double lip = eig.eigenvalues().maxCoeff() + agent.cost.curvature_bound();
  const double step = 1.0 / lip;

  Vector z = agent.omega.project(p.center);
  Vector yv = z;
  double t = 1.0;
  for (int it = 0; it < p.max_iters; ++it) {
    const Vector z_next = agent.omega.project(yv - step * prox_gradient(agent, p, yv));
    if (prox_natural_residual(agent, p, z_next) <= p.tolerance) return z_next;
    // Gradient-based adaptive restart.
    if ((yv - z_next).dot(z_next - z) > 0.0) {
      t = 1.0;
      yv = z_next;
      z = z_next;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    yv = z_next + ((t - 1.0) / t_next) * (z_next - z);
    z = z_next;
    t = t_next;
  }
  fail(ErrorCode::NoConvergence,
       "local_prox: no convergence in " + std::to_string(p.max_iters) + " iterations");
}

}  // namespace

double prox_natural_residual(const AgentSpec& agent, const ProxProblem& p, const Vector& z) {
  return (z - agent.omega.project(z - prox_gradient(agent, p, z))).norm();
}

Vector local_prox(const AgentSpec& agent, const ProxProblem& p, ProxPath path) {
  check_problem(agent, p);
  if (path == ProxPath::Auto && is_diagonal(p.metric)) {
    if (const auto* q = agent.cost.as_quadratic()) return prox_fast(*q, agent, p);
  }
  return prox_generic(agent, p);
}

// ------------------------------------------------------------- resolvents

ExtendedPoint resolvent_A(const GameSpec& game, const StepSizes& steps, const ExtendedPoint& w,
                          ProxPath path) {
  const auto& dm = game.dims();
  w.check(dm);
  if (steps.agents() != dm.N) fail(ErrorCode::DimensionMismatch, "gamma length differs from N");
  ExtendedPoint out = w;
  const auto n = static_cast<Eigen::Index>(dm.n);
  parallel_for(dm.N, [&](std::size_t i) {
    const auto& ag = game.agent(i);
    const double g = steps.gamma[i];
    const Vector xi = GameSpec::block(w.x, i, dm.n);
    const Vector yi = GameSpec::block(w.y, i, dm.m);
    // 1/(2g)|v - x_i|^2 + 1/(2g)|A_i v - b_i - y_i|^2
    //   = 1/2 (v - x_i)^T (I + A_i^T A_i)/g (v - x_i) + [A_i^T (A_i x_i - b_i - y_i)/g]^T v + c
    ProxProblem p;
    p.agent = i;
    p.sigma = w.sigma;
    p.center = xi;
    p.metric = (Matrix::Identity(n, n) + ag.A.transpose() * ag.A) / g;
    p.linear = ag.A.transpose() * (ag.A * xi - ag.b - yi) / g;
    const Vector xp = local_prox(ag, p, path);
    GameSpec::block(out.x, i, dm.n) = xp;
    GameSpec::block(out.y, i, dm.m) = ag.A * xp - ag.b;
  });
  return out;
}

ExtendedPoint resolvent_B(const Dimensions& dm, const StepSizes& steps, const ExtendedPoint& w) {
  w.check(dm);
  if (steps.agents() != dm.N) fail(ErrorCode::DimensionMismatch, "gamma length differs from N");
  const double N = static_cast<double>(dm.N);
  const double a = steps.alpha, b = steps.beta, d = steps.delta, gh = steps.gamma_hat;

  ExtendedPoint out = w;
  out.mu = (N / ((1.0 + b * a) * N + b * gh)) * (w.mu + b * (w.sigma - average(w.x, dm.n)));

  // P = 1_N^T (x) I_m. The lambda system matrix I + delta P diag(gamma) P^T
  // equals (1 + delta N gamma_hat) I because P P^T = N I and P gamma P^T =
  // N gamma_hat I, so the inverse is a scalar and the orthant projection is
  // applied after the rescaling.
  Vector py = Vector::Zero(static_cast<Eigen::Index>(dm.m));
  for (std::size_t i = 0; i < dm.N; ++i) py += GameSpec::block(w.y, i, dm.m);
  out.lambda = project_nonnegative((w.lambda + d * py) / (1.0 + d * N * gh));

  for (std::size_t i = 0; i < dm.N; ++i) {
    GameSpec::block(out.x, i, dm.n) += (steps.gamma[i] / N) * out.mu;
    GameSpec::block(out.y, i, dm.m) -= steps.gamma[i] * out.lambda;
  }
  out.sigma = w.sigma - a * out.mu;
  return out;
}

// ---------------------------------------------------- inclusion residuals

double resolvent_A_inclusion_residual(const GameSpec& game, const StepSizes& steps,
                                      const ExtendedPoint& w, const ExtendedPoint& wplus) {
  const auto& dm = game.dims();
  double r = std::max({(wplus.sigma - w.sigma).lpNorm<Eigen::Infinity>(),
                       (wplus.mu - w.mu).lpNorm<Eigen::Infinity>(),
                       (wplus.lambda - w.lambda).lpNorm<Eigen::Infinity>()});
  for (std::size_t i = 0; i < dm.N; ++i) {
    const auto& ag = game.agent(i);
    const double g = steps.gamma[i];
    const Vector xi = GameSpec::block(w.x, i, dm.n);
    const Vector yi = GameSpec::block(w.y, i, dm.m);
    const Vector xp = GameSpec::block(wplus.x, i, dm.n);
    const Vector yp = GameSpec::block(wplus.y, i, dm.m);
    // (x, y) - (x+, y+) in g (grad f(x+, sigma), 0) + g N_C(x+, y+) with
    // N_C(x, y) = N_Omega(x) x {0} + {(-A^T nu, nu)}: eliminate nu = (y - y+)/g.
    const Vector normal = xi - xp - g * ag.cost.grad_x(xp, w.sigma) + ag.A.transpose() * (yi - yp);
    r = std::max(r, (xp - ag.omega.project(xp + normal)).norm());
    r = std::max(r, (yp - (ag.A * xp - ag.b)).lpNorm<Eigen::Infinity>());
  }
  return r;
}

double resolvent_B_inclusion_residual(const Dimensions& dm, const StepSizes& steps,
                                      const ExtendedPoint& w, const ExtendedPoint& wp) {
  const double N = static_cast<double>(dm.N);
  double r = 0.0;
  Vector pyp = Vector::Zero(static_cast<Eigen::Index>(dm.m));
  for (std::size_t i = 0; i < dm.N; ++i) {
    const double g = steps.gamma[i];
    const Vector rx = GameSpec::block(wp.x, i, dm.n) - (g / N) * wp.mu - GameSpec::block(w.x, i, dm.n);
    const Vector ry = GameSpec::block(wp.y, i, dm.m) + g * wp.lambda - GameSpec::block(w.y, i, dm.m);
    r = std::max({r, rx.lpNorm<Eigen::Infinity>(), ry.lpNorm<Eigen::Infinity>()});
    pyp += GameSpec::block(wp.y, i, dm.m);
  }
  r = std::max(r, (wp.sigma + steps.alpha * wp.mu - w.sigma).lpNorm<Eigen::Infinity>());
  r = std::max(r, (wp.mu + steps.beta * (average(wp.x, dm.n) - wp.sigma) - w.mu)
                      .lpNorm<Eigen::Infinity>());
  // lambda - lambda+ + delta P y+ in delta N_{>=0}(lambda+)
  r = std::max(r, (wp.lambda - project_nonnegative(w.lambda + steps.delta * pyp))
                      .lpNorm<Eigen::Infinity>());
  return r;
}

}  // namespace aggsplit
