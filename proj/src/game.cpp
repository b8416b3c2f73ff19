#include "aggsplit/game.hpp"

#include "aggsplit/projection.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace aggsplit {

void Dimensions::check() const {
  if (N < 1 || n < 1 || m < 1)
    fail(ErrorCode::DimensionMismatch, "dimensions must satisfy N, n, m >= 1");
}

// ---------------------------------------------------------------- LocalSet

LocalSet LocalSet::box_simplex(Vector upper, double total) {
  if (upper.size() == 0) fail(ErrorCode::DimensionMismatch, "box-simplex: empty upper bound");
  if (!(total >= 0.0) || upper.minCoeff() < 0.0 || upper.sum() < total) {
    std::ostringstream os;
    os << "box-simplex is empty: sum(upper) = " << upper.sum() << " < total = " << total;
    fail(ErrorCode::EmptyLocalSet, os.str());
  }
  return LocalSet(BoxSimplex{std::move(upper), total});
}

LocalSet LocalSet::generic(GenericConvex set) {
  if (!set.project) fail(ErrorCode::InvalidArgument, "generic set needs a projection oracle");
  if (set.lower.size() != set.upper.size())
    fail(ErrorCode::DimensionMismatch, "generic set bounding box sizes differ");
  return LocalSet(std::move(set));
}

Eigen::Index LocalSet::dim() const {
  if (auto* s = std::get_if<BoxSimplex>(&set_)) return s->upper.size();
  return std::get<GenericConvex>(set_).lower.size();
}

Vector LocalSet::project(const Vector& v) const { return project(v, Vector::Ones(v.size())); }

Vector LocalSet::project(const Vector& v, const Vector& weights) const {
  require_size(v, dim(), "LocalSet::project");
  if (auto* s = std::get_if<BoxSimplex>(&set_))
    return project_box_simplex(v, s->upper, s->total, weights);
  return std::get<GenericConvex>(set_).project(v, weights);
}

bool LocalSet::contains(const Vector& x, double tol) const {
  if (x.size() != dim()) return false;
  if (auto* s = std::get_if<BoxSimplex>(&set_)) {
    return x.minCoeff() >= -tol && (x - s->upper).maxCoeff() <= tol &&
           std::abs(x.sum() - s->total) <= tol * std::max(1.0, s->total);
  }
  return (project(x) - x).lpNorm<Eigen::Infinity>() <= tol;
}

Vector LocalSet::center() const {
  if (auto* s = std::get_if<BoxSimplex>(&set_)) {
    const double cap = s->upper.sum();
    if (cap == 0.0) return Vector::Zero(dim());
    return s->upper * (s->total / cap);
  }
  const auto& g = std::get<GenericConvex>(set_);
  return project(0.5 * (g.lower + g.upper));
}

Vector LocalSet::bound_lower() const {
  if (std::get_if<BoxSimplex>(&set_)) return Vector::Zero(dim());
  return std::get<GenericConvex>(set_).lower;
}

Vector LocalSet::bound_upper() const {
  if (auto* s = std::get_if<BoxSimplex>(&set_)) return s->upper.cwiseMin(s->total);
  return std::get<GenericConvex>(set_).upper;
}

// --------------------------------------------------------------- CostModel

CostModel CostModel::quadratic(double a, Vector target, Matrix Q) {
  if (!(a > 0.0) || !std::isfinite(a))
    fail(ErrorCode::InvalidArgument, "quadratic cost needs a > 0");
  if (Q.rows() != target.size() || Q.cols() != target.size())
    fail(ErrorCode::DimensionMismatch, "quadratic cost: Q must be n x n");
  if (!Q.allFinite() || !target.allFinite())
    fail(ErrorCode::InvalidArgument, "quadratic cost: non-finite data");
  return CostModel(QuadraticAgg{a, std::move(target), std::move(Q)});
}

CostModel CostModel::generic(GenericSmooth cost) {
  if (!cost.value) fail(ErrorCode::InvalidArgument, "generic cost needs a value oracle");
  return CostModel(std::move(cost));
}

double CostModel::value(const Vector& x, const Vector& sigma) const {
  if (auto* q = std::get_if<QuadraticAgg>(&cost_))
    return 0.5 * q->a * (x - q->target).squaredNorm() + (q->Q * sigma).dot(x);
  return std::get<GenericSmooth>(cost_).value(x, sigma);
}

Vector CostModel::grad_x(const Vector& x, const Vector& sigma) const {
  if (auto* q = std::get_if<QuadraticAgg>(&cost_)) return q->a * (x - q->target) + q->Q * sigma;
  const auto& g = std::get<GenericSmooth>(cost_);
  if (!g.grad_x) fail(ErrorCode::NonSmoothCost, "cost has no partial-gradient oracle");
  return g.grad_x(x, sigma);
}

Vector CostModel::grad_sigma(const Vector& x, const Vector& sigma) const {
  if (auto* q = std::get_if<QuadraticAgg>(&cost_)) return q->Q.transpose() * x;
  const auto& g = std::get<GenericSmooth>(cost_);
  if (!g.grad_sigma) fail(ErrorCode::NonSmoothCost, "cost has no aggregate-gradient oracle");
  return g.grad_sigma(x, sigma);
}

double CostModel::curvature_bound() const {
  if (auto* q = std::get_if<QuadraticAgg>(&cost_)) return q->a;
  return std::get<GenericSmooth>(cost_).curvature_bound;
}

// ---------------------------------------------------------------- GameSpec

GameSpec::GameSpec(Dimensions dims, std::vector<AgentSpec> agents)
    : dims_(dims), agents_(std::move(agents)) {
  dims_.check();
  if (agents_.size() != dims_.N)
    fail(ErrorCode::DimensionMismatch, "agent count does not match N");
  const auto n = static_cast<Eigen::Index>(dims_.n);
  const auto m = static_cast<Eigen::Index>(dims_.m);
  b_ = Vector::Zero(m);
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    const auto& ag = agents_[i];
    const std::string tag = "agent " + std::to_string(i) + ": ";
    if (ag.omega.dim() != n) fail(ErrorCode::DimensionMismatch, tag + "local set dimension");
    if (ag.A.rows() != m || ag.A.cols() != n)
      fail(ErrorCode::DimensionMismatch, tag + "A_i must be m x n");
    if (ag.b.size() != m) fail(ErrorCode::DimensionMismatch, tag + "b_i must have length m");
    if (auto* q = ag.cost.as_quadratic(); q && q->target.size() != n)
      fail(ErrorCode::DimensionMismatch, tag + "cost target dimension");
    b_ += ag.b;
  }
}

Vector average(const Vector& x, std::size_t n) {
  if (n == 0 || x.size() == 0 || x.size() % static_cast<Eigen::Index>(n) != 0)
    fail(ErrorCode::DimensionMismatch, "average: length not divisible by block size");
  const std::size_t N = static_cast<std::size_t>(x.size()) / n;
  Vector s = Vector::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < N; ++i) s += GameSpec::block(x, i, n);
  return s / static_cast<double>(N);
}

Vector coupling_residual(const GameSpec& game, const Vector& x) {
  const auto& dm = game.dims();
  require_size(x, static_cast<Eigen::Index>(dm.n * dm.N), "coupling_residual x");
  Vector r = -game.b();
  for (std::size_t i = 0; i < dm.N; ++i) r += game.agent(i).A * GameSpec::block(x, i, dm.n);
  return r;
}

Vector coupling_violation(const GameSpec& game, const Vector& x) {
  return coupling_residual(game, x).cwiseMax(0.0);
}

bool in_local_constraint(const AgentSpec& agent, const Vector& xi, const Vector& yi, double tol) {
  if (!agent.omega.contains(xi, tol)) return false;
  return (yi - (agent.A * xi - agent.b)).lpNorm<Eigen::Infinity>() <= tol;
}

// -------------------------------------------------------------- validation

namespace {

constexpr double kSlaterMargin = 1e-9;
constexpr int kPhaseOneIters = 10000;
constexpr double kFeasTol = 1e-9;

double gradient_fd_error(const CostModel& cost, const Vector& x, const Vector& sigma) {
  Vector g;
  try {
    g = cost.grad_x(x, sigma);
  } catch (const Error&) {
    return 0.0;  // oracle-only cost: nothing to compare
  }
  Vector fd(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(x[j]));
    Vector xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    fd[j] = (cost.value(xp, sigma) - cost.value(xm, sigma)) / (2.0 * h);
  }
  return (g - fd).norm() / std::max(1.0, g.norm());
}

}  // namespace

ValidationReport validate_game(const GameSpec& game) {
  ValidationReport rep;
  const auto& dm = game.dims();
  const std::size_t n = dm.n;
  rep.local_set_nonempty.assign(dm.N, true);

  for (std::size_t i = 0; i < dm.N; ++i) {
    const auto& ag = game.agent(i);
    if (auto* bs = ag.omega.as_box_simplex(); bs && bs->upper.sum() < bs->total) {
      rep.local_set_nonempty[i] = false;
      if (!rep.error) rep.error = ErrorCode::EmptyLocalSet;
      rep.messages.push_back("agent " + std::to_string(i) + ": empty local set");
    }
  }
  if (rep.error) return rep;

  Vector x(static_cast<Eigen::Index>(n * dm.N));
  for (std::size_t i = 0; i < dm.N; ++i) GameSpec::block(x, i, n) = game.agent(i).omega.center();
  const Vector sigma = average(x, n);
  for (std::size_t i = 0; i < dm.N; ++i) {
    const double e = gradient_fd_error(game.agent(i).cost, GameSpec::block(x, i, n), sigma);
    rep.gradient_fd_error = std::max(rep.gradient_fd_error, e);
  }
  rep.gradients_ok = rep.gradient_fd_error <= 1e-6;
  if (!rep.gradients_ok) rep.messages.push_back("cost gradient disagrees with finite differences");

  // Phase 1: minimize 1/2 |max(Ax - b + margin, 0)|^2 over prod Omega_i.
  double lip = 0.0;
  for (const auto& ag : game.agents()) lip += ag.A.squaredNorm();
  const double step = lip > 0.0 ? 1.0 / lip : 1.0;
  Vector r = coupling_residual(game, x);
  for (int it = 0; it < kPhaseOneIters && r.maxCoeff() > -kSlaterMargin; ++it) {
    const Vector viol = (r.array() + kSlaterMargin).max(0.0).matrix();
    for (std::size_t i = 0; i < dm.N; ++i) {
      const auto& ag = game.agent(i);
      GameSpec::block(x, i, n) =
          ag.omega.project(GameSpec::block(x, i, n) - step * ag.A.transpose() * viol);
    }
    r = coupling_residual(game, x);
  }
  rep.max_violation = std::max(0.0, r.maxCoeff());
  rep.strictly_feasible = r.maxCoeff() <= -kSlaterMargin;
  rep.feasible = r.maxCoeff() <= kFeasTol;
  rep.witness = x;
  if (!rep.feasible) {
    rep.error = ErrorCode::Infeasible;
    rep.messages.push_back("no point with A x <= b found over the local sets");
  } else if (!rep.strictly_feasible) {
    rep.messages.push_back("warning: feasible point found but no strictly feasible one (Slater)");
  }
  return rep;
}

void require_valid(const ValidationReport& report) {
  if (report.error) {
    std::string msg = report.messages.empty() ? "invalid game" : report.messages.front();
    fail(*report.error, msg);
  }
  if (!report.gradients_ok) fail(ErrorCode::InvalidArgument, "cost gradient check failed");
}

}  // namespace aggsplit
