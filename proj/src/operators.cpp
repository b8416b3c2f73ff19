#include "aggsplit/operators.hpp"

#include "aggsplit/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace aggsplit {

// ----------------------------------------------------------- ExtendedPoint

ExtendedPoint ExtendedPoint::zeros(const Dimensions& dm) {
  const auto n = static_cast<Eigen::Index>(dm.n);
  const auto m = static_cast<Eigen::Index>(dm.m);
  const auto N = static_cast<Eigen::Index>(dm.N);
  return {Vector::Zero(n * N), Vector::Zero(m * N), Vector::Zero(n), Vector::Zero(n),
          Vector::Zero(m)};
}

Vector ExtendedPoint::flatten() const {
  Vector v(x.size() + y.size() + sigma.size() + mu.size() + lambda.size());
  v << x, y, sigma, mu, lambda;
  return v;
}

ExtendedPoint ExtendedPoint::unflatten(const Dimensions& dm, const Vector& v) {
  require_size(v, static_cast<Eigen::Index>(dm.d()), "ExtendedPoint::unflatten");
  ExtendedPoint w = zeros(dm);
  Eigen::Index off = 0;
  for (Vector* blk : {&w.x, &w.y, &w.sigma, &w.mu, &w.lambda}) {
    *blk = v.segment(off, blk->size());
    off += blk->size();
  }
  return w;
}

void ExtendedPoint::check(const Dimensions& dm) const {
  require_size(x, static_cast<Eigen::Index>(dm.n * dm.N), "omega.x");
  require_size(y, static_cast<Eigen::Index>(dm.m * dm.N), "omega.y");
  require_size(sigma, static_cast<Eigen::Index>(dm.n), "omega.sigma");
  require_size(mu, static_cast<Eigen::Index>(dm.n), "omega.mu");
  require_size(lambda, static_cast<Eigen::Index>(dm.m), "omega.lambda");
}

ExtendedPoint& ExtendedPoint::operator+=(const ExtendedPoint& o) {
  x += o.x;
  y += o.y;
  sigma += o.sigma;
  mu += o.mu;
  lambda += o.lambda;
  return *this;
}

ExtendedPoint& ExtendedPoint::operator-=(const ExtendedPoint& o) {
  x -= o.x;
  y -= o.y;
  sigma -= o.sigma;
  mu -= o.mu;
  lambda -= o.lambda;
  return *this;
}

ExtendedPoint& ExtendedPoint::operator*=(double s) {
  x *= s;
  y *= s;
  sigma *= s;
  mu *= s;
  lambda *= s;
  return *this;
}

double ExtendedPoint::dot(const ExtendedPoint& o) const {
  return x.dot(o.x) + y.dot(o.y) + sigma.dot(o.sigma) + mu.dot(o.mu) + lambda.dot(o.lambda);
}

double ExtendedPoint::max_abs_diff(const ExtendedPoint& o) const {
  return (flatten() - o.flatten()).lpNorm<Eigen::Infinity>();
}

ExtendedPoint operator+(ExtendedPoint a, const ExtendedPoint& b) { return a += b; }
ExtendedPoint operator-(ExtendedPoint a, const ExtendedPoint& b) { return a -= b; }
ExtendedPoint operator*(double s, ExtendedPoint a) { return a *= s; }

// ------------------------------------------------------ pseudo-gradients

Vector extended_subdifferential(const GameSpec& game, const Vector& x, const Vector& sigma) {
  const auto& dm = game.dims();
  require_size(x, static_cast<Eigen::Index>(dm.n * dm.N), "F_e x");
  require_size(sigma, static_cast<Eigen::Index>(dm.n), "F_e sigma");
  Vector g(x.size());
  for (std::size_t i = 0; i < dm.N; ++i)
    GameSpec::block(g, i, dm.n) = game.agent(i).cost.grad_x(GameSpec::block(x, i, dm.n), sigma);
  return g;
}

Vector aggregative_subdifferential(const GameSpec& game, const Vector& x) {
  return extended_subdifferential(game, x, average(x, game.dims().n));
}

Vector pseudo_subdifferential(const GameSpec& game, const Vector& x) {
  const auto& dm = game.dims();
  const Vector sigma = average(x, dm.n);
  Vector g = extended_subdifferential(game, x, sigma);
  const double inv_n = 1.0 / static_cast<double>(dm.N);
  for (std::size_t i = 0; i < dm.N; ++i)
    GameSpec::block(g, i, dm.n) +=
        inv_n * game.agent(i).cost.grad_sigma(GameSpec::block(x, i, dm.n), sigma);
  return g;
}

// -------------------------------------------------------- skew operator S

ExtendedPoint apply_S(const Dimensions& dm, const ExtendedPoint& w, CouplingScale scale) {
  w.check(dm);
  const double inv_n = 1.0 / static_cast<double>(dm.N);
  const double coupling = scale == CouplingScale::Average ? inv_n : 1.0;
  ExtendedPoint out = ExtendedPoint::zeros(dm);
  Vector ysum = Vector::Zero(static_cast<Eigen::Index>(dm.m));
  for (std::size_t i = 0; i < dm.N; ++i) {
    GameSpec::block(out.x, i, dm.n) = -inv_n * w.mu;
    GameSpec::block(out.y, i, dm.m) = coupling * w.lambda;
    ysum += GameSpec::block(w.y, i, dm.m);
  }
  out.sigma = w.mu;
  out.mu = average(w.x, dm.n) - w.sigma;
  out.lambda = -coupling * ysum;
  return out;
}

ExtendedPoint operator_A_part(const GameSpec& game, const ExtendedPoint& w) {
  ExtendedPoint out = ExtendedPoint::zeros(game.dims());
  out.x = extended_subdifferential(game, w.x, w.sigma);
  return out;
}

ExtendedPoint operator_B_part(const Dimensions& dm, const ExtendedPoint& w, CouplingScale scale) {
  return apply_S(dm, w, scale);
}

ExtendedPoint operator_T_part(const GameSpec& game, const ExtendedPoint& w, CouplingScale scale) {
  const auto& dm = game.dims();
  w.check(dm);
  const double inv_n = 1.0 / static_cast<double>(dm.N);
  const double coupling = scale == CouplingScale::Average ? inv_n : 1.0;
  // Row by row as the operator is written, independently of apply_S.
  ExtendedPoint t = ExtendedPoint::zeros(dm);
  const Vector fe = extended_subdifferential(game, w.x, w.sigma);
  for (std::size_t i = 0; i < dm.N; ++i) {
    GameSpec::block(t.x, i, dm.n) = GameSpec::block(fe, i, dm.n) - inv_n * w.mu;
    GameSpec::block(t.y, i, dm.m) = coupling * w.lambda;
  }
  t.sigma = w.mu;
  t.mu = -(w.sigma - average(w.x, dm.n));
  Vector ysum = Vector::Zero(static_cast<Eigen::Index>(dm.m));
  for (std::size_t i = 0; i < dm.N; ++i) ysum += GameSpec::block(w.y, i, dm.m);
  t.lambda = -coupling * ysum;
  return t;
}

// ------------------------------------------------------------------- KKT

double KktResidual::max() const {
  return std::max({stationarity, primal, complementarity, dual_sign, consensus, link});
}

KktResidual kkt_residual(const GameSpec& game, const ExtendedPoint& w) {
  const auto& dm = game.dims();
  w.check(dm);
  KktResidual r;
  const Vector xhat = average(w.x, dm.n);
  for (std::size_t i = 0; i < dm.N; ++i) {
    const auto& ag = game.agent(i);
    const Vector xi = GameSpec::block(w.x, i, dm.n);
    const Vector g = ag.cost.grad_x(xi, xhat) + ag.A.transpose() * w.lambda;
    r.stationarity = std::max(r.stationarity, (xi - ag.omega.project(xi - g)).norm());
    const Vector link = GameSpec::block(w.y, i, dm.m) - (ag.A * xi - ag.b);
    r.link = std::max(r.link, link.lpNorm<Eigen::Infinity>());
  }
  const Vector res = coupling_residual(game, w.x);
  r.primal = res.cwiseMax(0.0).lpNorm<Eigen::Infinity>();
  r.complementarity = std::abs(w.lambda.dot(res));
  r.dual_sign = (-w.lambda).cwiseMax(0.0).lpNorm<Eigen::Infinity>();
  r.consensus = (w.sigma - xhat).lpNorm<Eigen::Infinity>();
  return r;
}

// ---------------------------------------------------------- monotonicity

ProbeReport monotonicity_probe(const GameSpec& game, std::size_t sample_count,
                               std::uint64_t seed) {
  if (sample_count == 0) fail(ErrorCode::InvalidArgument, "monotonicity_probe: sample_count >= 1");
  const auto& dm = game.dims();
  const auto n = static_cast<Eigen::Index>(dm.n);
  const Eigen::Index nn = n * static_cast<Eigen::Index>(dm.N);

  Vector xlo(nn), xhi(nn);
  Vector slo = Vector::Constant(n, std::numeric_limits<double>::infinity());
  Vector shi = Vector::Constant(n, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < dm.N; ++i) {
    const Vector lo = game.agent(i).omega.bound_lower();
    const Vector hi = game.agent(i).omega.bound_upper();
    GameSpec::block(xlo, i, dm.n) = lo;
    GameSpec::block(xhi, i, dm.n) = hi;
    slo = slo.cwiseMin(lo);
    shi = shi.cwiseMax(hi);
  }

  Rng rng(seed, 0x9b0be);
  auto draw = [&rng](const Vector& lo, const Vector& hi) {
    Vector v(lo.size());
    for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = rng.uniform(lo[j], hi[j]);
    return v;
  };

  ProbeReport rep;
  rep.samples = sample_count;
  rep.min_inner_product = std::numeric_limits<double>::infinity();
  rep.min_normalized = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < sample_count; ++k) {
    const Vector x1 = draw(xlo, xhi), s1 = draw(slo, shi);
    const Vector x2 = draw(xlo, xhi), s2 = draw(slo, shi);
    const Vector dF = extended_subdifferential(game, x1, s1) - extended_subdifferential(game, x2, s2);
    const double ip = dF.dot(x1 - x2);
    const double scale = (x1 - x2).squaredNorm() + (s1 - s2).squaredNorm();
    rep.min_inner_product = std::min(rep.min_inner_product, ip);
    if (scale > 0.0) rep.min_normalized = std::min(rep.min_normalized, ip / scale);
    if (ip < 0.0) ++rep.negative_count;
  }
  return rep;
}

}  // namespace aggsplit
