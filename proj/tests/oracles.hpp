#pragma once
// Independent reference computations for the tests. Nothing here calls the
// solver kernels it is used to check: projections are found by enumerating
// active sets, J_B by a dense linear solve, gradients by central differences.

#include "aggsplit/engine.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

using aggsplit::Matrix;
using aggsplit::Vector;

/// argmin 1/2 z'Hz + c'z over {0 <= z <= u, sum z = total}, H positive
/// definite, by trying all 3^n lower/upper/free patterns. n <= 6.
inline Vector box_simplex_qp(const Matrix& H, const Vector& c, const Vector& u, double total) {
  const int n = static_cast<int>(c.size());
  int patterns = 1;
  for (int j = 0; j < n; ++j) patterns *= 3;
  Vector best;
  double best_obj = std::numeric_limits<double>::infinity();
  const double tol = 1e-12;
  for (int p = 0; p < patterns; ++p) {
    std::vector<int> state(n);
    int code = p;
    for (int j = 0; j < n; ++j) {
      state[j] = code % 3;  // 0 lower, 1 upper, 2 free
      code /= 3;
    }
    Vector z = Vector::Zero(n);
    std::vector<int> free;
    for (int j = 0; j < n; ++j) {
      if (state[j] == 1) z[j] = u[j];
      if (state[j] == 2) free.push_back(j);
    }
    const int f = static_cast<int>(free.size());
    if (f == 0) {
      if (std::abs(z.sum() - total) > 1e-12) continue;
    } else {
      // [H_ff 1][z_f]   [-c_f - H_fb z_b]
      // [1'   0][nu ] = [total - sum z_b]
      Matrix K = Matrix::Zero(f + 1, f + 1);
      Vector r(f + 1);
      double fixed = 0.0;
      for (int j = 0; j < n; ++j)
        if (state[j] != 2) fixed += z[j];
      for (int a = 0; a < f; ++a) {
        double rhs = -c[free[a]];
        for (int j = 0; j < n; ++j)
          if (state[j] != 2) rhs -= H(free[a], j) * z[j];
        r[a] = rhs;
        for (int b = 0; b < f; ++b) K(a, b) = H(free[a], free[b]);
        K(a, f) = 1.0;
        K(f, a) = 1.0;
      }
      r[f] = total - fixed;
      const Vector s = K.fullPivLu().solve(r);
      for (int a = 0; a < f; ++a) z[free[a]] = s[a];
    }
    bool ok = true;
    for (int j = 0; j < n && ok; ++j) ok = z[j] >= -tol && z[j] <= u[j] + tol;
    if (!ok) continue;
    const double obj = 0.5 * z.dot(H * z) + c.dot(z);
    if (obj < best_obj) {
      best_obj = obj;
      best = z;
    }
  }
  return best;
}

/// argmin sum w_j (z_j - v_j)^2 over the box-simplex.
inline Vector project_box_simplex(const Vector& v, const Vector& u, double total, const Vector& w) {
  const Matrix H = w.asDiagonal();
  return box_simplex_qp(H, -(w.cwiseProduct(v)), u, total);
}

/// argmin_{z in Omega} 1/2 a |z - t|^2 + (Q sigma)'z + lin'z + 1/2 (z - ctr)' M (z - ctr)
/// for a box-simplex agent with a quadratic cost.
inline Vector quadratic_prox(const aggsplit::AgentSpec& ag, const Vector& sigma, const Vector& lin,
                             const Vector& center, const Matrix& metric) {
  const auto* q = ag.cost.as_quadratic();
  const auto* bs = ag.omega.as_box_simplex();
  const auto n = center.size();
  const Matrix H = q->a * Matrix::Identity(n, n) + metric;
  const Vector c = -q->a * q->target + q->Q * sigma + lin - metric * center;
  return box_simplex_qp(H, c, bs->upper, bs->total);
}

inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                          double h = 1e-6) {
  Vector g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Vector p = x, m = x;
    p[j] += h;
    m[j] -= h;
    g[j] = (f(p) - f(m)) / (2.0 * h);
  }
  return g;
}

/// Solves  x+ - gamma M' mu+ = x,  y+ + gamma P' lambda+ = y,  sigma+ + alpha mu+ = sigma,
///         mu+ + beta (M x+ - sigma+) = mu,  lambda+ + delta (N(lambda+) - P y+) ∋ lambda
/// with M = (1/N) 1' (x) I_n, P = 1' (x) I_m, by a dense solve for each of the
/// 2^m choices of multipliers pinned at zero.
inline aggsplit::ExtendedPoint resolvent_B_dense(const aggsplit::Dimensions& dm,
                                                 const std::vector<double>& gamma, double alpha,
                                                 double beta, double delta,
                                                 const aggsplit::ExtendedPoint& w) {
  const int N = static_cast<int>(dm.N), n = static_cast<int>(dm.n), m = static_cast<int>(dm.m);
  const int ox = 0, oy = n * N, os = oy + m * N, om = os + n, ol = om + n, d = ol + m;
  const Vector rhs_full = w.flatten();
  aggsplit::ExtendedPoint best;
  bool found = false;
  for (int mask = 0; mask < (1 << m); ++mask) {
    Matrix K = Matrix::Zero(d, d);
    Vector r = rhs_full;
    for (int i = 0; i < N; ++i)
      for (int h = 0; h < n; ++h) {
        const int row = ox + i * n + h;
        K(row, row) = 1.0;
        K(row, om + h) = -gamma[i] / N;
      }
    for (int i = 0; i < N; ++i)
      for (int h = 0; h < m; ++h) {
        const int row = oy + i * m + h;
        K(row, row) = 1.0;
        K(row, ol + h) = gamma[i];
      }
    for (int h = 0; h < n; ++h) {
      K(os + h, os + h) = 1.0;
      K(os + h, om + h) = alpha;
      K(om + h, om + h) = 1.0;
      K(om + h, os + h) = -beta;
      for (int i = 0; i < N; ++i) K(om + h, ox + i * n + h) = beta / N;
    }
    for (int h = 0; h < m; ++h) {
      const int row = ol + h;
      if (mask & (1 << h)) {
        K(row, row) = 1.0;  // lambda+_h = 0
        r[row] = 0.0;
      } else {
        K(row, row) = 1.0;
        for (int i = 0; i < N; ++i) K(row, oy + i * m + h) = -delta;
      }
    }
    const Vector s = K.fullPivLu().solve(r);
    bool ok = true;
    for (int h = 0; h < m && ok; ++h) {
      double py = 0.0;
      for (int i = 0; i < N; ++i) py += s[oy + i * m + h];
      if (mask & (1 << h))
        ok = w.lambda[h] + delta * py <= 1e-12;
      else
        ok = s[ol + h] >= -1e-12;
    }
    if (ok) {
      best = aggsplit::ExtendedPoint::unflatten(dm, s);
      found = true;
      break;
    }
  }
  if (!found) throw std::runtime_error("resolvent_B_dense: no consistent pattern");
  return best;
}

/// The agent/coordinator iteration written out sequentially for box-simplex quadratic games.
/// Returns x^1 .. x^iters (x^0 is not included).
struct LoopTrace {
  std::vector<Vector> x, sigma, mu, lambda;
};

inline LoopTrace agent_loop(const aggsplit::GameSpec& game, const std::vector<double>& gamma,
                            double alpha, double delta_c, double beta_c, const Vector& x0,
                            int iters) {
  const auto& dm = game.dims();
  const int N = static_cast<int>(dm.N);
  const auto n = static_cast<Eigen::Index>(dm.n), m = static_cast<Eigen::Index>(dm.m);
  std::vector<Vector> x(N), y(N);
  Vector xhat = Vector::Zero(n), yhat = Vector::Zero(m);
  for (int i = 0; i < N; ++i) {
    const auto& ag = game.agent(i);
    x[i] = x0.segment(i * n, n);
    y[i] = ag.A * x[i] - ag.b;
    xhat += x[i] / N;
    yhat += y[i] / N;
  }
  Vector sigma = xhat, mu = Vector::Zero(n), lambda = Vector::Zero(m);
  LoopTrace out;
  for (int k = 0; k < iters; ++k) {
    Vector nxhat = Vector::Zero(n), nyhat = Vector::Zero(m);
    Vector stacked(n * N);
    for (int i = 0; i < N; ++i) {
      const auto& ag = game.agent(i);
      const Matrix metric = (Matrix::Identity(n, n) + ag.A.transpose() * ag.A) / gamma[i];
      x[i] = quadratic_prox(ag, sigma, ag.A.transpose() * lambda - mu / N, x[i], metric);
      y[i] = ag.A * x[i] - ag.b;
      nxhat += x[i] / N;
      nyhat += y[i] / N;
      stacked.segment(i * n, n) = x[i];
    }
    lambda = (lambda + delta_c * (2.0 * nyhat - yhat)).cwiseMax(0.0);
    mu = mu - beta_c * (2.0 * nxhat - xhat - sigma + alpha * mu);
    sigma = sigma - alpha * mu;
    xhat = nxhat;
    yhat = nyhat;
    out.x.push_back(stacked);
    out.sigma.push_back(sigma);
    out.mu.push_back(mu);
    out.lambda.push_back(lambda);
  }
  return out;
}

}  // namespace oracle
