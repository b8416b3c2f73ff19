#include "aggsplit/benchmark.hpp"

#include "aggsplit/parallel.hpp"
#include "aggsplit/projection.hpp"
#include "aggsplit/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace aggsplit {

namespace {
constexpr std::uint64_t kCapacityStream = 0xb0b0b0b0ULL;
constexpr int kMaxResample = 100;
}  // namespace

BenchmarkParams BenchmarkParams::standard() { return BenchmarkParams{}; }

void BenchmarkParams::check() const {
  if (N < 1 || n < 1) fail(ErrorCode::InvalidArgument, "benchmark: N and n must be >= 1");
  if (!(a_lo > 0.0 && a_lo <= a_hi)) fail(ErrorCode::InvalidArgument, "benchmark: a range");
  if (!(w_lo >= 0.0 && w_lo <= w_hi)) fail(ErrorCode::InvalidArgument, "benchmark: w range");
  if (!(q_lo <= q_hi && qbar_lo <= qbar_hi)) fail(ErrorCode::InvalidArgument, "benchmark: Q range");
  if (!(b_lo > 0.0 && b_lo <= b_hi)) fail(ErrorCode::InvalidArgument, "benchmark: b range");
  if (!(task_total >= 0.0 && upper_total >= task_total))
    fail(ErrorCode::InvalidArgument, "benchmark: need upper_total >= task_total >= 0");
  if (upper_total > static_cast<double>(n))
    fail(ErrorCode::InvalidArgument, "benchmark: upper_total > n cannot fit in [0,1]^n");
}

GameSpec generate_benchmark(const BenchmarkParams& p) {
  p.check();
  const auto n = static_cast<Eigen::Index>(p.n);
  std::vector<AgentSpec> agents;
  agents.reserve(p.N);
  std::vector<double> weights(p.N);
  std::vector<Vector> uppers(p.N);

  for (std::size_t i = 0; i < p.N; ++i) {
    Rng rng(p.seed, i);
    const double a = rng.uniform(p.a_lo, p.a_hi);
    const double w = rng.uniform(p.w_lo, p.w_hi);
    const double q = rng.uniform(p.q_lo, p.q_hi);
    Matrix Q = q * Matrix::Identity(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index c = 0; c < n; ++c) Q(r, c) += rng.uniform(p.qbar_lo, p.qbar_hi);

    Vector u(n);
    bool ok = false;
    for (int attempt = 0; attempt < kMaxResample && !ok; ++attempt) {
      for (Eigen::Index h = 0; h < n; ++h) u[h] = rng.uniform();
      const double s = u.sum();
      if (s <= 0.0) continue;
      u *= p.upper_total / s;
      ok = u.maxCoeff() <= 1.0;
    }
    if (!ok)
      fail(ErrorCode::GenerationFailed,
           "benchmark: agent " + std::to_string(i) + " upper bound not drawn in 100 attempts");

    weights[i] = w;
    uppers[i] = u;
    LocalSet omega = LocalSet::box_simplex(u, p.task_total);
    Vector e1 = Vector::Zero(n);
    e1[0] = 1.0;
    Vector target = omega.project(e1);
    agents.push_back(AgentSpec{std::move(omega), CostModel::quadratic(a, std::move(target), Q),
                               w * Matrix::Identity(n, n), Vector::Zero(n)});
  }

  Vector au = Vector::Zero(n);
  for (std::size_t i = 0; i < p.N; ++i) au += weights[i] * uppers[i];
  Rng rng(p.seed, kCapacityStream);
  Vector b(n);
  for (Eigen::Index h = 0; h < n; ++h) b[h] = rng.uniform(p.b_lo * au[h], p.b_hi * au[h]);
  const Vector bi = b / static_cast<double>(p.N);
  for (auto& ag : agents) ag.b = bi;

  Dimensions dims{p.N, p.n, p.n};
  GameSpec game(dims, std::move(agents));
  // Capacity interval holds by construction; checked against the assembled b.
  const Vector& bs = game.b();
  for (Eigen::Index h = 0; h < n; ++h) {
    if (bs[h] < p.b_lo * au[h] * (1.0 - 1e-12) || bs[h] > p.b_hi * au[h] * (1.0 + 1e-12))
      fail(ErrorCode::GenerationFailed, "benchmark: capacity outside its interval");
  }
  return game;
}

std::vector<double> benchmark_weights(const GameSpec& game) {
  std::vector<double> w;
  for (const auto& ag : game.agents()) w.push_back(ag.A(0, 0));
  return w;
}

// ------------------------------------------------------------ references

GroundTruth ground_truth(const GameSpec& game, const GroundTruthOptions& opt) {
  const auto& dm = game.dims();
  RunConfig cfg = opt.config.steps.agents() == dm.N ? opt.config : RunConfig::defaults(dm.N);
  cfg.stop_rule = StopRule::Residual;
  cfg.stop_tol = opt.tol * 1e-3;
  cfg.max_iters = opt.max_iters;
  cfg.record_every = std::max<std::size_t>(cfg.record_every, opt.max_iters);
  cfg.relaxation = 1.0;

  RunResult res;
  try {
    res = run_dr(game, cfg);
  } catch (const MaxItersExceeded& e) {
    res = e.result();  // may still certify below
  }
  GroundTruth gt;
  gt.x = res.final_point.x;
  gt.point = res.final_point;
  gt.iterations = res.iterations;
  gt.kkt = kkt_residual(game, gt.point);
  if (!(gt.kkt.max() <= opt.tol))
    fail(ErrorCode::NotCertified,
         "ground truth: KKT residual " + std::to_string(gt.kkt.max()) + " above tolerance");

  if (opt.cross_check) {
    RunConfig pc = cfg;
    pc.stop_tol = opt.tol * 1e-3;
    RunResult pr;
    try {
      pr = run_pfb(game, pc);
    } catch (const MaxItersExceeded& e) {
      pr = e.result();
    }
    gt.pfb_agreement = (pr.final_point.x - gt.x).lpNorm<Eigen::Infinity>();
    if (!(*gt.pfb_agreement <= opt.cross_check_tol_factor * opt.tol))
      fail(ErrorCode::NotCertified, "ground truth: baseline disagrees by " +
                                        std::to_string(*gt.pfb_agreement));
  }
  return gt;
}

Vector project_coupled_set(const GameSpec& game, const Vector& v, double tolerance) {
  const auto& dm = game.dims();
  require_size(v, static_cast<Eigen::Index>(dm.n * dm.N), "project_coupled_set v");
  const auto m = static_cast<Eigen::Index>(dm.m);
  Matrix AAt = Matrix::Zero(m, m);
  for (const auto& ag : game.agents()) AAt += ag.A * ag.A.transpose();
  const double L = std::max(1e-300, Eigen::SelfAdjointEigenSolver<Matrix>(AAt).eigenvalues().maxCoeff());

  Vector z(v.size());
  // z(lambda) = proj_Omega(v - A^T lambda); dual gradient A z - b.
  auto primal = [&](const Vector& lam) {
    for (std::size_t i = 0; i < dm.N; ++i) {
      const auto& ag = game.agent(i);
      GameSpec::block(z, i, dm.n) =
          ag.omega.project(GameSpec::block(v, i, dm.n) - ag.A.transpose() * lam);
    }
    return Vector(coupling_residual(game, z));
  };

  const double scale = std::max(1.0, game.b().lpNorm<Eigen::Infinity>());
  Vector lam = Vector::Zero(m), prev = lam, look = lam;
  double t = 1.0;
  for (int it = 0; it < 1000000; ++it) {
    const Vector g = primal(look);
    Vector next = (look + g / L).cwiseMax(0.0);
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    // restart when the momentum points against the gradient
    if (g.dot(next - lam) < 0.0) {
      t = 1.0;
      look = lam;
      continue;
    }
    prev = lam;
    lam = next;
    look = lam + ((t - 1.0) / tn) * (lam - prev);
    t = tn;
    const Vector gl = primal(lam);
    if ((lam - (lam + gl).cwiseMax(0.0)).lpNorm<Eigen::Infinity>() <= tolerance * scale) break;
  }
  primal(lam);
  return z;
}

double gae_vi_residual(const GameSpec& game, const Vector& x, const std::optional<Vector>& lambda) {
  const auto& dm = game.dims();
  require_size(x, static_cast<Eigen::Index>(dm.n * dm.N), "gae_vi_residual x");
  if (!lambda) {
    const Vector v = x - aggregative_subdifferential(game, x);
    return (x - project_coupled_set(game, v)).norm();
  }
  require_size(*lambda, static_cast<Eigen::Index>(dm.m), "gae_vi_residual lambda");
  ExtendedPoint w = ExtendedPoint::zeros(dm);
  w.x = x;
  w.sigma = average(x, dm.n);
  w.lambda = *lambda;
  for (std::size_t i = 0; i < dm.N; ++i) {
    const auto& ag = game.agent(i);
    GameSpec::block(w.y, i, dm.m) = ag.A * GameSpec::block(x, i, dm.n) - ag.b;
  }
  return kkt_residual(game, w).stationarity;
}

// ------------------------------------------------------- epsilon-Nash gap

namespace {

/// Projection onto Omega_i intersected with {A_i z <= r}.
class DeviationSet {
 public:
  DeviationSet(const AgentSpec& ag, const Vector& r, const Vector& feasible_point) : ag_(ag), r_(r) {
    const auto* bs = ag.omega.as_box_simplex();
    const bool diag_positive = ag.A.rows() == ag.A.cols() &&
                               ag.A.isDiagonal(0.0) && ag.A.diagonal().minCoeff() > 0.0;
    if (bs && diag_positive) {
      Vector up = bs->upper.cwiseMin(r.cwiseQuotient(ag.A.diagonal())).cwiseMax(0.0);
      up = up.cwiseMax(feasible_point.cwiseMin(bs->upper));  // absorb rounding
      tight_ = LocalSet::box_simplex(up, bs->total);
    }
  }

  Vector project(const Vector& v) const {
    if (tight_) return tight_->project(v);
    // Cyclic Dykstra over Omega_i and the m half-spaces.
    const Eigen::Index m = ag_.A.rows();
    std::vector<Vector> incr(static_cast<std::size_t>(m + 1), Vector::Zero(v.size()));
    Vector z = v;
    for (int cycle = 0; cycle < 100000; ++cycle) {
      const Vector before = z;
      {
        const Vector t = z + incr[0];
        const Vector p = ag_.omega.project(t);
        incr[0] = t - p;
        z = p;
      }
      for (Eigen::Index j = 0; j < m; ++j) {
        const Vector t = z + incr[static_cast<std::size_t>(j + 1)];
        const auto row = ag_.A.row(j);
        const double nrm2 = row.squaredNorm();
        const double excess = row.dot(t) - r_[j];
        const Vector p = (excess > 0.0 && nrm2 > 0.0) ? Vector(t - (excess / nrm2) * row.transpose()) : t;
        incr[static_cast<std::size_t>(j + 1)] = t - p;
        z = p;
      }
      if ((z - before).lpNorm<Eigen::Infinity>() <= 1e-15) break;
    }
    return z;
  }

 private:
  const AgentSpec& ag_;
  Vector r_;
  std::optional<LocalSet> tight_;
};

}  // namespace

EpsilonGap epsilon_nash_gap(const GameSpec& game, const Vector& x, double tolerance) {
  const auto& dm = game.dims();
  require_size(x, static_cast<Eigen::Index>(dm.n * dm.N), "epsilon_nash_gap x");
  const double N = static_cast<double>(dm.N);
  Vector sum_x = Vector::Zero(static_cast<Eigen::Index>(dm.n));
  for (std::size_t i = 0; i < dm.N; ++i) sum_x += GameSpec::block(x, i, dm.n);
  const Vector ax_minus_b = coupling_residual(game, x);

  EpsilonGap gap;
  gap.per_agent.assign(dm.N, 0.0);
  parallel_for(dm.N, [&](std::size_t i) {
    const auto& ag = game.agent(i);
    const Vector xi = GameSpec::block(x, i, dm.n);
    const Vector others = sum_x - xi;
    // A_i z <= b - sum_{j != i} A_j x_j
    const Vector r = ag.A * xi - ax_minus_b;
    DeviationSet set(ag, r, xi);

    auto phi = [&](const Vector& z) { return ag.cost.value(z, (z + others) / N); };
    auto grad = [&](const Vector& z) {
      const Vector s = (z + others) / N;
      return Vector(ag.cost.grad_x(z, s) + ag.cost.grad_sigma(z, s) / N);
    };

    // Projected gradient with backtracking from the current strategy.
    Vector z = xi;
    double fz = phi(z);
    double step = 1.0 / std::max(1e-12, ag.cost.curvature_bound());
    for (int it = 0; it < 100000; ++it) {
      const Vector g = grad(z);
      if ((z - set.project(z - g)).norm() <= tolerance) break;
      Vector zn;
      double fn = 0.0;
      for (int ls = 0; ls < 60; ++ls) {
        zn = set.project(z - step * g);
        fn = phi(zn);
        if (fn <= fz + g.dot(zn - z) + (zn - z).squaredNorm() / (2.0 * step)) break;
        step *= 0.5;
      }
      if ((zn - z).norm() == 0.0) break;
      z = zn;
      fz = fn;
      step *= 1.25;
    }
    const double at_xi = phi(xi);
    gap.per_agent[i] = at_xi - std::min(at_xi, fz);
  });
  gap.max = gap.per_agent.empty() ? 0.0 : *std::max_element(gap.per_agent.begin(), gap.per_agent.end());
  return gap;
}

// ----------------------------------------------------------- comparison

std::size_t ExperimentReport::successful_seeds() const {
  return static_cast<std::size_t>(
      std::count_if(seeds.begin(), seeds.end(), [](const SeedOutcome& s) { return s.ok; }));
}

namespace {

MethodOutcome run_method(const std::string& method, const GameSpec& game, const Vector& ref,
                         const ComparisonOptions& opt) {
  const auto& dm = game.dims();
  RunConfig cfg;
  cfg.steps = StepSizes::uniform_central(dm.N, opt.gamma, opt.alpha, opt.delta_c, opt.beta_c);
  cfg.stop_rule = StopRule::ReferenceDistance;
  cfg.stop_tol = opt.tol;
  cfg.max_iters = opt.max_iters;
  cfg.record_every = 1;
  cfg.record_timing = opt.record_timing;

  const auto t0 = std::chrono::steady_clock::now();
  RunResult res;
  try {
    if (method == "dr")
      res = run_dr(game, cfg, ref);
    else if (method == "pfb")
      res = run_pfb(game, cfg, ref);
    else
      fail(ErrorCode::InvalidArgument, "unknown method '" + method + "'");
  } catch (const MaxItersExceeded& e) {
    res = e.result();
  }
  const auto t1 = std::chrono::steady_clock::now();

  MethodOutcome out;
  out.method = method;
  out.iterations = res.iterations;
  out.iters_to_tol = res.iters_to_tol;
  out.final_kkt = res.trace.rows.empty() ? 0.0 : res.trace.rows.back().kkt.max();
  if (opt.record_timing)
    out.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  const double d0 = *res.trace.initial_dist_to_ref;
  out.normalized_curve.push_back(d0 > 0.0 ? 1.0 : 0.0);
  for (const auto& row : res.trace.rows)
    out.normalized_curve.push_back(d0 > 0.0 ? *row.dist_to_ref / d0 : *row.dist_to_ref);
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size();
  return k % 2 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
}

}  // namespace

ExperimentReport run_comparison(const BenchmarkParams& params, std::size_t num_seeds,
                                const ComparisonOptions& opt) {
  if (num_seeds == 0) fail(ErrorCode::InvalidArgument, "run_comparison: num_seeds >= 1");
  ExperimentReport rep;
  rep.params = params;
  rep.options = opt;
  rep.seeds.resize(num_seeds);

  parallel_for(num_seeds, [&](std::size_t s) {
    SeedOutcome& out = rep.seeds[s];
    BenchmarkParams p = params;
    p.seed = params.seed + s;
    out.seed = p.seed;
    try {
      const GameSpec game = generate_benchmark(p);
      require_valid(validate_game(game));
      GroundTruthOptions go;
      go.tol = opt.reference_tol;
      go.config.steps = StepSizes::uniform_central(p.N, opt.gamma, opt.alpha, opt.delta_c, opt.beta_c);
      const GroundTruth gt = ground_truth(game, go);
      out.reference_kkt = gt.kkt.max();
      for (const auto& m : opt.methods) out.methods.push_back(run_method(m, game, gt.x, opt));
      out.ok = true;
    } catch (const std::exception& e) {
      out.ok = false;
      out.error = e.what();
    }
  }, 1);

  if (rep.successful_seeds() == 0)
    fail(ErrorCode::GenerationFailed, "run_comparison: every seed failed" +
                                          (rep.seeds.empty() ? std::string() : ": " + rep.seeds[0].error));

  // Mean curves, padded with each run's final value.
  for (const auto& m : opt.methods) {
    std::size_t len = 0;
    for (const auto& s : rep.seeds)
      if (s.ok)
        for (const auto& mo : s.methods)
          if (mo.method == m) len = std::max(len, mo.normalized_curve.size());
    std::vector<double> mean(len, 0.0);
    std::size_t count = 0;
    for (const auto& s : rep.seeds) {
      if (!s.ok) continue;
      for (const auto& mo : s.methods) {
        if (mo.method != m) continue;
        ++count;
        for (std::size_t k = 0; k < len; ++k)
          mean[k] += k < mo.normalized_curve.size() ? mo.normalized_curve[k] : mo.normalized_curve.back();
      }
    }
    for (auto& v : mean) v /= static_cast<double>(std::max<std::size_t>(count, 1));
    rep.mean_curve[m] = std::move(mean);
  }

  auto iters_of = [&](const SeedOutcome& s, const std::string& m) -> double {
    for (const auto& mo : s.methods)
      if (mo.method == m)
        return mo.iters_to_tol ? static_cast<double>(*mo.iters_to_tol)
                               : static_cast<double>(opt.max_iters + 1);
    return std::numeric_limits<double>::quiet_NaN();
  };
  const bool both = std::find(opt.methods.begin(), opt.methods.end(), "dr") != opt.methods.end() &&
                    std::find(opt.methods.begin(), opt.methods.end(), "pfb") != opt.methods.end();
  if (both) {
    std::size_t wins = 0;
    std::vector<double> pfb_iters;
    double ratio_sum = 0.0;
    for (const auto& s : rep.seeds) {
      if (!s.ok) continue;
      const double dr = iters_of(s, "dr");
      const double pf = iters_of(s, "pfb");
      if (dr < pf) ++wins;
      pfb_iters.push_back(pf);
      ratio_sum += pf / dr;
    }
    const double ok = static_cast<double>(rep.successful_seeds());
    rep.dr_win_fraction = static_cast<double>(wins) / ok;
    rep.pfb_median_iters = median(pfb_iters);
    rep.speed_ratio = ratio_sum / ok;
  }
  return rep;
}

}  // namespace aggsplit
