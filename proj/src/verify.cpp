#include "aggsplit/verify.hpp"

#include "aggsplit/io.hpp"
#include "aggsplit/rng.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace aggsplit {

BenchmarkParams toy_params() {
  BenchmarkParams p;
  p.N = 5;
  p.n = 3;
  p.q_lo = p.q_hi = 0.0;
  p.qbar_lo = p.qbar_hi = 0.0;
  p.seed = 1;
  return p;
}

GameSpec toy_game() { return generate_benchmark(toy_params()); }

ExtendedPoint random_extended_point(const GameSpec& game, std::uint64_t seed, std::uint64_t stream) {
  const auto& dm = game.dims();
  Rng rng(seed, stream);
  ExtendedPoint w = ExtendedPoint::zeros(dm);
  Vector lo_avg = Vector::Zero(static_cast<Eigen::Index>(dm.n));
  Vector hi_avg = lo_avg;
  for (std::size_t i = 0; i < dm.N; ++i) {
    const Vector lo = game.agent(i).omega.bound_lower();
    const Vector hi = game.agent(i).omega.bound_upper();
    auto xi = GameSpec::block(w.x, i, dm.n);
    for (Eigen::Index h = 0; h < xi.size(); ++h) xi[h] = rng.uniform(lo[h], hi[h]);
    lo_avg += lo / static_cast<double>(dm.N);
    hi_avg += hi / static_cast<double>(dm.N);
  }
  for (Eigen::Index k = 0; k < w.y.size(); ++k) w.y[k] = rng.uniform(-1.0, 1.0);
  for (Eigen::Index h = 0; h < w.sigma.size(); ++h) w.sigma[h] = rng.uniform(lo_avg[h], hi_avg[h]);
  for (Eigen::Index h = 0; h < w.mu.size(); ++h) w.mu[h] = rng.uniform(-1.0, 1.0);
  for (Eigen::Index h = 0; h < w.lambda.size(); ++h) w.lambda[h] = rng.uniform(-1.0, 1.0);
  return w;
}

const std::vector<std::string>& verify_suite_names() {
  static const std::vector<std::string> names{"steps", "resolvents", "skew",
                                              "firm-nonexpansiveness", "trajectory", "kkt"};
  return names;
}

namespace {

CheckResult bound(std::string suite, std::string name, double value, double threshold) {
  CheckResult r;
  r.suite = std::move(suite);
  r.name = std::move(name);
  r.value = value;
  r.threshold = threshold;
  r.passed = value <= threshold;
  return r;
}

CheckResult skip(std::string suite, std::string name, std::string why) {
  CheckResult r;
  r.suite = std::move(suite);
  r.name = std::move(name);
  r.passed = true;
  r.skipped = true;
  r.detail = std::move(why);
  return r;
}

CheckResult failed(std::string suite, std::string name, std::string why) {
  CheckResult r;
  r.suite = std::move(suite);
  r.name = std::move(name);
  r.detail = std::move(why);
  return r;
}

// Largest violation of |Ju - Jv|^2 <= <Ju - Jv, u - v> in the Gamma^{-1} metric.
template <class J>
double firm_violation(const GameSpec& game, const StepSizes& st, const J& res, std::uint64_t seed) {
  const auto& dm = game.dims();
  double worst = -1e300;
  for (std::uint64_t k = 0; k < 100; ++k) {
    const ExtendedPoint u = random_extended_point(game, seed, 2 * k);
    const ExtendedPoint v = random_extended_point(game, seed, 2 * k + 1);
    const ExtendedPoint d = res(u) - res(v);
    const double lhs = gamma_inv_dot(st, dm, d, d);
    const double rhs = gamma_inv_dot(st, dm, d, u - v);
    worst = std::max(worst, lhs - rhs);
  }
  return worst;
}

}  // namespace

std::vector<CheckResult> run_verification(const GameSpec& game, const VerifyOptions& opt) {
  std::vector<std::string> suites = opt.suites.empty() ? verify_suite_names() : opt.suites;
  for (const auto& s : suites)
    if (std::find(verify_suite_names().begin(), verify_suite_names().end(), s) ==
        verify_suite_names().end())
      fail(ErrorCode::InvalidArgument, "unknown verify suite '" + s + "'");
  auto wanted = [&](const char* s) { return std::find(suites.begin(), suites.end(), s) != suites.end(); };

  const auto& dm = game.dims();
  std::vector<CheckResult> out;

  // Every other suite needs usable step sizes.
  std::optional<StepSizes> steps;
  std::string step_error;
  RunConfig config = opt.config;
  try {
    config.steps = StepSizes::uniform_central(dm.N, opt.gamma, opt.alpha, opt.delta_c, opt.beta_c);
    config.check(dm.N);
    steps = config.steps;
  } catch (const Error& e) {
    step_error = e.what();
  }

  if (wanted("steps")) {
    if (!steps) {
      out.push_back(failed("steps", "central parameters in range", step_error));
    } else {
      CheckResult r = bound("steps", "central parameters in range", 0.0, 0.0);
      r.detail = "delta_c < " + format_double(steps->delta_c_upper()) + ", beta_c < " +
                 format_double(steps->beta_c_upper());
      out.push_back(r);
      const double dc = StepSizes::delta_to_central(steps->delta, steps->gamma_hat, dm.N);
      const double bc = StepSizes::beta_to_central(steps->beta, steps->alpha, steps->gamma_hat, dm.N);
      out.push_back(bound("steps", "delta/beta round trip",
                          std::max(std::abs(dc - steps->delta_c), std::abs(bc - steps->beta_c)),
                          1e-12));
    }
  }

  auto need_steps = [&](const char* suite, const char* name) {
    if (steps) return true;
    out.push_back(failed(suite, name, "invalid step sizes: " + step_error));
    return false;
  };

  if (wanted("resolvents") && need_steps("resolvents", "inclusion residuals")) {
    double ra = 0.0, rb = 0.0;
    for (std::uint64_t k = 0; k < 50; ++k) {
      const ExtendedPoint w = random_extended_point(game, opt.seed, 1000 + k);
      ra = std::max(ra, resolvent_A_inclusion_residual(game, *steps, w,
                                                        resolvent_A(game, *steps, w, config.prox_path)));
      rb = std::max(rb, resolvent_B_inclusion_residual(dm, *steps, w, resolvent_B(dm, *steps, w)));
    }
    out.push_back(bound("resolvents", "J_A inclusion (50 points)", ra, 1e-8));
    out.push_back(bound("resolvents", "J_B inclusion (50 points)", rb, 1e-8));
  }

  if (wanted("skew")) {
    double worst_avg = 0.0, worst_sum = 0.0;
    for (std::uint64_t k = 0; k < 100; ++k) {
      const ExtendedPoint w = random_extended_point(game, opt.seed, 2000 + k);
      const double nn = w.dot(w);
      worst_avg = std::max(worst_avg, std::abs(w.dot(apply_S(dm, w, CouplingScale::Average))) / nn);
      worst_sum = std::max(worst_sum, std::abs(w.dot(apply_S(dm, w, CouplingScale::Sum))) / nn);
    }
    out.push_back(bound("skew", "<w, S w> = 0, average scale", worst_avg, 1e-10));
    out.push_back(bound("skew", "<w, S w> = 0, sum scale", worst_sum, 1e-10));
  }

  if (wanted("firm-nonexpansiveness") && need_steps("firm-nonexpansiveness", "resolvents")) {
    const double vb = firm_violation(game, *steps,
                                     [&](const ExtendedPoint& w) { return resolvent_B(dm, *steps, w); },
                                     opt.seed + 17);
    out.push_back(bound("firm-nonexpansiveness", "J_B (100 pairs)", vb, 1e-8));
    const ProbeReport probe = monotonicity_probe(game, 200, opt.seed);
    if (!probe.monotone_on_samples()) {
      out.push_back(skip("firm-nonexpansiveness", "J_A (100 pairs)",
                         "extended operator not monotone on probe samples (min " +
                             format_double(probe.min_normalized) + ")"));
    } else {
      const double va = firm_violation(
          game, *steps,
          [&](const ExtendedPoint& w) { return resolvent_A(game, *steps, w, config.prox_path); },
          opt.seed + 29);
      out.push_back(bound("firm-nonexpansiveness", "J_A (100 pairs)", va, 1e-8));
    }
  }

  if (wanted("trajectory") && need_steps("trajectory", "agent/coordinator loop vs raw DR")) {
    RunConfig cfg = config;
    DrEngine engine(game, cfg);
    ExtendedPoint wt = raw_dr_start(game, *steps, engine.strategies(), engine.coordinator().lambda);
    double dev = 0.0;
    for (int k = 0; k < 50; ++k) {
      engine.step();
      RawDrStep s = raw_dr_step(wt, game, *steps, 1.0, cfg.prox_path);
      dev = std::max(dev, (engine.strategies() - s.half.x).lpNorm<Eigen::Infinity>());
      const ExtendedPoint p = engine.point();
      dev = std::max({dev, (p.sigma - s.full.sigma).lpNorm<Eigen::Infinity>(),
                      (p.mu - s.full.mu).lpNorm<Eigen::Infinity>(),
                      (p.lambda - s.full.lambda).lpNorm<Eigen::Infinity>()});
      wt = std::move(s.next);
    }
    out.push_back(bound("trajectory", "agent/coordinator loop vs raw DR, 50 iterations", dev, 1e-8));
  }

  if (wanted("kkt") && need_steps("kkt", "terminal KKT")) {
    RunConfig cfg = config;
    cfg.stop_rule = StopRule::Residual;
    cfg.stop_tol = 1e-10;
    cfg.record_every = cfg.max_iters;
    RunResult res;
    try {
      res = run_dr(game, cfg);
    } catch (const MaxItersExceeded& e) {
      res = e.result();
    }
    const KktResidual r = kkt_residual(game, res.final_point);
    CheckResult c = bound("kkt", "terminal KKT residual", r.max(), 1e-6);
    c.detail = std::to_string(res.iterations) + " iterations";
    out.push_back(c);
    out.push_back(bound("kkt", "VI natural residual", gae_vi_residual(game, res.final_point.x), 1e-5));
  }
  return out;
}

bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });
}

std::string format_verification(const std::vector<CheckResult>& results) {
  std::ostringstream os;
  char line[512];
  std::snprintf(line, sizeof line, "%-22s %-40s %-6s %-12s %-12s %s\n", "suite", "check", "result",
                "value", "threshold", "detail");
  os << line;
  for (const auto& r : results) {
    const char* verdict = r.skipped ? "skip" : (r.passed ? "pass" : "FAIL");
    std::snprintf(line, sizeof line, "%-22s %-40s %-6s %-12.3e %-12.3e %s\n", r.suite.c_str(),
                  r.name.c_str(), verdict, r.value, r.threshold, r.detail.c_str());
    os << line;
  }
  return os.str();
}

}  // namespace aggsplit
