#include "aggsplit/benchmark.hpp"
#include "aggsplit/engine.hpp"
#include "aggsplit/io.hpp"
#include "aggsplit/verify.hpp"

#include "helpers.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <sstream>

using namespace aggsplit;
using namespace testing_util;

namespace {

std::string trace_text(const RunResult& r) {
  std::ostringstream os;
  write_trace_csv(os, r.trace);
  return os.str();
}

RunConfig config_for(const GameSpec& g, double tol, std::size_t iters) {
  RunConfig c = RunConfig::defaults(g.size());
  c.stop_tol = tol;
  c.max_iters = iters;
  return c;
}

}  // namespace

TEST_CASE("coordinator update examples") {
  CentralSteps st{1.0, 0.5, 0.5};
  CoordinatorState c = coordinator_init({vec({0.3}), vec({0.1})}, vec({0.1}));
  CHECK(c.sigma == vec({0.3}));
  CHECK(c.mu == vec({0}));
  auto [next, b] = coordinator_update(c, {vec({0.3}), vec({0.2})}, st);
  CHECK(next.lambda[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(b.lambda == next.lambda);

  // nonpositive reflected aggregate with lambda = 0 keeps lambda at 0
  CoordinatorState z = coordinator_init({vec({0.3}), vec({0.4})}, vec({0}));
  CHECK(coordinator_update(z, {vec({0.3}), vec({-0.1})}, st).first.lambda[0] == 0.0);

  // 2 xhat+ - xhat = sigma with mu = 0 is a consensus fixed point
  CoordinatorState f = coordinator_init({vec({0.2, 0.4}), vec({0})}, vec({0}));
  auto [fn, fb] = coordinator_update(f, {vec({0.2, 0.4}), vec({0})}, st);
  CHECK(fn.mu == vec({0, 0}));
  CHECK(fn.sigma == f.sigma);

  CHECK_THROWS_AS(coordinator_init({vec({0}), vec({0})}, vec({-1})), Error);
}

TEST_CASE("agent update matches the QP oracle and keeps y linked") {
  const GameSpec g = dense_toy();
  Rng rng(1, 2);
  for (int t = 0; t < 20; ++t) {
    for (std::size_t i = 0; i < 2; ++i) {
      const auto& ag = g.agent(i);
      AgentState s{ag.omega.project(vec({rng.uniform(), rng.uniform(), rng.uniform()})), Vector()};
      s.y = ag.A * s.x - ag.b;
      BroadcastMessage b{vec({rng.uniform(0, 1), rng.uniform(0, 1)}), vec({rng.uniform(-1, 1), 0.2, -0.1}),
                         vec({0.3, 0.3, 0.4})};
      const double gamma = 0.8;
      const AgentState out = agent_update(ag, s, b, gamma, 2);
      const Matrix metric = (Matrix::Identity(3, 3) + ag.A.transpose() * ag.A) / gamma;
      const Vector ref =
          oracle::quadratic_prox(ag, b.sigma, ag.A.transpose() * b.lambda - b.mu / 2.0, s.x, metric);
      CHECK((out.x - ref).lpNorm<Eigen::Infinity>() <= 1e-8);
      CHECK(out.y == Vector(ag.A * out.x - ag.b));
    }
  }
}

TEST_CASE("agent update on a singleton set") {
  const AgentSpec ag = quad_agent(vec({1}), 1.0, 2.0, vec({0}), mat(1, 1, {1}), mat(1, 1, {3}), vec({1}));
  const AgentState out =
      agent_update(ag, AgentState{vec({1}), vec({0})}, BroadcastMessage{vec({4}), vec({-2}), vec({7})}, 1.0, 3);
  CHECK(out.x == vec({1}));
  CHECK(out.y == vec({2}));
}

TEST_CASE("engine reproduces the straight-line reference") {
  for (const GameSpec& g : {dense_toy(), small_benchmark(6, 4, 3)}) {
    const auto& dm = g.dims();
    RunConfig cfg = RunConfig::defaults(dm.N);
    cfg.steps = StepSizes::from_central(std::vector<double>(dm.N, 0.9), 1.2, 0.4, 0.3);
    const Vector x0 = default_start(g);
    const auto ref = oracle::agent_loop(g, cfg.steps.gamma, 1.2, 0.4, 0.3, x0, 40);
    DrEngine eng(g, cfg, x0);
    double worst = 0.0;
    for (int k = 0; k < 40; ++k) {
      eng.step();
      worst = std::max(worst, (eng.strategies() - ref.x[k]).lpNorm<Eigen::Infinity>());
      worst = std::max(worst, (eng.coordinator().sigma - ref.sigma[k]).lpNorm<Eigen::Infinity>());
      worst = std::max(worst, (eng.coordinator().mu - ref.mu[k]).lpNorm<Eigen::Infinity>());
      worst = std::max(worst, (eng.coordinator().lambda - ref.lambda[k]).lpNorm<Eigen::Infinity>());
      for (std::size_t i = 0; i < dm.N; ++i) {
        const auto& a = eng.agents()[i];
        CHECK((a.y - (g.agent(i).A * a.x - g.agent(i).b)).lpNorm<Eigen::Infinity>() <= 1e-12);
      }
      CHECK(eng.coordinator().lambda.minCoeff() >= 0.0);
    }
    CHECK(worst <= 1e-8);
  }
}

TEST_CASE("raw DR iteration follows the agent loop under the stated mapping") {
  const GameSpec g = small_benchmark(5, 3, 7);
  const StepSizes s = StepSizes::uniform_central(5, 1.0, 1.0, 0.5, 0.5);
  const Vector x0 = default_start(g);
  const auto ref = oracle::agent_loop(g, s.gamma, 1.0, 0.5, 0.5, x0, 50);
  ExtendedPoint wt = raw_dr_start(g, s, x0, Vector::Zero(3));
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const RawDrStep st = raw_dr_step(wt, g, s, 1.0);
    worst = std::max(worst, (st.half.x - ref.x[k]).lpNorm<Eigen::Infinity>());
    worst = std::max(worst, (st.full.sigma - ref.sigma[k]).lpNorm<Eigen::Infinity>());
    worst = std::max(worst, (st.full.mu - ref.mu[k]).lpNorm<Eigen::Infinity>());
    worst = std::max(worst, (st.full.lambda - ref.lambda[k]).lpNorm<Eigen::Infinity>());
    wt = st.next;
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("zero relaxation leaves the raw iterate in place") {
  const GameSpec g = small_benchmark(4, 3, 1);
  const StepSizes s = StepSizes::uniform_central(4, 1.0, 1.0, 0.5, 0.5);
  const ExtendedPoint wt = random_extended_point(g, 2, 2);
  CHECK(raw_dr_step(wt, g, s, 0.0).next.max_abs_diff(wt) == 0.0);
}

TEST_CASE("raw fixed point and monotone step norms on a monotone instance") {
  const GameSpec g = toy_game();
  const auto& dm = g.dims();
  const StepSizes s = StepSizes::uniform_central(dm.N, 1.0, 1.0, 0.5, 0.5);
  ExtendedPoint wt = raw_dr_start(g, s, default_start(g), Vector::Zero(3));
  double prev = 1e300;
  bool nonincreasing = true;
  for (int k = 0; k < 3000; ++k) {
    RawDrStep st = raw_dr_step(wt, g, s, 1.0);
    const double d = gamma_inv_norm(s, dm, st.next - wt);
    if (d > prev + 1e-10) nonincreasing = false;
    prev = d;
    wt = st.next;
  }
  CHECK(nonincreasing);
  CHECK(prev <= 1e-12);
  CHECK(raw_dr_step(wt, g, s, 1.0).next.max_abs_diff(wt) <= 1e-10);
}

TEST_CASE("one step from the equilibrium stays there") {
  const GameSpec g = small_benchmark(20, 4, 11);
  const GroundTruth gt = ground_truth(g, GroundTruthOptions{});
  DrEngine eng(g, RunConfig::defaults(20), gt.x, gt.point.lambda);
  eng.step();
  const ExtendedPoint p = eng.point();
  CHECK((p.x - gt.x).lpNorm<Eigen::Infinity>() <= 1e-8);
  CHECK((p.sigma - gt.point.sigma).lpNorm<Eigen::Infinity>() <= 1e-8);
  CHECK(p.mu.lpNorm<Eigen::Infinity>() <= 1e-8);
  CHECK((p.lambda - gt.point.lambda).lpNorm<Eigen::Infinity>() <= 1e-8);
}

TEST_CASE("runs are deterministic") {
  const GameSpec g = small_benchmark(30, 5, 2);
  const RunConfig cfg = config_for(g, 1e-8, 100000);
  CHECK(trace_text(run_dr(g, cfg)) == trace_text(run_dr(g, cfg)));
  CHECK(trace_text(run_pfb(g, cfg)) == trace_text(run_pfb(g, cfg)));
}

TEST_CASE("max iterations carries the partial run") {
  const GameSpec g = small_benchmark(10, 3, 2);
  RunConfig cfg = config_for(g, 1e-12, 1);
  try {
    run_dr(g, cfg);
    FAIL("expected MaxItersExceeded");
  } catch (const MaxItersExceeded& e) {
    CHECK(e.code() == ErrorCode::MaxItersExceeded);
    CHECK(e.result().trace.rows.size() == 1);
    CHECK(e.result().iterations == 1);
    CHECK_FALSE(e.result().converged);
  }
}

TEST_CASE("benchmark run converges with consensus and slackness") {
  const GameSpec g = small_benchmark(50, 5, 1);
  const double tol = 1e-8;
  const RunResult r = run_dr(g, config_for(g, tol, 100000));
  CHECK(r.converged);
  const KktResidual k = kkt_residual(g, r.final_point);
  CHECK(k.stationarity <= 1e-5);
  CHECK(k.consensus <= 10 * tol);
  CHECK(r.final_point.mu.lpNorm<Eigen::Infinity>() <= 10 * tol);
  CHECK(k.complementarity <= 10 * tol * (1 + r.final_point.lambda.norm()));
  for (std::size_t i = 1; i < r.trace.rows.size(); ++i) CHECK(r.trace.rows[i].iter > r.trace.rows[i - 1].iter);
}

TEST_CASE("strongly monotone toy converges quickly") {
  std::vector<AgentSpec> agents;
  agents.push_back(quad_agent(vec({1, 1}), 1.0, 2.0, vec({1, 0}), mat(2, 2, {0.5, 0, 0, 0.5}), Matrix::Identity(2, 2),
                              vec({0.6, 0.6})));
  agents.push_back(quad_agent(vec({1, 1}), 1.0, 1.5, vec({1, 0}), mat(2, 2, {0.3, 0, 0, 0.3}), Matrix::Identity(2, 2),
                              vec({0.6, 0.6})));
  const GameSpec g(Dimensions{2, 2, 2}, std::move(agents));
  CHECK(validate_game(g).ok());
  const RunResult r = run_dr(g, config_for(g, 1e-8, 500));
  CHECK(r.converged);
  CHECK(r.iterations < 500);
}

TEST_CASE("baseline reaches the decoupled solution when coupling is slack") {
  std::vector<AgentSpec> agents;
  for (int i = 0; i < 3; ++i)
    agents.push_back(quad_agent(vec({1, 1, 1}), 1.0, 1.0 + i, vec({0.5, 0.3, 0.2}), Matrix::Zero(3, 3),
                                Matrix::Identity(3, 3), vec({5, 5, 5})));
  const GameSpec g(Dimensions{3, 3, 3}, std::move(agents));
  const RunResult r = run_pfb(g, config_for(g, 1e-12, 100000));
  for (std::size_t i = 0; i < 3; ++i)
    CHECK((GameSpec::block(r.final_point.x, i, 3) - vec({0.5, 0.3, 0.2})).lpNorm<Eigen::Infinity>() <= 1e-9);
  CHECK(r.final_point.lambda.isZero(0.0));
}

TEST_CASE("DR and the baseline agree on a benchmark") {
  const GameSpec g = small_benchmark(40, 5, 6);
  const RunResult dr = run_dr(g, config_for(g, 1e-10, 200000));
  const RunResult pfb = run_pfb(g, config_for(g, 1e-10, 200000));
  CHECK((dr.final_point.x - pfb.final_point.x).lpNorm<Eigen::Infinity>() <= 1e-4);
}

TEST_CASE("invalid configuration and start points") {
  const GameSpec g = small_benchmark(5, 3, 1);
  CHECK_THROWS_AS(StepSizes::uniform_central(5, 1.0, 1.0, 1.0, 0.5), Error);
  RunConfig cfg = RunConfig::defaults(5);
  cfg.relaxation = 2.0;
  CHECK_THROWS_AS(run_dr(g, cfg), Error);
  cfg = RunConfig::defaults(4);
  CHECK_THROWS_AS(DrEngine(g, cfg), Error);

  Vector x0 = Vector::Constant(15, 5.0);
  DrEngine eng(g, RunConfig::defaults(5), x0);
  CHECK(eng.x0_projected());
  for (std::size_t i = 0; i < 5; ++i) CHECK(g.agent(i).omega.contains(GameSpec::block(eng.strategies(), i, 3)));
  CHECK_FALSE(DrEngine(g, RunConfig::defaults(5)).x0_projected());
}

TEST_CASE("uplink carries n + m numbers") {
  const GameSpec g = small_benchmark(12, 4, 1);
  DrEngine eng(g, RunConfig::defaults(12));
  for (int k = 0; k < 5; ++k) {
    eng.step();
    CHECK(eng.last_uplink().payload_size() == 4 + 4);
  }
}
