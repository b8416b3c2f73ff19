#include "aggsplit/projection.hpp"
#include "aggsplit/resolvents.hpp"
#include "aggsplit/verify.hpp"

#include "helpers.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace aggsplit;
using namespace testing_util;

namespace {

StepSizes mixed_steps(std::size_t N) {
  std::vector<double> g(N);
  for (std::size_t i = 0; i < N; ++i) g[i] = 0.5 + 0.25 * static_cast<double>(i % 3);
  return StepSizes::from_raw(std::move(g), 0.8, 1.3, 0.7);
}

}  // namespace

TEST_CASE("J_B on the scalar example") {
  const Dimensions one{1, 1, 1};
  const StepSizes s = StepSizes::from_raw({1.0}, 1.0, 1.0, 1.0);
  const ExtendedPoint out = resolvent_B(one, s, ExtendedPoint::unflatten(one, vec({1, 1, 0, 0, 0})));
  CHECK(out.mu[0] == doctest::Approx(-1.0 / 3).epsilon(1e-15));
  CHECK(out.lambda[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(out.x[0] == doctest::Approx(2.0 / 3).epsilon(1e-15));
  CHECK(out.y[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(out.sigma[0] == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(resolvent_B(one, s, ExtendedPoint::zeros(one)).flatten().isZero(0.0));
}

TEST_CASE("J_B matches the dense complementarity solve") {
  const GameSpec g = small_benchmark(5, 3, 4);
  const auto& dm = g.dims();
  const StepSizes s = mixed_steps(5);
  double worst = 0.0, incl = 0.0;
  for (std::uint64_t k = 0; k < 50; ++k) {
    const ExtendedPoint w = random_extended_point(g, 17, k);
    const ExtendedPoint got = resolvent_B(dm, s, w);
    const ExtendedPoint ref = oracle::resolvent_B_dense(dm, s.gamma, s.alpha, s.beta, s.delta, w);
    worst = std::max(worst, got.max_abs_diff(ref));
    incl = std::max(incl, resolvent_B_inclusion_residual(dm, s, w, got));
  }
  CHECK(worst <= 1e-10);
  CHECK(incl <= 1e-10);
}

TEST_CASE("J_B is affine while the multiplier stays positive") {
  const GameSpec g = small_benchmark(4, 3, 2);
  const auto& dm = g.dims();
  const StepSizes s = mixed_steps(4);
  for (std::uint64_t k = 0; k < 20; ++k) {
    ExtendedPoint w1 = random_extended_point(g, 3, k), w2 = random_extended_point(g, 4, k);
    w1.lambda.array() += 10.0;
    w2.lambda.array() += 10.0;
    const double t = 0.3;
    const ExtendedPoint mix = t * w1 + (1 - t) * w2;
    const ExtendedPoint lhs = resolvent_B(dm, s, mix);
    const ExtendedPoint rhs = t * resolvent_B(dm, s, w1) + (1 - t) * resolvent_B(dm, s, w2);
    CHECK(resolvent_B(dm, s, w1).lambda.minCoeff() > 0.0);
    CHECK(lhs.max_abs_diff(rhs) <= 1e-10);
  }
}

TEST_CASE("J_A against the QP oracle, fast path") {
  const GameSpec g = small_benchmark(5, 3, 6);
  const auto& dm = g.dims();
  const StepSizes s = mixed_steps(5);
  for (std::uint64_t k = 0; k < 30; ++k) {
    const ExtendedPoint w = random_extended_point(g, 8, k);
    const ExtendedPoint out = resolvent_A(g, s, w);
    CHECK(out.sigma == w.sigma);
    CHECK(out.mu == w.mu);
    CHECK(out.lambda == w.lambda);
    for (std::size_t i = 0; i < dm.N; ++i) {
      const auto& ag = g.agent(i);
      const Vector xi = GameSpec::block(w.x, i, 3), yi = GameSpec::block(w.y, i, 3);
      // min f(v, sigma) + 1/(2g)|v - x|^2 + 1/(2g)|A v - b - y|^2
      const Matrix metric = (Matrix::Identity(3, 3) + ag.A.transpose() * ag.A) / s.gamma[i];
      const Vector lin = ag.A.transpose() * (ag.A * xi - ag.b - yi) / s.gamma[i];
      const Vector ref = oracle::quadratic_prox(ag, w.sigma, lin, xi, metric);
      const Vector xp = GameSpec::block(out.x, i, 3);
      CHECK((xp - ref).lpNorm<Eigen::Infinity>() <= 1e-10);
      CHECK(GameSpec::block(out.y, i, 3) == Vector(ag.A * xp - ag.b));
    }
    CHECK(resolvent_A_inclusion_residual(g, s, w, out) <= 1e-10);
  }
}

TEST_CASE("J_A against the QP oracle, dense coupling matrices") {
  const GameSpec g = dense_toy();
  const auto& dm = g.dims();
  const StepSizes s = StepSizes::from_raw({0.7, 1.1}, 1.0, 1.0, 1.0);
  for (std::uint64_t k = 0; k < 20; ++k) {
    const ExtendedPoint w = random_extended_point(g, 2, k);
    const ExtendedPoint out = resolvent_A(g, s, w);
    for (std::size_t i = 0; i < dm.N; ++i) {
      const auto& ag = g.agent(i);
      const Vector xi = GameSpec::block(w.x, i, 3), yi = GameSpec::block(w.y, i, 2);
      const Matrix metric = (Matrix::Identity(3, 3) + ag.A.transpose() * ag.A) / s.gamma[i];
      const Vector lin = ag.A.transpose() * (ag.A * xi - ag.b - yi) / s.gamma[i];
      const Vector ref = oracle::quadratic_prox(ag, w.sigma, lin, xi, metric);
      CHECK((GameSpec::block(out.x, i, 3) - ref).lpNorm<Eigen::Infinity>() <= 1e-8);
    }
    CHECK(resolvent_A_inclusion_residual(g, s, w, out) <= 1e-8);
  }
}

TEST_CASE("J_A fixes a zero of the A block") {
  const GameSpec g = small_benchmark(3, 4, 5, false);
  const auto& dm = g.dims();
  ExtendedPoint w = random_extended_point(g, 1, 1);
  for (std::size_t i = 0; i < dm.N; ++i) {
    const auto& ag = g.agent(i);
    GameSpec::block(w.x, i, dm.n) = ag.cost.as_quadratic()->target;
    GameSpec::block(w.y, i, dm.m) = ag.A * ag.cost.as_quadratic()->target - ag.b;
  }
  const ExtendedPoint out = resolvent_A(g, StepSizes::from_raw({1, 2, 0.5}, 1, 1, 1), w);
  CHECK(out.max_abs_diff(w) <= 1e-12);
}

TEST_CASE("local prox: singleton set and fast versus generic path") {
  const AgentSpec single = quad_agent(vec({1}), 1.0, 3.0, vec({-4}), mat(1, 1, {2}), mat(1, 1, {1}), vec({0}));
  ProxProblem p;
  p.sigma = vec({5});
  p.linear = vec({-2});
  p.center = vec({0.2});
  p.metric = mat(1, 1, {1});
  CHECK(local_prox(single, p)[0] == 1.0);

  const AgentSpec ag = quad_agent(vec({1, 1}), 1.0, 1.0, vec({0, 0}), Matrix::Zero(2, 2), Matrix::Identity(2, 2),
                                  vec({0, 0}));
  Rng rng(4, 0);
  for (int t = 0; t < 50; ++t) {
    ProxProblem q;
    q.sigma = vec({0, 0});
    q.linear = vec({0, 0});
    q.center = vec({rng.uniform(-2, 3), rng.uniform(-2, 3)});
    q.metric = Matrix::Identity(2, 2);
    const Vector fast = local_prox(ag, q);
    const Vector gen = local_prox(ag, q, ProxPath::Generic);
    // 1/2|z|^2 + 1/2|z - c|^2 is minimized at the projection of c/2
    CHECK((fast - project_box_simplex(q.center / 2.0, vec({1, 1}), 1.0)).norm() <= 1e-14);
    CHECK((fast - gen).norm() <= 1e-8);
    CHECK(prox_natural_residual(ag, q, gen) <= 1e-10);
  }
}

TEST_CASE("generic J_A path agrees with the fast path") {
  const GameSpec g = small_benchmark(4, 3, 9);
  const StepSizes s = StepSizes::uniform_central(4, 1.0, 1.0, 0.5, 0.5);
  for (std::uint64_t k = 0; k < 10; ++k) {
    const ExtendedPoint w = random_extended_point(g, 12, k);
    CHECK(resolvent_A(g, s, w).max_abs_diff(resolvent_A(g, s, w, ProxPath::Generic)) <= 1e-8);
  }
}

TEST_CASE("step-size intervals") {
  const std::size_t N = 10;
  const double gh = 1.0, alpha = 1.0;
  CHECK_THROWS_AS(StepSizes::uniform_central(N, 1.0, alpha, 1.0 / gh, 0.5), Error);
  CHECK_THROWS_AS(StepSizes::uniform_central(N, 1.0, alpha, 0.5, 1.0 / (alpha + gh / N)), Error);
  CHECK_THROWS_AS(StepSizes::uniform_central(N, 1.0, alpha, 0.0, 0.5), Error);
  CHECK_NOTHROW(StepSizes::uniform_central(N, 1.0, alpha, 0.999 / gh, 0.5));
  CHECK_NOTHROW(StepSizes::uniform_central(N, 1.0, alpha, 0.5, 0.999 / (alpha + gh / N)));
  try {
    StepSizes::uniform_central(N, 1.0, alpha, 1.0, 0.5);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidStepSizes);
  }
  CHECK_THROWS_AS(StepSizes::from_raw({1.0, -1.0}, 1, 1, 1), Error);
}

TEST_CASE("step-size round trip") {
  Rng rng(5, 5);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t N = 1 + static_cast<std::size_t>(rng.uniform() * 200);
    const double gh = rng.uniform(0.1, 5), alpha = rng.uniform(0.1, 5);
    const double dc = rng.uniform(0.01, 0.99) / gh;
    const double bc = rng.uniform(0.01, 0.99) / (alpha + gh / static_cast<double>(N));
    const double d = StepSizes::delta_from_central(dc, gh, N);
    const double b = StepSizes::beta_from_central(bc, alpha, gh, N);
    worst = std::max(worst, std::abs(StepSizes::delta_to_central(d, gh, N) - dc) / dc);
    worst = std::max(worst, std::abs(StepSizes::beta_to_central(b, alpha, gh, N) - bc) / bc);
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("reflect") {
  const GameSpec g = small_benchmark(3, 3, 3);
  const auto& dm = g.dims();
  const StepSizes s = mixed_steps(3);
  const ExtendedPoint w = random_extended_point(g, 1, 0);
  const auto id = [](const ExtendedPoint& v) { return v; };
  CHECK(reflect(id, w).max_abs_diff(w) == 0.0);
  const auto JB = [&](const ExtendedPoint& v) { return resolvent_B(dm, s, v); };
  CHECK(reflect(JB, ExtendedPoint::zeros(dm)).flatten().isZero(0.0));
  const ExtendedPoint r = reflect(JB, w);
  CHECK(r.max_abs_diff(2.0 * resolvent_B(dm, s, w) - w) <= 1e-15);
}

TEST_CASE("both resolvents are firmly nonexpansive in the Gamma^-1 metric") {
  const GameSpec g = toy_game();
  const auto& dm = g.dims();
  const StepSizes s = StepSizes::uniform_central(dm.N, 1.0, 1.0, 0.5, 0.5);
  double worst_a = -1e300, worst_b = -1e300;
  for (std::uint64_t k = 0; k < 100; ++k) {
    const ExtendedPoint w1 = random_extended_point(g, 31, k), w2 = random_extended_point(g, 32, k);
    const ExtendedPoint da = resolvent_A(g, s, w1) - resolvent_A(g, s, w2);
    const ExtendedPoint db = resolvent_B(dm, s, w1) - resolvent_B(dm, s, w2);
    const ExtendedPoint dw = w1 - w2;
    worst_a = std::max(worst_a, gamma_inv_dot(s, dm, da, da) - gamma_inv_dot(s, dm, da, dw));
    worst_b = std::max(worst_b, gamma_inv_dot(s, dm, db, db) - gamma_inv_dot(s, dm, db, dw));
  }
  CHECK(worst_a <= 1e-8);
  CHECK(worst_b <= 1e-8);
}
