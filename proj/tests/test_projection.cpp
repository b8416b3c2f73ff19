#include "aggsplit/projection.hpp"
#include "aggsplit/rng.hpp"

#include "helpers.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace aggsplit;
using testing_util::vec;

TEST_CASE("feasible point is returned unchanged") {
  CHECK(project_box_simplex(vec({0.5, 0.5}), vec({1, 1}), 1.0) == vec({0.5, 0.5}));
}

TEST_CASE("point beyond a corner lands on the corner") {
  CHECK(project_box_simplex(vec({2, 0}), vec({1, 1}), 1.0) == vec({1, 0}));
}

TEST_CASE("symmetric overshoot splits evenly") {
  CHECK(project_box_simplex(vec({0.9, 0.9}), vec({1, 1}), 1.0) == vec({0.5, 0.5}));
}

TEST_CASE("empty set is reported") {
  CHECK_THROWS_AS(project_box_simplex(vec({0, 0}), vec({0.3, 0.3}), 1.0), Error);
  try {
    project_box_simplex(vec({0, 0}), vec({0.3, 0.3}), 1.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptySet);
  }
}

TEST_CASE("degenerate sets") {
  // total equals the sum of the bounds: only the upper corner is feasible
  CHECK(project_box_simplex(vec({-3, 7, 0.2}), vec({0.2, 0.3, 0.5}), 1.0) == vec({0.2, 0.3, 0.5}));
  CHECK(project_box_simplex(vec({4, -1}), vec({1, 1}), 0.0) == vec({0, 0}));
  CHECK(project_box_simplex(vec({0.1}), vec({2}), 1.5) == vec({1.5}));
}

TEST_CASE("weighted projection matches active-set enumeration") {
  Rng rng(42, 0);
  double worst = 0.0;
  for (int t = 0; t < 2000; ++t) {
    const int n = 1 + static_cast<int>(rng.uniform() * 5.0);
    Vector u(n), w(n), v(n);
    for (int j = 0; j < n; ++j) {
      u[j] = rng.uniform(0.05, 1.5);
      w[j] = rng.uniform(0.1, 10.0);
      v[j] = rng.uniform(-2.0, 3.0);
    }
    const double total = rng.uniform(0.0, u.sum());
    const Vector got = project_box_simplex(v, u, total, w);
    const Vector ref = oracle::project_box_simplex(v, u, total, w);
    worst = std::max(worst, (got - ref).lpNorm<Eigen::Infinity>());
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("projection is idempotent and feasible") {
  Rng rng(7, 1);
  for (int t = 0; t < 200; ++t) {
    Vector u(6), v(6);
    for (int j = 0; j < 6; ++j) {
      u[j] = rng.uniform(0.1, 1.0);
      v[j] = rng.uniform(-5.0, 5.0);
    }
    const double total = 0.7 * u.sum();
    const Vector p = project_box_simplex(v, u, total);
    CHECK(std::abs(p.sum() - total) <= 1e-12);
    CHECK(p.minCoeff() >= 0.0);
    CHECK((u - p).minCoeff() >= 0.0);
    CHECK((project_box_simplex(p, u, total) - p).lpNorm<Eigen::Infinity>() <= 1e-14);
  }
}
