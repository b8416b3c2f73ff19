#pragma once

#include "aggsplit/benchmark.hpp"
#include "aggsplit/rng.hpp"

#include <initializer_list>
#include <vector>

namespace testing_util {

using namespace aggsplit;

inline Vector vec(std::initializer_list<double> v) {
  Vector r(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) r[i++] = x;
  return r;
}

inline Matrix mat(Eigen::Index rows, Eigen::Index cols, std::initializer_list<double> v) {
  Matrix M(rows, cols);
  auto it = v.begin();
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) M(r, c) = *it++;
  return M;
}

inline AgentSpec quad_agent(Vector upper, double total, double a, Vector target, Matrix Q, Matrix A,
                            Vector b) {
  return AgentSpec{LocalSet::box_simplex(std::move(upper), total),
                   CostModel::quadratic(a, std::move(target), std::move(Q)), std::move(A),
                   std::move(b)};
}

/// Benchmark-shaped game with chosen sizes and Q scaled by q_scale.
inline GameSpec small_benchmark(std::size_t N, std::size_t n, std::uint64_t seed, bool with_Q = true) {
  BenchmarkParams p;
  p.N = N;
  p.n = n;
  p.seed = seed;
  if (!with_Q) p.q_lo = p.q_hi = p.qbar_lo = p.qbar_hi = 0.0;
  return generate_benchmark(p);
}

/// Two agents, n = 3, m = 2, non-diagonal A_i and a nonsymmetric Q_i.
inline GameSpec dense_toy() {
  std::vector<AgentSpec> agents;
  agents.push_back(quad_agent(vec({1.0, 0.8, 0.6}), 1.0, 1.5, vec({0.7, 0.2, 0.1}),
                              mat(3, 3, {0.3, 0.05, 0.0, 0.02, 0.2, 0.01, 0.0, 0.04, 0.25}),
                              mat(2, 3, {1.0, 0.5, 0.0, 0.0, 1.2, 0.3}), vec({0.4, 0.3})));
  agents.push_back(quad_agent(vec({0.9, 0.9, 0.9}), 1.0, 1.2, vec({0.1, 0.1, 0.8}),
                              mat(3, 3, {0.25, 0.0, 0.03, 0.01, 0.35, 0.0, 0.02, 0.0, 0.2}),
                              mat(2, 3, {0.8, 0.0, 0.4, 0.2, 1.0, 0.0}), vec({0.35, 0.4})));
  return GameSpec(Dimensions{2, 3, 2}, std::move(agents));
}

inline std::vector<double> uniform_gamma(std::size_t N, double g) { return std::vector<double>(N, g); }

}  // namespace testing_util
