#pragma once

#include "aggsplit/common.hpp"

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace aggsplit {

/// Problem sizes. The extended space stacks (x, y, sigma, mu, lambda).
struct Dimensions {
  std::size_t N = 1;  ///< agents
  std::size_t n = 1;  ///< per-agent decision dimension
  std::size_t m = 1;  ///< coupling-constraint rows

  std::size_t d() const { return n * N + m * N + 2 * n + m; }
  std::size_t d1() const { return d() - n * N; }
  std::size_t d2() const { return d1() - m * N; }
  std::size_t d3() const { return d() - m; }

  void check() const;
  bool operator==(const Dimensions&) const = default;
};

/// {x | 0 <= x <= upper, sum(x) = total}
struct BoxSimplex {
  Vector upper;
  double total = 1.0;
};

/// Arbitrary compact convex set given by a projection oracle under a
/// diagonal metric, plus a bounding box used for sampling.
struct GenericConvex {
  std::function<Vector(const Vector& v, const Vector& weights)> project;
  Vector lower;
  Vector upper;
};

class LocalSet {
 public:
  /// Throws EmptyLocalSet when sum(upper) < total or total < 0.
  static LocalSet box_simplex(Vector upper, double total);
  static LocalSet generic(GenericConvex set);

  Eigen::Index dim() const;
  Vector project(const Vector& v) const;
  Vector project(const Vector& v, const Vector& weights) const;
  bool contains(const Vector& x, double tol = 1e-9) const;

  /// Deterministic point of the set used as a starting guess.
  Vector center() const;
  Vector bound_lower() const;
  Vector bound_upper() const;

  const BoxSimplex* as_box_simplex() const { return std::get_if<BoxSimplex>(&set_); }

 private:
  explicit LocalSet(std::variant<BoxSimplex, GenericConvex> s) : set_(std::move(s)) {}
  std::variant<BoxSimplex, GenericConvex> set_;
};

/// f_i(x_i, sigma) = 1/2 a |x_i - target|^2 + (Q sigma)^T x_i
struct QuadraticAgg {
  double a = 1.0;
  Vector target;
  Matrix Q;
};

/// Oracle cost. grad_x is required by every solver path; grad_sigma only by
/// the full pseudo-gradient and the epsilon-Nash gap.
struct GenericSmooth {
  std::function<double(const Vector& x, const Vector& sigma)> value;
  std::function<Vector(const Vector& x, const Vector& sigma)> grad_x;
  std::function<Vector(const Vector& x, const Vector& sigma)> grad_sigma;
  /// Lipschitz constant of grad_x in its first argument.
  double curvature_bound = 1.0;
};

class CostModel {
 public:
  static CostModel quadratic(double a, Vector target, Matrix Q);
  static CostModel generic(GenericSmooth cost);

  double value(const Vector& x, const Vector& sigma) const;
  /// Partial gradient in the first argument; NonSmoothCost if absent.
  Vector grad_x(const Vector& x, const Vector& sigma) const;
  /// Partial gradient in the aggregate argument; NonSmoothCost if absent.
  Vector grad_sigma(const Vector& x, const Vector& sigma) const;
  double curvature_bound() const;

  const QuadraticAgg* as_quadratic() const { return std::get_if<QuadraticAgg>(&cost_); }

 private:
  explicit CostModel(std::variant<QuadraticAgg, GenericSmooth> c) : cost_(std::move(c)) {}
  std::variant<QuadraticAgg, GenericSmooth> cost_;
};

struct AgentSpec {
  LocalSet omega;
  CostModel cost;
  Matrix A;  ///< m x n
  Vector b;  ///< m
};

/// Immutable N-agent game. A = [A_1 ... A_N], b = sum_i b_i.
class GameSpec {
 public:
  GameSpec(Dimensions dims, std::vector<AgentSpec> agents);

  const Dimensions& dims() const { return dims_; }
  std::size_t size() const { return agents_.size(); }
  const AgentSpec& agent(std::size_t i) const { return agents_[i]; }
  const std::vector<AgentSpec>& agents() const { return agents_; }
  const Vector& b() const { return b_; }

  /// Block i of a stacked vector with block size n.
  static auto block(const Vector& v, std::size_t i, std::size_t n) {
    return v.segment(static_cast<Eigen::Index>(i * n), static_cast<Eigen::Index>(n));
  }
  static auto block(Vector& v, std::size_t i, std::size_t n) {
    return v.segment(static_cast<Eigen::Index>(i * n), static_cast<Eigen::Index>(n));
  }

 private:
  Dimensions dims_;
  std::vector<AgentSpec> agents_;
  Vector b_;
};

/// M_n x: mean of the N blocks of length n, summed in agent order.
Vector average(const Vector& x, std::size_t n);

/// A x - b.
Vector coupling_residual(const GameSpec& game, const Vector& x);

/// max(A x - b, 0) componentwise.
Vector coupling_violation(const GameSpec& game, const Vector& x);

/// (x_i, A_i x_i - b_i) in C_i.
bool in_local_constraint(const AgentSpec& agent, const Vector& xi, const Vector& yi,
                         double tol = 1e-9);

struct ValidationReport {
  bool dimensions_ok = true;
  std::vector<bool> local_set_nonempty;
  /// max over agents of the relative gradient error vs central differences
  double gradient_fd_error = 0.0;
  bool gradients_ok = true;
  bool feasible = false;
  bool strictly_feasible = false;
  double max_violation = 0.0;
  Vector witness;
  std::optional<ErrorCode> error;
  std::vector<std::string> messages;

  bool ok() const { return !error.has_value() && gradients_ok; }
  bool operator==(const ValidationReport&) const = default;
};

/// Checks dimensions, local set nonemptiness, cost-gradient consistency and
/// global feasibility (phase-1 projected gradient for A x <= b - 1e-9).
ValidationReport validate_game(const GameSpec& game);

/// Throws the first failure recorded in the report.
void require_valid(const ValidationReport& report);

}  // namespace aggsplit
