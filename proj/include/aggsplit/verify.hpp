#pragma once

#include "aggsplit/benchmark.hpp"

#include <string>
#include <vector>

namespace aggsplit {

/// Small benchmark with the cost coupling switched off (Q = 0), so the
/// extended operator is monotone and every suite applies.
BenchmarkParams toy_params();
GameSpec toy_game();

/// A random extended point: x, sigma inside the bounding box of the local
/// sets, everything else in [-1, 1].
ExtendedPoint random_extended_point(const GameSpec& game, std::uint64_t seed, std::uint64_t stream);

struct CheckResult {
  std::string suite;
  std::string name;
  bool passed = false;
  bool skipped = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct VerifyOptions {
  /// Central parameters under test; gamma_i = gamma for every agent.
  double gamma = 1.0, alpha = 1.0, delta_c = 0.5, beta_c = 0.5;
  /// Everything but the step sizes, which are rebuilt from the values above.
  RunConfig config;
  /// Empty runs every suite: steps, resolvents, skew,
  /// firm-nonexpansiveness, trajectory, kkt.
  std::vector<std::string> suites;
  std::uint64_t seed = 1;
};

const std::vector<std::string>& verify_suite_names();

/// InvalidArgument for an unknown suite name.
std::vector<CheckResult> run_verification(const GameSpec& game, const VerifyOptions& options);

bool all_passed(const std::vector<CheckResult>& results);
/// Fixed-width table, one row per check.
std::string format_verification(const std::vector<CheckResult>& results);

}  // namespace aggsplit
