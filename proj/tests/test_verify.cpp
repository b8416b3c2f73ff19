#include "aggsplit/verify.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <set>

using namespace aggsplit;
using namespace testing_util;

TEST_CASE("every suite passes on the toy instance") {
  const auto res = run_verification(toy_game(), VerifyOptions{});
  CHECK(all_passed(res));
  std::set<std::string> seen;
  for (const auto& r : res) {
    seen.insert(r.suite);
    CHECK_FALSE(r.skipped);
  }
  CHECK(seen.size() == verify_suite_names().size());
  const std::string table = format_verification(res);
  CHECK(table.find("resolvents") != std::string::npos);
  CHECK(table.find("FAIL") == std::string::npos);
}

TEST_CASE("suite filtering and unknown names") {
  VerifyOptions o;
  o.suites = {"resolvents"};
  const auto res = run_verification(toy_game(), o);
  REQUIRE_FALSE(res.empty());
  for (const auto& r : res) CHECK((r.suite == "resolvents" || r.suite == "steps"));
  o.suites = {"nope"};
  CHECK_THROWS_AS(run_verification(toy_game(), o), Error);
}

TEST_CASE("out-of-range step sizes fail the step check") {
  VerifyOptions o;
  o.delta_c = 1.0;
  const auto res = run_verification(toy_game(), o);
  CHECK_FALSE(all_passed(res));
  bool steps_failed = false;
  for (const auto& r : res)
    if (r.suite == "steps" && !r.passed) steps_failed = true;
  CHECK(steps_failed);
}

TEST_CASE("firm nonexpansiveness of J_A is skipped when the probe finds non-monotonicity") {
  VerifyOptions o;
  o.suites = {"firm-nonexpansiveness"};
  const auto res = run_verification(small_benchmark(5, 3, 1), o);
  bool skipped = false;
  for (const auto& r : res) skipped = skipped || r.skipped;
  CHECK(skipped);
  CHECK(all_passed(res));
}

TEST_CASE("toy instance shape") {
  const GameSpec g = toy_game();
  CHECK(g.dims() == Dimensions{5, 3, 3});
  for (const auto& ag : g.agents()) CHECK(ag.cost.as_quadratic()->Q.isZero(0.0));
  CHECK(validate_game(g).ok());
}
