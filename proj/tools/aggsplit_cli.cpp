// Command-line front end; talks to the solver only through aggsplit.h.
#include "aggsplit/aggsplit.h"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

namespace {

enum Exit { kOk = 0, kVerify = 1, kInput = 2, kNoConvergence = 3, kUsage = 64 };

int exit_for(agg_status s) {
  switch (s) {
    case AGG_OK: return kOk;
    case AGG_VERIFICATION_FAILED: return kVerify;
    case AGG_MAX_ITERS_EXCEEDED:
    case AGG_NO_CONVERGENCE: return kNoConvergence;
    default: return kInput;
  }
}

int report(agg_status s, const char* what) {
  if (s != AGG_OK)
    std::cerr << "error: " << what << ": " << agg_status_name(s) << ": " << agg_last_error() << "\n";
  return exit_for(s);
}

struct GameSource {
  std::string file;
  bool preset = false;
  size_t N = 20, n = 5;
  uint64_t seed = 1;
};

void add_generation_flags(CLI::App* cmd, GameSource& src, bool with_file) {
  CLI::Option* file = nullptr;
  if (with_file) file = cmd->add_option("--game", src.file, "game JSON file")->check(CLI::ExistingFile);
  auto* preset = cmd->add_flag("--preset-paper", src.preset, "N = 1000, n = 10");
  cmd->add_option_function<std::string>(
         "--preset",
         [&src](const std::string& v) {
           if (v != "paper") throw CLI::ValidationError("--preset", "only 'paper' is known");
           src.preset = true;
         },
         "named parameter set (only \"paper\" is defined)")
      ->excludes(preset);
  auto* N = cmd->add_option("--N", src.N, "number of agents")->check(CLI::PositiveNumber);
  auto* n = cmd->add_option("--n", src.n, "slots per agent")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", src.seed, "benchmark seed");
  if (file) {
    file->excludes(N);
    file->excludes(n);
    file->excludes(preset);
  }
}

agg_status open_game(const GameSource& src, agg_game** g) {
  if (!src.file.empty()) return agg_game_load(src.file.c_str(), g);
  agg_benchmark_params p;
  agg_benchmark_params_default(&p);
  if (!src.preset) {
    p.N = src.N;
    p.n = src.n;
  }
  p.seed = src.seed;
  return agg_game_generate(&p, g);
}

void add_step_flags(CLI::App* cmd, agg_run_config& c) {
  cmd->add_option("--gamma", c.gamma, "agent step gamma_i");
  cmd->add_option("--alpha", c.alpha, "coordinator step alpha");
  cmd->add_option("--delta-c", c.delta_c, "dual step delta_c");
  cmd->add_option("--beta-c", c.beta_c, "consensus step beta_c");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-decentralized Douglas-Rachford solver for aggregative games"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(agg_version()));
  long threads = -1;
  app.add_option("--threads", threads, "worker threads (default: AGG_SPLITTER_THREADS or all cores)")
      ->check(CLI::NonNegativeNumber);

  // generate
  auto* gen = app.add_subcommand("generate", "draw a benchmark game and write it as JSON");
  GameSource gsrc;
  std::string gen_out;
  add_generation_flags(gen, gsrc, false);
  gen->add_option("-o,--out", gen_out, "output file")->required();

  // solve
  auto* solve = app.add_subcommand("solve", "run a solver on a game");
  GameSource ssrc;
  agg_run_config rc;
  agg_run_config_default(&rc);
  std::string method = "dr", trace_path = "trace.csv", report_path = "report.json";
  bool timing = false, generic = false;
  add_generation_flags(solve, ssrc, true);
  solve->add_option("--method", method, "dr or pfb")->check(CLI::IsMember({"dr", "pfb"}));
  solve->add_option("--tol", rc.stop_tol, "stop tolerance")->check(CLI::NonNegativeNumber);
  solve->add_option("--max-iters", rc.max_iters, "iteration cap")->check(CLI::PositiveNumber);
  solve->add_option("--relaxation", rc.relaxation, "DR relaxation in (0, 2)");
  solve->add_option("--record-every", rc.record_every, "trace stride")->check(CLI::PositiveNumber);
  solve->add_flag("--timing", timing, "record wall-clock time in the trace");
  solve->add_flag("--generic-prox", generic, "use the iterative prox path");
  solve->add_option("--trace", trace_path, "trace CSV path");
  solve->add_option("--report", report_path, "report JSON path");
  add_step_flags(solve, rc);

  // compare
  auto* cmp = app.add_subcommand("compare", "DR vs pFB over several seeds");
  GameSource csrc;
  agg_compare_options co;
  agg_compare_options_default(&co);
  std::string out_dir = "compare_out";
  std::vector<std::string> methods{"dr", "pfb"};
  bool cmp_timing = false;
  add_generation_flags(cmp, csrc, false);
  cmp->add_option("--seeds", co.seeds, "number of seeds")->check(CLI::PositiveNumber);
  cmp->add_option("--tol", co.tol, "normalized-error target")->check(CLI::PositiveNumber);
  cmp->add_option("--max-iters", co.max_iters, "iteration cap per run")->check(CLI::PositiveNumber);
  cmp->add_option("--methods", methods, "subset of dr,pfb")
      ->delimiter(',')
      ->check(CLI::IsMember({"dr", "pfb"}));
  cmp->add_option("--out", out_dir, "output directory");
  cmp->add_flag("--timing", cmp_timing, "record wall-clock time");
  cmp->add_option("--gamma", co.gamma, "agent step gamma_i");
  cmp->add_option("--alpha", co.alpha, "coordinator step alpha");
  cmp->add_option("--delta-c", co.delta_c, "dual step delta_c");
  cmp->add_option("--beta-c", co.beta_c, "consensus step beta_c");

  // verify
  auto* ver = app.add_subcommand("verify", "run the property suites on a game (default: toy)");
  std::string ver_game;
  std::vector<std::string> suites;
  agg_run_config vc;
  agg_run_config_default(&vc);
  ver->add_option("--game", ver_game, "game JSON file")->check(CLI::ExistingFile);
  ver->add_option("--suite", suites, "steps, resolvents, skew, firm-nonexpansiveness, trajectory, kkt")
      ->delimiter(',');
  add_step_flags(ver, vc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  if (threads < 0) {
    if (const char* env = std::getenv("AGG_SPLITTER_THREADS")) {
      char* end = nullptr;
      const long v = std::strtol(env, &end, 10);
      if (end == env || *end != '\0' || v < 0) {
        std::cerr << "error: AGG_SPLITTER_THREADS must be a nonnegative integer\n";
        return kUsage;
      }
      threads = v;
    }
  }
  if (threads > 0) agg_set_threads(static_cast<size_t>(threads));

  if (*gen) {
    agg_game* g = nullptr;
    agg_status s = open_game(gsrc, &g);
    if (s != AGG_OK) return report(s, "generate");
    char* rep = nullptr;
    s = agg_game_validate(g, &rep);
    if (s == AGG_OK) s = agg_game_save(g, gen_out.c_str());
    std::cout << (s == AGG_OK ? "OK" : "INVALID") << "\n";
    if (rep) std::cout << rep << "\n";
    agg_free_string(rep);
    agg_game_free(g);
    return report(s, "generate");
  }

  if (*solve) {
    agg_game* g = nullptr;
    agg_status s = open_game(ssrc, &g);
    if (s != AGG_OK) return report(s, "solve");
    rc.record_timing = timing ? 1 : 0;
    rc.generic_prox = generic ? 1 : 0;
    agg_run* run = nullptr;
    s = agg_solve(g, method == "dr" ? AGG_METHOD_DR : AGG_METHOD_PFB, &rc, &run);
    const agg_status solve_status = s;
    const std::string solve_error = agg_last_error();
    if (run) {
      agg_status w = agg_run_write_trace_csv(run, trace_path.c_str());
      char* js = nullptr;
      if (w == AGG_OK) w = agg_run_report_json(run, &js);
      if (w == AGG_OK) {
        std::FILE* f = std::fopen(report_path.c_str(), "wb");
        if (!f || std::fputs(js, f) < 0 || std::fputc('\n', f) == EOF) w = AGG_IO;
        if (f) std::fclose(f);
        if (w == AGG_IO) std::cerr << "error: cannot write " << report_path << "\n";
      }
      agg_free_string(js);
      agg_kkt k{};
      agg_run_kkt(run, &k);
      std::cout << method << ": " << (agg_run_converged(run) ? "converged" : "not converged")
                << " after " << agg_run_iterations(run) << " iterations, KKT " << k.max << "\n";
      agg_run_free(run);
      if (w != AGG_OK && solve_status == AGG_OK) {
        agg_game_free(g);
        return report(w, "solve");
      }
    }
    agg_game_free(g);
    if (solve_status != AGG_OK)
      std::cerr << "error: solve: " << agg_status_name(solve_status) << ": " << solve_error << "\n";
    return exit_for(solve_status);
  }

  if (*cmp) {
    agg_benchmark_params p;
    agg_benchmark_params_default(&p);
    if (!csrc.preset) {
      p.N = csrc.N;
      p.n = csrc.n;
    }
    p.seed = csrc.seed;
    co.run_dr = 0;
    co.run_pfb = 0;
    for (const auto& m : methods) (m == "dr" ? co.run_dr : co.run_pfb) = 1;
    co.record_timing = cmp_timing ? 1 : 0;
    char* js = nullptr;
    agg_status s = agg_compare(&p, &co, out_dir.c_str(), &js);
    if (s == AGG_GENERATION_FAILED) {
      // every seed failed
      std::cerr << "error: compare: " << agg_last_error() << "\n";
      return kNoConvergence;
    }
    if (s != AGG_OK) return report(s, "compare");
    std::cout << "wrote " << out_dir << "/summary.csv, report.json\n";
    agg_free_string(js);
    return kOk;
  }

  if (*ver) {
    agg_game* g = nullptr;
    if (!ver_game.empty()) {
      agg_status s = agg_game_load(ver_game.c_str(), &g);
      if (s != AGG_OK) return report(s, "verify");
    }
    std::string joined;
    for (const auto& s : suites) joined += (joined.empty() ? "" : ",") + s;
    char* table = nullptr;
    int ok = 0;
    agg_status s = agg_verify(g, joined.empty() ? nullptr : joined.c_str(), &vc, &table, &ok);
    if (table) std::cout << table;
    agg_free_string(table);
    agg_game_free(g);
    if (s == AGG_OK || s == AGG_VERIFICATION_FAILED) {
      std::cout << (ok ? "all checks passed" : "some checks failed") << "\n";
      return ok ? kOk : kVerify;
    }
    // the game already loaded, so a bad argument here is a suite name
    if (s == AGG_INVALID_ARGUMENT) {
      report(s, "verify");
      return kUsage;
    }
    return report(s, "verify");
  }
  return kUsage;
}
