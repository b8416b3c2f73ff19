#include "aggsplit/aggsplit.h"

#include "aggsplit/io.hpp"
#include "aggsplit/verify.hpp"

#include <tbb/global_control.h>

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>

using namespace aggsplit;

struct agg_game {
  std::shared_ptr<const GameSpec> spec;
};

struct agg_run {
  std::shared_ptr<const GameSpec> game;
  RunResult result;
};

namespace {

thread_local std::string last_error;

agg_status status_of(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument: return AGG_INVALID_ARGUMENT;
    case ErrorCode::DimensionMismatch: return AGG_DIMENSION_MISMATCH;
    case ErrorCode::EmptySet: return AGG_EMPTY_SET;
    case ErrorCode::EmptyLocalSet: return AGG_EMPTY_LOCAL_SET;
    case ErrorCode::Infeasible: return AGG_INFEASIBLE;
    case ErrorCode::NonSmoothCost: return AGG_NON_SMOOTH_COST;
    case ErrorCode::InvalidStepSizes: return AGG_INVALID_STEP_SIZES;
    case ErrorCode::NoConvergence: return AGG_NO_CONVERGENCE;
    case ErrorCode::MaxItersExceeded: return AGG_MAX_ITERS_EXCEEDED;
    case ErrorCode::NotCertified: return AGG_NOT_CERTIFIED;
    case ErrorCode::GenerationFailed: return AGG_GENERATION_FAILED;
    case ErrorCode::Io: return AGG_IO;
    case ErrorCode::Parse: return AGG_PARSE;
  }
  return AGG_INTERNAL;
}

agg_status set_error(agg_status s, const std::string& msg) {
  last_error = msg;
  return s;
}

template <class F>
agg_status guarded(F&& f) {
  try {
    last_error.clear();
    return f();
  } catch (const Error& e) {
    return set_error(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(AGG_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(AGG_INTERNAL, e.what());
  }
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

#define AGG_REQUIRE(cond, what) \
  if (!(cond)) return set_error(AGG_INVALID_ARGUMENT, what)

BenchmarkParams to_params(const agg_benchmark_params& c) {
  BenchmarkParams p;
  p.N = c.N;
  p.n = c.n;
  p.a_lo = c.a_lo;
  p.a_hi = c.a_hi;
  p.w_lo = c.w_lo;
  p.w_hi = c.w_hi;
  p.q_lo = c.q_lo;
  p.q_hi = c.q_hi;
  p.qbar_lo = c.qbar_lo;
  p.qbar_hi = c.qbar_hi;
  p.upper_total = c.upper_total;
  p.task_total = c.task_total;
  p.b_lo = c.b_lo;
  p.b_hi = c.b_hi;
  p.seed = c.seed;
  return p;
}

// Step sizes are rebuilt per game since gamma is per agent.
RunConfig to_config(const agg_run_config& c, std::size_t N) {
  RunConfig r;
  r.steps = StepSizes::uniform_central(N, c.gamma, c.alpha, c.delta_c, c.beta_c);
  r.relaxation = c.relaxation;
  r.max_iters = c.max_iters;
  r.stop_tol = c.stop_tol;
  r.record_every = c.record_every;
  r.record_timing = c.record_timing != 0;
  r.prox_path = c.generic_prox ? ProxPath::Generic : ProxPath::Auto;
  r.prox_tolerance = c.prox_tolerance;
  r.pfb_scale = c.pfb_scale;
  r.check(N);
  return r;
}

std::vector<std::string> split_suites(const char* s) {
  std::vector<std::string> out;
  if (!s) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::mutex threads_mutex;
std::unique_ptr<tbb::global_control> thread_limit;

}  // namespace

extern "C" {

const char* agg_version(void) { return "1.0.0"; }

const char* agg_status_name(agg_status s) {
  switch (s) {
    case AGG_OK: return "OK";
    case AGG_INVALID_ARGUMENT: return "InvalidArgument";
    case AGG_DIMENSION_MISMATCH: return "DimensionMismatch";
    case AGG_EMPTY_SET: return "EmptySet";
    case AGG_EMPTY_LOCAL_SET: return "EmptyLocalSet";
    case AGG_INFEASIBLE: return "Infeasible";
    case AGG_NON_SMOOTH_COST: return "NonSmoothCost";
    case AGG_INVALID_STEP_SIZES: return "InvalidStepSizes";
    case AGG_NO_CONVERGENCE: return "NoConvergence";
    case AGG_MAX_ITERS_EXCEEDED: return "MaxItersExceeded";
    case AGG_NOT_CERTIFIED: return "NotCertified";
    case AGG_GENERATION_FAILED: return "GenerationFailed";
    case AGG_IO: return "Io";
    case AGG_PARSE: return "Parse";
    case AGG_VERIFICATION_FAILED: return "VerificationFailed";
    case AGG_INTERNAL: return "Internal";
  }
  return "Unknown";
}

const char* agg_last_error(void) { return last_error.c_str(); }

void agg_free_string(char* s) { std::free(s); }

agg_status agg_set_threads(size_t threads) {
  return guarded([&] {
    std::lock_guard<std::mutex> lock(threads_mutex);
    thread_limit.reset();
    if (threads > 0)
      thread_limit = std::make_unique<tbb::global_control>(
          tbb::global_control::max_allowed_parallelism, threads);
    return AGG_OK;
  });
}

void agg_benchmark_params_default(agg_benchmark_params* c) {
  if (!c) return;
  const BenchmarkParams p = BenchmarkParams::standard();
  *c = agg_benchmark_params{p.N,       p.n,       p.a_lo,        p.a_hi,       p.w_lo,
                            p.w_hi,    p.q_lo,    p.q_hi,        p.qbar_lo,    p.qbar_hi,
                            p.upper_total, p.task_total, p.b_lo, p.b_hi, p.seed};
}

agg_status agg_game_generate(const agg_benchmark_params* params, agg_game** out) {
  AGG_REQUIRE(params && out, "agg_game_generate: null argument");
  return guarded([&] {
    *out = nullptr;
    auto g = std::make_shared<const GameSpec>(generate_benchmark(to_params(*params)));
    require_valid(validate_game(*g));
    *out = new agg_game{std::move(g)};
    return AGG_OK;
  });
}

agg_status agg_game_toy(agg_game** out) {
  AGG_REQUIRE(out, "agg_game_toy: null argument");
  return guarded([&] {
    *out = new agg_game{std::make_shared<const GameSpec>(toy_game())};
    return AGG_OK;
  });
}

agg_status agg_game_load(const char* path, agg_game** out) {
  AGG_REQUIRE(path && out, "agg_game_load: null argument");
  return guarded([&] {
    *out = nullptr;
    *out = new agg_game{std::make_shared<const GameSpec>(load_game(path))};
    return AGG_OK;
  });
}

agg_status agg_game_save(const agg_game* game, const char* path) {
  AGG_REQUIRE(game && path, "agg_game_save: null argument");
  return guarded([&] {
    save_game(*game->spec, path);
    return AGG_OK;
  });
}

agg_status agg_game_dims(const agg_game* game, size_t* N, size_t* n, size_t* m) {
  AGG_REQUIRE(game, "agg_game_dims: null game");
  const auto& d = game->spec->dims();
  if (N) *N = d.N;
  if (n) *n = d.n;
  if (m) *m = d.m;
  return AGG_OK;
}

agg_status agg_game_validate(const agg_game* game, char** report_json) {
  AGG_REQUIRE(game, "agg_game_validate: null game");
  return guarded([&] {
    const ValidationReport r = validate_game(*game->spec);
    if (report_json) *report_json = dup(validation_to_json(r).dump(1));
    if (r.ok()) return AGG_OK;
    const std::string msg = r.messages.empty() ? "validation failed" : r.messages.front();
    return set_error(r.error ? status_of(*r.error) : AGG_INVALID_ARGUMENT, msg);
  });
}

void agg_game_free(agg_game* game) { delete game; }

void agg_run_config_default(agg_run_config* c) {
  if (!c) return;
  const RunConfig r;
  *c = agg_run_config{1.0,        1.0,         0.5,          0.5,
                      r.relaxation, r.max_iters, r.stop_tol, r.record_every,
                      0,          0,           r.prox_tolerance, r.pfb_scale};
}

agg_status agg_solve(const agg_game* game, agg_method method, const agg_run_config* config,
                     agg_run** out) {
  AGG_REQUIRE(game && config && out, "agg_solve: null argument");
  AGG_REQUIRE(method == AGG_METHOD_DR || method == AGG_METHOD_PFB, "agg_solve: unknown method");
  *out = nullptr;
  return guarded([&] {
    const RunConfig cfg = to_config(*config, game->spec->dims().N);
    try {
      RunResult r = method == AGG_METHOD_DR ? run_dr(*game->spec, cfg) : run_pfb(*game->spec, cfg);
      *out = new agg_run{game->spec, std::move(r)};
      return AGG_OK;
    } catch (const MaxItersExceeded& e) {
      *out = new agg_run{game->spec, e.result()};
      return set_error(AGG_MAX_ITERS_EXCEEDED, e.what());
    }
  });
}

agg_status agg_run_write_trace_csv(const agg_run* run, const char* path) {
  AGG_REQUIRE(run && path, "agg_run_write_trace_csv: null argument");
  return guarded([&] {
    std::ofstream os(path, std::ios::binary);
    if (!os) fail(ErrorCode::Io, std::string("cannot write ") + path);
    write_trace_csv(os, run->result.trace);
    if (!os) fail(ErrorCode::Io, std::string("write failed: ") + path);
    return AGG_OK;
  });
}

agg_status agg_run_report_json(const agg_run* run, char** out) {
  AGG_REQUIRE(run && out, "agg_run_report_json: null argument");
  return guarded([&] {
    *out = dup(run_report_json(run->result, *run->game).dump(1));
    return AGG_OK;
  });
}

size_t agg_run_iterations(const agg_run* run) { return run ? run->result.iterations : 0; }

int agg_run_converged(const agg_run* run) { return run && run->result.converged ? 1 : 0; }

agg_status agg_run_solution(const agg_run* run, double* x, size_t len) {
  AGG_REQUIRE(run && x, "agg_run_solution: null argument");
  const Vector& v = run->result.final_point.x;
  if (len != static_cast<size_t>(v.size()))
    return set_error(AGG_DIMENSION_MISMATCH, "agg_run_solution: buffer length " +
                                                 std::to_string(len) + ", need " +
                                                 std::to_string(v.size()));
  std::memcpy(x, v.data(), len * sizeof(double));
  return AGG_OK;
}

agg_status agg_run_kkt(const agg_run* run, agg_kkt* out) {
  AGG_REQUIRE(run && out, "agg_run_kkt: null argument");
  return guarded([&] {
    const KktResidual k = kkt_residual(*run->game, run->result.final_point);
    *out = agg_kkt{k.stationarity, k.primal, k.complementarity, k.dual_sign, k.consensus, k.link, k.max()};
    return AGG_OK;
  });
}

void agg_run_free(agg_run* run) { delete run; }

void agg_compare_options_default(agg_compare_options* c) {
  if (!c) return;
  const ComparisonOptions o;
  *c = agg_compare_options{10, o.tol, o.max_iters, o.reference_tol, o.gamma, o.alpha,
                           o.delta_c, o.beta_c, 1, 1, 0};
}

agg_status agg_compare(const agg_benchmark_params* params, const agg_compare_options* options,
                       const char* out_dir, char** report_json) {
  AGG_REQUIRE(params && options, "agg_compare: null argument");
  AGG_REQUIRE(options->seeds >= 1, "agg_compare: seeds must be >= 1");
  AGG_REQUIRE(options->run_dr || options->run_pfb, "agg_compare: no method selected");
  return guarded([&] {
    ComparisonOptions o;
    o.methods.clear();
    if (options->run_dr) o.methods.push_back("dr");
    if (options->run_pfb) o.methods.push_back("pfb");
    o.tol = options->tol;
    o.max_iters = options->max_iters;
    o.reference_tol = options->reference_tol;
    o.gamma = options->gamma;
    o.alpha = options->alpha;
    o.delta_c = options->delta_c;
    o.beta_c = options->beta_c;
    o.record_timing = options->record_timing != 0;
    const ExperimentReport rep = run_comparison(to_params(*params), options->seeds, o);
    if (out_dir) write_experiment(rep, out_dir);
    if (report_json) *report_json = dup(experiment_report_json(rep).dump(1));
    return AGG_OK;
  });
}

agg_status agg_verify(const agg_game* game, const char* suites, const agg_run_config* config,
                      char** table, int* passed) {
  return guarded([&] {
    std::shared_ptr<const GameSpec> g =
        game ? game->spec : std::make_shared<const GameSpec>(toy_game());
    VerifyOptions o;
    agg_run_config c;
    agg_run_config_default(&c);
    if (config) c = *config;
    o.gamma = c.gamma;
    o.alpha = c.alpha;
    o.delta_c = c.delta_c;
    o.beta_c = c.beta_c;
    o.config.relaxation = c.relaxation;
    o.config.max_iters = c.max_iters;
    o.config.prox_path = c.generic_prox ? ProxPath::Generic : ProxPath::Auto;
    o.config.prox_tolerance = c.prox_tolerance;
    o.suites = split_suites(suites);
    const auto results = run_verification(*g, o);
    const bool ok = all_passed(results);
    if (table) *table = dup(format_verification(results));
    if (passed) *passed = ok ? 1 : 0;
    return ok ? AGG_OK : set_error(AGG_VERIFICATION_FAILED, "verification failed");
  });
}

}  // extern "C"
