#pragma once

#include "aggsplit/benchmark.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace aggsplit {

using Json = nlohmann::ordered_json;

/// {"dims": {N, n, m}, "agents": [{upper, total, a, xtilde, Q, A, b}]}
/// with matrices as arrays of rows. Only box-simplex sets and QuadraticAgg
/// costs serialize; anything else is InvalidArgument.
Json game_to_json(const GameSpec& game);
/// Parse errors and schema violations raise Parse; dimension problems keep
/// their own codes.
GameSpec game_from_json(const Json& j);

void save_game(const GameSpec& game, const std::string& path);
GameSpec load_game(const std::string& path);

/// 17 significant digits, '.' decimal regardless of locale.
std::string format_double(double v);

/// iter,dist_to_ref,stationarity,primal,complementarity,consensus,link,step_norm,wall_nanos
void write_trace_csv(std::ostream& os, const RunTrace& trace);

Json kkt_to_json(const KktResidual& r);
Json run_report_json(const RunResult& result, const GameSpec& game);
Json validation_to_json(const ValidationReport& r);

/// seed,method,iters_to_tol,final_kkt,wall_ms
void write_summary_csv(std::ostream& os, const ExperimentReport& rep);
/// iter,mean_normalized_error
void write_mean_curve_csv(std::ostream& os, const std::vector<double>& curve);
Json experiment_report_json(const ExperimentReport& rep);

/// Writes summary.csv, curve_<method>.csv and report.json into dir (created).
void write_experiment(const ExperimentReport& rep, const std::string& dir);

}  // namespace aggsplit
