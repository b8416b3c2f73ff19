#include "aggsplit/io.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace aggsplit {

namespace {

Json vec_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json mat_json(const Matrix& M) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

[[noreturn]] void parse_fail(const std::string& what) { fail(ErrorCode::Parse, "game json: " + what); }

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) parse_fail(std::string("missing field '") + key + "'");
  return j.at(key);
}

double num(const Json& j, const char* what) {
  if (!j.is_number()) parse_fail(std::string(what) + " is not a number");
  return j.get<double>();
}

Vector vec_from(const Json& j, Eigen::Index len, const char* what) {
  if (!j.is_array()) parse_fail(std::string(what) + " is not an array");
  if (static_cast<Eigen::Index>(j.size()) != len)
    fail(ErrorCode::DimensionMismatch, std::string("game json: ") + what + " has length " +
                                           std::to_string(j.size()) + ", expected " +
                                           std::to_string(len));
  Vector v(len);
  for (Eigen::Index i = 0; i < len; ++i) v[i] = num(j[static_cast<std::size_t>(i)], what);
  return v;
}

Matrix mat_from(const Json& j, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (!j.is_array()) parse_fail(std::string(what) + " is not an array of rows");
  if (static_cast<Eigen::Index>(j.size()) != rows)
    fail(ErrorCode::DimensionMismatch, std::string("game json: ") + what + " row count");
  Matrix M(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) M.row(r) = vec_from(j[static_cast<std::size_t>(r)], cols, what);
  return M;
}

std::size_t count(const Json& j, const char* what) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) parse_fail(std::string(what) + " must be an integer");
  const auto v = j.get<long long>();
  if (v < 0) parse_fail(std::string(what) + " must be nonnegative");
  return static_cast<std::size_t>(v);
}

}  // namespace

Json game_to_json(const GameSpec& game) {
  const auto& dm = game.dims();
  Json j;
  j["dims"] = {{"N", dm.N}, {"n", dm.n}, {"m", dm.m}};
  Json agents = Json::array();
  for (std::size_t i = 0; i < dm.N; ++i) {
    const auto& ag = game.agent(i);
    const auto* bs = ag.omega.as_box_simplex();
    const auto* q = ag.cost.as_quadratic();
    if (!bs || !q)
      fail(ErrorCode::InvalidArgument,
           "agent " + std::to_string(i) + ": only box-simplex sets with quadratic costs serialize");
    Json a;
    a["upper"] = vec_json(bs->upper);
    a["total"] = bs->total;
    a["a"] = q->a;
    a["xtilde"] = vec_json(q->target);
    a["Q"] = mat_json(q->Q);
    a["A"] = mat_json(ag.A);
    a["b"] = vec_json(ag.b);
    agents.push_back(std::move(a));
  }
  j["agents"] = std::move(agents);
  return j;
}

GameSpec game_from_json(const Json& j) {
  const Json& d = field(j, "dims");
  Dimensions dims{count(field(d, "N"), "N"), count(field(d, "n"), "n"), count(field(d, "m"), "m")};
  dims.check();
  const Json& arr = field(j, "agents");
  if (!arr.is_array()) parse_fail("agents is not an array");
  if (arr.size() != dims.N)
    fail(ErrorCode::DimensionMismatch, "game json: " + std::to_string(arr.size()) +
                                           " agents for N = " + std::to_string(dims.N));
  const auto n = static_cast<Eigen::Index>(dims.n);
  const auto m = static_cast<Eigen::Index>(dims.m);
  std::vector<AgentSpec> agents;
  agents.reserve(dims.N);
  for (const Json& a : arr) {
    LocalSet omega = LocalSet::box_simplex(vec_from(field(a, "upper"), n, "upper"),
                                           num(field(a, "total"), "total"));
    CostModel cost = CostModel::quadratic(num(field(a, "a"), "a"),
                                          vec_from(field(a, "xtilde"), n, "xtilde"),
                                          mat_from(field(a, "Q"), n, n, "Q"));
    agents.push_back(AgentSpec{std::move(omega), std::move(cost), mat_from(field(a, "A"), m, n, "A"),
                               vec_from(field(a, "b"), m, "b")});
  }
  return GameSpec(dims, std::move(agents));
}

void save_game(const GameSpec& game, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorCode::Io, "cannot write " + path);
  os << game_to_json(game).dump(1) << '\n';
  if (!os) fail(ErrorCode::Io, "write failed: " + path);
}

GameSpec load_game(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::Io, "cannot read " + path);
  Json j;
  try {
    j = Json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, path + ": " + e.what());
  }
  return game_from_json(j);
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_trace_csv(std::ostream& os, const RunTrace& trace) {
  os << "iter,dist_to_ref,stationarity,primal,complementarity,consensus,link,step_norm,wall_nanos\n";
  for (const auto& r : trace.rows) {
    os << r.iter << ',' << (r.dist_to_ref ? format_double(*r.dist_to_ref) : std::string()) << ','
       << format_double(r.kkt.stationarity) << ',' << format_double(r.kkt.primal) << ','
       << format_double(r.kkt.complementarity) << ',' << format_double(r.kkt.consensus) << ','
       << format_double(r.kkt.link) << ',' << format_double(r.step_norm) << ',' << r.wall_nanos
       << '\n';
  }
}

Json kkt_to_json(const KktResidual& r) {
  return Json{{"stationarity", r.stationarity}, {"primal", r.primal},
              {"complementarity", r.complementarity}, {"dual_sign", r.dual_sign},
              {"consensus", r.consensus}, {"link", r.link}, {"max", r.max()}};
}

Json run_report_json(const RunResult& res, const GameSpec& game) {
  Json j;
  j["method"] = res.method;
  j["converged"] = res.converged;
  j["iterations"] = res.iterations;
  j["final_metric"] = res.final_metric;
  j["iters_to_tol"] = res.iters_to_tol ? Json(*res.iters_to_tol) : Json(nullptr);
  j["kkt"] = kkt_to_json(kkt_residual(game, res.final_point));
  j["lambda"] = vec_json(res.final_point.lambda);
  j["sigma"] = vec_json(res.final_point.sigma);
  j["mu"] = vec_json(res.final_point.mu);
  j["x"] = vec_json(res.final_point.x);
  return j;
}

Json validation_to_json(const ValidationReport& r) {
  Json j;
  j["ok"] = r.ok();
  j["dimensions_ok"] = r.dimensions_ok;
  std::size_t empty = 0;
  for (bool b : r.local_set_nonempty) empty += b ? 0 : 1;
  j["empty_local_sets"] = empty;
  j["gradient_fd_error"] = r.gradient_fd_error;
  j["gradients_ok"] = r.gradients_ok;
  j["feasible"] = r.feasible;
  j["strictly_feasible"] = r.strictly_feasible;
  j["max_violation"] = r.max_violation;
  j["error"] = r.error ? Json(to_string(*r.error)) : Json(nullptr);
  j["messages"] = r.messages;
  return j;
}

void write_summary_csv(std::ostream& os, const ExperimentReport& rep) {
  os << "seed,method,iters_to_tol,final_kkt,wall_ms\n";
  for (const auto& s : rep.seeds) {
    if (!s.ok) {
      os << s.seed << ",failed,,,\n";
      continue;
    }
    for (const auto& m : s.methods)
      os << s.seed << ',' << m.method << ','
         << (m.iters_to_tol ? std::to_string(*m.iters_to_tol) : std::string()) << ','
         << format_double(m.final_kkt) << ',' << format_double(m.wall_ms) << '\n';
  }
}

void write_mean_curve_csv(std::ostream& os, const std::vector<double>& curve) {
  os << "iter,mean_normalized_error\n";
  for (std::size_t k = 0; k < curve.size(); ++k) os << k << ',' << format_double(curve[k]) << '\n';
}

Json experiment_report_json(const ExperimentReport& rep) {
  const auto& p = rep.params;
  const auto& o = rep.options;
  Json j;
  j["params"] = {{"N", p.N}, {"n", p.n}, {"a", {p.a_lo, p.a_hi}}, {"w", {p.w_lo, p.w_hi}},
                 {"q", {p.q_lo, p.q_hi}}, {"qbar", {p.qbar_lo, p.qbar_hi}},
                 {"upper_total", p.upper_total}, {"task_total", p.task_total},
                 {"b_fraction", {p.b_lo, p.b_hi}}, {"seed", p.seed}};
  j["options"] = {{"methods", o.methods}, {"tol", o.tol}, {"max_iters", o.max_iters},
                  {"reference_tol", o.reference_tol}, {"gamma", o.gamma}, {"alpha", o.alpha},
                  {"delta_c", o.delta_c}, {"beta_c", o.beta_c}};
  Json seeds = Json::array();
  for (const auto& s : rep.seeds) {
    Json js{{"seed", s.seed}, {"ok", s.ok}};
    if (!s.ok) js["error"] = s.error;
    js["reference_kkt"] = s.reference_kkt;
    Json ms = Json::array();
    for (const auto& m : s.methods)
      ms.push_back({{"method", m.method},
                    {"iters_to_tol", m.iters_to_tol ? Json(*m.iters_to_tol) : Json(nullptr)},
                    {"iterations", m.iterations},
                    {"final_kkt", m.final_kkt},
                    {"wall_ms", m.wall_ms}});
    js["methods"] = std::move(ms);
    seeds.push_back(std::move(js));
  }
  j["seeds"] = std::move(seeds);
  j["successful_seeds"] = rep.successful_seeds();
  j["dr_win_fraction"] = rep.dr_win_fraction;
  j["pfb_median_iters"] = rep.pfb_median_iters;
  j["speed_ratio"] = rep.speed_ratio;
  return j;
}

void write_experiment(const ExperimentReport& rep, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create " + dir + ": " + ec.message());
  auto open = [&](const std::string& name) {
    std::ofstream os(fs::path(dir) / name, std::ios::binary);
    if (!os) fail(ErrorCode::Io, "cannot write " + (fs::path(dir) / name).string());
    return os;
  };
  {
    auto os = open("summary.csv");
    write_summary_csv(os, rep);
  }
  for (const auto& [method, curve] : rep.mean_curve) {
    auto os = open("curve_" + method + ".csv");
    write_mean_curve_csv(os, curve);
  }
  auto os = open("report.json");
  os << experiment_report_json(rep).dump(1) << '\n';
}

}  // namespace aggsplit
