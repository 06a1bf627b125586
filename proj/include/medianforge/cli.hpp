#ifndef MEDIANFORGE_CLI_HPP
#define MEDIANFORGE_CLI_HPP

// Command-line front end. run_cli() is the whole program minus main(), so it
// can be driven in-process by tests.
//
// Exit codes: 0 success, 2 parse/validation error, 3 solver failure.

#include "medianforge/hull.hpp"
#include "medianforge/io.hpp"
#include "medianforge/median_solvers.hpp"
#include "medianforge/simulation.hpp"
#include "medianforge/skewness.hpp"
#include "medianforge/strategy_analysis.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace medianforge::cli {

using json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitSolver = 3;

// ---------------------------------------------------------------------------
// JSON helpers. Non-finite values are written as strings so documents stay
// valid JSON.

inline json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

inline json vec(const Vector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
  return a;
}

inline json mat(const Matrix& m) {
  json a = json::array();
  for (Index i = 0; i < m.rows(); ++i) a.push_back(vec(m.row(i).transpose()));
  return a;
}

inline std::string utc_timestamp(bool deterministic) {
  if (deterministic) return "1970-01-01T00:00:00Z";
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline json document(const std::string& command, json inputs, json results, json certificates, bool deterministic) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["command"] = command;
  doc["inputs"] = std::move(inputs);
  doc["results"] = std::move(results);
  doc["certificates"] = std::move(certificates);
  doc["provenance"] = {{"tool", "medianforge"}, {"version", kVersion}, {"timestamp", utc_timestamp(deterministic)}};
  return doc;
}

inline json to_json(const MedianResult& r) {
  return {{"grad_norm", num(r.grad_norm)},
          {"additive_bound", num(r.additive_bound)},
          {"iterations", r.iterations},
          {"degenerate_dimension", r.degenerate_dimension},
          {"at_voter_point", r.at_voter_point}};
}

inline json to_json(const SkewnessReport& s) {
  return {{"value", num(s.value)},         {"lambda_min", num(s.lambda_min)},
          {"lambda_max", num(s.lambda_max)}, {"lower_bound", num(s.lower_bound)},
          {"upper_bound", num(s.upper_bound)}, {"certified", s.certified}};
}

inline json to_json(const StrategyReport& r) {
  json cands = json::array();
  for (const auto& c : r.candidates) {
    json j = {{"path", c.path}, {"ok", c.ok}};
    if (c.ok) {
      j["vote"] = vec(c.vote);
      j["median"] = vec(c.median);
      j["distance"] = num(c.distance);
      j["additive_bound"] = num(c.additive_bound);
    } else {
      j["error"] = c.error;
    }
    cands.push_back(std::move(j));
  }
  return {{"theta0", vec(r.theta0)},
          {"truthful_median", vec(r.truthful_median)},
          {"strategic_vote", vec(r.strategic_vote)},
          {"manipulated_median", vec(r.manipulated_median)},
          {"truthful_dist", num(r.truthful_dist)},
          {"strategic_dist", num(r.strategic_dist)},
          {"gain_alpha", num(r.gain_alpha)},
          {"gain_alpha_is_lower_bound", true},
          {"exact_capture", r.exact_capture},
          {"chosen_path", r.chosen_path},
          {"preference_norm", mat(r.preference_norm)},
          {"aggregator_skew", mat(r.aggregator_skew)},
          {"candidates", std::move(cands)}};
}

inline std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string csv_num(double v) {
  if (std::isfinite(v)) return format_double(v);
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

// ---------------------------------------------------------------------------
// Seeds.

struct SeedChoice {
  std::uint64_t value = 0;
  std::string source = "default";
};

inline std::uint64_t parse_seed(const std::string& s, const std::string& what) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ParseError(what + ": '" + s + "' is not an unsigned 64-bit integer");
  }
  return v;
}

/// Flag, then the MEDIANFORGE_SEED environment variable, then 0.
inline SeedChoice resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return {*flag, "flag"};
  if (const char* env = std::getenv("MEDIANFORGE_SEED"); env != nullptr && *env != '\0') {
    return {parse_seed(env, "MEDIANFORGE_SEED"), "environment"};
  }
  return {};
}

/// Either a path to a one-row (or one-column) CSV or an inline "x,y,...".
inline Vector parse_point_arg(const std::string& arg) {
  std::error_code ec;
  Matrix m;
  if (std::filesystem::is_regular_file(arg, ec)) {
    m = read_csv(arg).rows;
  } else {
    m = parse_csv(arg, "--theta0").rows;
  }
  if (m.rows() == 1) return m.row(0).transpose();
  if (m.cols() == 1) return m.col(0);
  throw ParseError("--theta0: expected a single point, found a " + std::to_string(m.rows()) + "x" +
                   std::to_string(m.cols()) + " table");
}

inline void emit(const json& doc, const std::string& output, std::ostream& out) {
  const std::string text = doc.dump(2) + "\n";
  if (output.empty()) {
    out << text;
  } else {
    write_text_file(output, text);
  }
}

// ---------------------------------------------------------------------------
// aggregate

struct AggregateArgs {
  std::string input;
  std::string method = "gm";
  std::string skew_matrix;
  std::string weights;
  double tol = 1e-10;
  std::string output;
  bool deterministic = false;
};

inline int cmd_aggregate(const AggregateArgs& a, std::ostream& out) {
  if (!(a.tol > 0.0)) throw ParseError("--tol must be positive");
  const bool skewed = a.method == "skewed-gm";
  if (skewed && a.skew_matrix.empty()) throw ParseError("--method skewed-gm requires --skew-matrix");
  if (!skewed && !a.skew_matrix.empty()) throw ParseError("--skew-matrix is only valid with --method skewed-gm");

  const Matrix pts = read_profile(a.input);
  Vector w = Vector::Ones(pts.cols());
  if (!a.weights.empty()) {
    w = read_weights(a.weights);
    if (w.size() != pts.cols()) {
      throw ParseError(a.weights + ": " + std::to_string(w.size()) + " weights for " + std::to_string(pts.cols()) +
                       " voters");
    }
  }
  const WeightedProfile wp(pts, w);

  Point point;
  double loss = 0.0;
  json cert;
  double bound = kInf;
  if (a.method == "gm" || skewed) {
    MedianResult r;
    if (skewed) {
      const SpdMatrix sigma(read_square_matrix(a.skew_matrix));
      require_same_dim(sigma.dim(), wp.dim(), "--skew-matrix");
      r = skewed_geometric_median(wp, sigma, a.tol);
      loss = loss_eval(wp.affine_image(sigma.matrix(), Vector::Zero(wp.dim())), sigma.matrix() * r.point);
    } else {
      r = geometric_median(wp, a.tol);
      loss = r.loss;
    }
    point = r.point;
    bound = r.additive_bound;
    cert = to_json(r);
  } else if (a.method == "cw" || a.method == "avg") {
    point = a.method == "cw" ? coordinatewise_median(wp) : average(wp);
    loss = loss_eval(wp, point);
    cert = {{"grad_norm", num(min_norm_subgradient(wp, point).norm())}, {"additive_bound", num(kInf)}};
  } else {
    throw ParseError("--method must be one of gm, cw, avg, skewed-gm");
  }

  const double scale = std::max(1.0, pts.cwiseAbs().maxCoeff());
  const double hull_dist = hull_distance(pts, point);
  const double hull_tol = std::max(1e-9 * scale, std::isfinite(bound) ? bound : 0.0);
  const bool degenerate = affine_dimension(pts) <= 1;

  json inputs = {{"input", a.input},   {"method", a.method}, {"skew_matrix", a.skew_matrix},
                 {"weights", a.weights}, {"tol", a.tol},       {"voters", pts.cols()},
                 {"dim", pts.rows()}};
  json results = {{"point", vec(point)},
                  {"loss", num(loss)},
                  {"hull_distance", num(hull_dist)},
                  {"in_hull", hull_dist <= hull_tol},
                  {"degenerate_dimension", degenerate}};
  emit(document("aggregate", std::move(inputs), std::move(results), std::move(cert), a.deterministic), a.output, out);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// skewness

struct SkewnessArgs {
  std::string matrix;
  bool numeric_check = false;
  std::string output;
  bool deterministic = false;
};

inline int cmd_skewness(const SkewnessArgs& a, std::ostream& out) {
  const SpdMatrix s(read_square_matrix(a.matrix));
  const SkewnessReport rep = skewness(s);
  json results = to_json(rep);
  json cert = json::object();
  if (a.numeric_check) {
    const NumericSkewness n = skewness_numeric(s);
    results["numeric_value"] = num(n.value);
    results["numeric_maximizer"] = vec(n.maximizer);
    results["numeric_gap"] = num(std::abs(n.value - rep.value));
    cert["numeric_starts"] = n.starts;
  }
  json inputs = {{"matrix", a.matrix}, {"numeric_check", a.numeric_check}, {"dim", s.dim()}};
  emit(document("skewness", std::move(inputs), std::move(results), std::move(cert), a.deterministic), a.output, out);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// best-response

struct BestResponseArgs {
  std::string input;
  std::string theta0;
  std::string pref_matrix;
  std::string skew_matrix;
  int restarts = 5;
  std::optional<std::uint64_t> seed;
  std::string preset;
  double x = 20.0;
  std::int64_t v = 2000;
  double tol = 1e-10;
  std::string output;
  bool deterministic = false;
};

inline int cmd_best_response(const BestResponseArgs& a, std::ostream& out) {
  if (a.restarts < 1) throw ParseError("--restarts must be >= 1");
  if (!(a.tol > 0.0)) throw ParseError("--tol must be positive");
  const SeedChoice seed = resolve_seed(a.seed);

  std::optional<VoterProfile> honest;
  Vector theta0;
  BestResponseOptions bo;
  bo.restarts = a.restarts;
  bo.seed = seed.value;
  bo.tol_grad = a.tol;
  json preset = nullptr;

  if (!a.preset.empty()) {
    if (a.preset != "thm1") throw ParseError("--preset must be thm1");
    if (!a.input.empty() || !a.theta0.empty()) throw ParseError("--preset replaces --input and --theta0");
    const Theorem1Instance inst = build_theorem1_instance(a.x, a.v);
    honest = inst.profile;
    theta0 = inst.theta0;
    bo.extra_votes.push_back(inst.strategic_vote);
    preset = {{"name", "thm1"},
              {"X", a.x},
              {"V", a.v},
              {"alpha_V", num(inst.alpha_v)},
              {"g_V", vec(inst.g_v)},
              {"construction_vote", vec(inst.strategic_vote)},
              {"gain_floor", num((a.x * a.x - 8.0 * a.x + 1.0) / (8.0 * a.x))},
              {"ratio_limit", num((1.0 + a.x * a.x) / (4.0 * a.x))}};
  } else {
    if (a.input.empty() || a.theta0.empty()) throw ParseError("best-response needs --input and --theta0 (or --preset)");
    honest = VoterProfile(read_profile(a.input));
    theta0 = parse_point_arg(a.theta0);
    if (theta0.size() != honest->dim()) {
      throw ParseError("--theta0 has " + std::to_string(theta0.size()) + " coordinates, profile has dimension " +
                       std::to_string(honest->dim()));
    }
  }
  const Index d = honest->dim();
  const SpdMatrix pref = a.pref_matrix.empty() ? SpdMatrix::identity(d) : SpdMatrix(read_square_matrix(a.pref_matrix));
  require_same_dim(pref.dim(), d, "--pref-matrix");

  StrategyReport rep;
  if (a.skew_matrix.empty()) {
    rep = best_response(theta0, *honest, pref, bo);
  } else {
    const SpdMatrix sigma(read_square_matrix(a.skew_matrix));
    require_same_dim(sigma.dim(), d, "--skew-matrix");
    rep = best_response_skewed(theta0, *honest, pref, sigma, bo);
  }

  bool any_path = rep.exact_capture;
  for (const auto& c : rep.candidates) any_path |= c.ok && c.path != "truthful" && c.path.rfind("extra:", 0) != 0;

  json results = to_json(rep);
  if (!preset.is_null()) {
    for (const auto& c : rep.candidates) {
      if (c.path == "extra:0" && c.ok) {
        preset["construction_ratio"] = num(rep.truthful_dist / c.distance);
        preset["construction_gain"] = num(rep.truthful_dist / c.distance - 1.0);
      }
    }
    preset["truthful_dist_scaled"] = num(rep.truthful_dist * std::pow(static_cast<double>(a.v), 1.5));
    results["preset"] = preset;
  }
  const AchievableSet achievable(*honest);
  results["manipulated_median_achievable"] = achievable.contains(rep.manipulated_median, 1e-9);
  results["manipulated_median_scaled_gradient"] =
      num(achievable.gradient_norm(rep.manipulated_median) / achievable.radius());
  json cert = {{"eval_tol_grad", num(rep.eval_tol_grad)},
               {"truthful_additive_bound", num(rep.candidates.front().additive_bound)}};
  for (const auto& c : rep.candidates) {
    if (c.path == rep.chosen_path) cert["manipulated_additive_bound"] = num(c.additive_bound);
  }
  json inputs = {{"input", a.input},           {"theta0", a.theta0},        {"pref_matrix", a.pref_matrix},
                 {"skew_matrix", a.skew_matrix}, {"restarts", a.restarts},    {"seed", seed.value},
                 {"seed_source", seed.source},   {"preset", a.preset},        {"tol", a.tol}};
  emit(document("best-response", std::move(inputs), std::move(results), std::move(cert), a.deterministic), a.output,
       out);
  return any_path ? kExitOk : kExitSolver;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string config;
  int parallel = 1;
  std::optional<std::uint64_t> seed;
  std::string output;
  bool deterministic = false;
};

namespace detail {

template <class T>
T field(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& ex) {
    throw ParseError(std::string("config: field '") + key + "': " + ex.what());
  }
}

inline PreferenceDistribution parse_distribution(const json& cfg) {
  if (!cfg.contains("distribution")) throw ParseError("config: missing 'distribution'");
  const json& j = cfg.at("distribution");
  if (!j.is_object()) throw ParseError("config: 'distribution' must be an object");
  const auto kind = field<std::string>(j, "kind", "");
  PreferenceDistribution p;
  if (kind == "isotropic-gaussian") {
    p = PreferenceDistribution::isotropic(field<Index>(j, "dim", 5));
  } else if (kind == "diagonal-gaussian") {
    const auto s = field<std::vector<double>>(j, "sigma", {});
    if (s.empty()) throw ParseError("config: diagonal-gaussian needs 'sigma'");
    p = PreferenceDistribution::diagonal(Eigen::Map<const Vector>(s.data(), static_cast<Index>(s.size())));
  } else if (kind == "four-corner") {
    p = PreferenceDistribution::four_corner(field<double>(j, "X", 8.0));
  } else if (kind == "uniform-ball") {
    p = PreferenceDistribution::uniform_ball(field<Index>(j, "dim", 2), field<double>(j, "radius", 1.0));
  } else {
    throw ParseError("config: distribution kind '" + kind +
                     "' is not one of isotropic-gaussian, diagonal-gaussian, four-corner, uniform-ball");
  }
  try {
    p.validate();
  } catch (const Error& ex) {
    throw ParseError(std::string("config: ") + ex.what());
  }
  return p;
}

inline json distribution_json(const PreferenceDistribution& p) {
  json j = {{"kind", to_string(p.kind)}, {"dim", p.dim}};
  if (p.kind == DistributionKind::diagonal_gaussian) j["sigma"] = vec(p.sigma);
  if (p.kind == DistributionKind::four_corner) j["X"] = p.x;
  if (p.kind == DistributionKind::uniform_ball) j["radius"] = p.radius;
  return j;
}

inline ExperimentConfig parse_experiment(const json& cfg, std::uint64_t seed) {
  ExperimentConfig c;
  c.distribution = parse_distribution(cfg);
  c.v_grid = field<std::vector<std::int64_t>>(cfg, "V_grid", {});
  c.trials = field<int>(cfg, "trials", 1);
  c.seed = seed;
  c.epsilon = field<double>(cfg, "epsilon", 0.1);
  c.delta = field<double>(cfg, "delta", 0.05);
  try {
    c.validate();
  } catch (const Error& ex) {
    throw ParseError(std::string("config: ") + ex.what());
  }
  return c;
}

inline BestResponseOptions parse_best_response(const json& cfg, BestResponseOptions bo) {
  if (!cfg.contains("best_response")) return bo;
  const json& j = cfg.at("best_response");
  if (!j.is_object()) throw ParseError("config: 'best_response' must be an object");
  bo.restarts = field<int>(j, "restarts", bo.restarts);
  bo.black_box_evals_per_vertex = field<int>(j, "black_box_evals_per_vertex", bo.black_box_evals_per_vertex);
  bo.use_black_box = field<bool>(j, "use_black_box", bo.use_black_box);
  bo.use_projection = field<bool>(j, "use_projection", bo.use_projection);
  bo.tol_grad = field<double>(j, "tol_grad", bo.tol_grad);
  if (bo.restarts < 1 || bo.black_box_evals_per_vertex < 1 || !(bo.tol_grad > 0.0)) {
    throw ParseError("config: best_response settings must be positive");
  }
  return bo;
}

struct SimulationOutput {
  json results;
  std::string csv;
  int total = 0;
  int completed = 0;
};

inline SimulationOutput run_theorem1(const json& cfg, int threads) {
  Theorem1Options opt;
  opt.threads = threads;
  opt.run_best_response = field<bool>(cfg, "run_best_response", true);
  opt.best_response = parse_best_response(cfg, opt.best_response);
  const auto xs = field<std::vector<double>>(cfg, "X_grid", {20.0});
  const auto vs = field<std::vector<std::int64_t>>(cfg, "V_grid", {500, 1000, 2000, 4000});
  if (xs.empty() || vs.empty()) throw ParseError("config: X_grid and V_grid must be non-empty");
  for (double x : xs) {
    if (!(x >= 8.0)) throw ParseError("config: X_grid entries must be >= 8");
  }
  for (auto v : vs) {
    if (v < 1) throw ParseError("config: V_grid entries must be >= 1");
  }
  const auto recs = theorem1_experiment(xs, vs, opt);
  SimulationOutput o;
  o.csv =
      "X,V,ok,alpha_V,truthful_dist,truthful_dist_scaled,construction_dist,construction_ratio,construction_gain,"
      "construction_achievable,gain_floor,ratio_limit,best_response_gain,best_response_ratio,best_response_path,"
      "error\n";
  json rows = json::array();
  for (const auto& r : recs) {
    ++o.total;
    o.completed += r.ok ? 1 : 0;
    o.csv += csv_num(r.x) + "," + std::to_string(r.v) + "," + (r.ok ? "1" : "0") + "," + csv_num(r.alpha_v) + "," +
             csv_num(r.truthful_dist) + "," + csv_num(r.truthful_scaled) + "," + csv_num(r.construction_dist) + "," +
             csv_num(r.construction_ratio) + "," + csv_num(r.construction_gain) + "," +
             (r.construction_achievable ? "1" : "0") + "," + csv_num(r.gain_floor) + "," + csv_num(r.ratio_limit) +
             "," + csv_num(r.best_response_gain) + "," + csv_num(r.best_response_ratio) + "," +
             csv_cell(r.best_response_path) + "," + csv_cell(r.error) + "\n";
    rows.push_back({{"X", r.x},
                    {"V", r.v},
                    {"ok", r.ok},
                    {"error", r.error},
                    {"truthful_dist", num(r.truthful_dist)},
                    {"truthful_dist_scaled", num(r.truthful_scaled)},
                    {"construction_ratio", num(r.construction_ratio)},
                    {"construction_gain", num(r.construction_gain)},
                    {"construction_achievable", r.construction_achievable},
                    {"gain_floor", num(r.gain_floor)},
                    {"ratio_limit", num(r.ratio_limit)},
                    {"best_response_gain", num(r.best_response_gain)},
                    {"best_response_path", r.best_response_path}});
  }
  o.results = {{"cases", std::move(rows)}};
  return o;
}

inline SimulationOutput run_asymptotic(const json& cfg, std::uint64_t seed, int threads) {
  const ExperimentConfig ec = parse_experiment(cfg, seed);
  AsymptoticOptions opt;
  opt.threads = threads;
  opt.gammas = field<std::vector<double>>(cfg, "gammas", opt.gammas);
  if (opt.gammas.empty()) throw ParseError("config: gammas must be non-empty");
  opt.compare_isotropic_skew = field<bool>(cfg, "compare_isotropic_skew", false);
  opt.skew_pilot_size = field<std::int64_t>(cfg, "skew_pilot_size", opt.skew_pilot_size);
  opt.best_response.restarts = 2;
  opt.best_response.black_box_evals_per_vertex = 30;
  opt.best_response = parse_best_response(cfg, opt.best_response);
  if (cfg.contains("preference_matrix")) {
    const auto rows = field<std::vector<std::vector<double>>>(cfg, "preference_matrix", {});
    Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows.size()) throw ParseError("config: preference_matrix must be square");
      for (std::size_t k = 0; k < rows.size(); ++k) m(static_cast<Index>(i), static_cast<Index>(k)) = rows[i][k];
    }
    if (m.rows() != ec.distribution.dim) throw ParseError("config: preference_matrix dimension mismatch");
    try {
      (void)SpdMatrix(m);
    } catch (const Error& ex) {
      throw ParseError(std::string("config: preference_matrix: ") + ex.what());
    }
    opt.preference = m;
  }
  const AsymptoticReport rep = asymptotic_experiment(ec, opt);

  SimulationOutput o;
  o.csv = "V,trial,seed,ok";
  for (std::size_t g = 0; g < opt.gammas.size(); ++g) o.csv += ",gain_gamma" + std::to_string(g);
  o.csv += ",max_gain,skew,skew_numeric,within_bound";
  if (opt.compare_isotropic_skew) o.csv += ",max_gain_skewed,skew_skewed";
  o.csv += ",error\n";
  for (const auto& t : rep.trials) {
    ++o.total;
    o.completed += t.ok ? 1 : 0;
    o.csv += std::to_string(t.v) + "," + std::to_string(t.trial) + "," + std::to_string(t.seed) + "," +
             (t.ok ? "1" : "0");
    for (std::size_t g = 0; g < opt.gammas.size(); ++g) {
      o.csv += "," + (g < t.gains.size() ? csv_num(t.gains[g]) : std::string());
    }
    o.csv += "," + csv_num(t.max_gain) + "," + csv_num(t.skew) + "," + csv_num(t.skew_numeric) + "," +
             (t.within_bound ? "1" : "0");
    if (opt.compare_isotropic_skew) o.csv += "," + csv_num(t.max_gain_skewed) + "," + csv_num(t.skew_skewed);
    o.csv += "," + csv_cell(t.error) + "\n";
  }
  json sums = json::array();
  for (const auto& s : rep.summary) {
    json j = {{"V", s.v},
              {"completed", s.completed},
              {"failed", s.failed},
              {"max_gain", num(s.max_gain)},
              {"mean_gain", num(s.mean_gain)},
              {"q50", num(s.q50)},
              {"q90", num(s.q90)},
              {"q95", num(s.q95)},
              {"mean_skew", num(s.mean_skew)},
              {"max_closed_vs_numeric_skew_gap", num(s.max_skew_gap)},
              {"fraction_within_skew_plus_epsilon", num(s.fraction_within)},
              {"passes", s.passes}};
    if (opt.compare_isotropic_skew) {
      j["mean_gain_skewed"] = num(s.mean_gain_skewed);
      j["max_gain_skewed"] = num(s.max_gain_skewed);
      j["fraction_skewed_lower"] = num(s.fraction_skewed_lower);
    }
    sums.push_back(std::move(j));
  }
  o.results = {{"distribution", distribution_json(ec.distribution)},
               {"V_grid", ec.v_grid},
               {"trials", ec.trials},
               {"epsilon", ec.epsilon},
               {"delta", ec.delta},
               {"gammas", opt.gammas},
               {"preference_matrix", mat(rep.preference)},
               {"gain_is_lower_bound", true},
               {"summary", std::move(sums)}};
  if (rep.sigma) o.results["sigma"] = mat(*rep.sigma);
  return o;
}

inline SimulationOutput run_convergence(const json& cfg, std::uint64_t seed, int threads) {
  const ExperimentConfig ec = parse_experiment(cfg, seed);
  const ConvergenceReport rep = convergence_diagnostics(ec, threads);
  SimulationOutput o;
  o.csv = "V,trial,median_error,hessian_deviation\n";
  json rows = json::array();
  for (const auto& r : rep.rows) {
    for (std::size_t k = 0; k < r.median_errors.size(); ++k) {
      o.csv += std::to_string(r.v) + "," + std::to_string(k) + "," + csv_num(r.median_errors[k]) + "," +
               csv_num(r.hessian_deviations[k]) + "\n";
    }
    o.total += ec.trials;
    o.completed += r.completed;
    rows.push_back({{"V", r.v},
                    {"completed", r.completed},
                    {"median_error", num(r.median_error)},
                    {"hessian_deviation", num(r.hessian_deviation)}});
  }
  o.results = {{"distribution", distribution_json(ec.distribution)},
               {"V_ref", rep.v_ref},
               {"g_ref", vec(rep.g_ref)},
               {"rows", std::move(rows)},
               {"median_slope", num(rep.median_slope)},
               {"hessian_slope", num(rep.hessian_slope)},
               {"median_slope_ok", rep.median_slope_ok},
               {"hessian_monotone", rep.hessian_monotone}};
  return o;
}

/// Triangle on the unit circle: median at 0 and Delta = 1.
inline VoterProfile simplex_triangle() {
  Matrix pts(2, 3);
  pts << 1.0, -0.5, -0.5, 0.0, std::sqrt(3.0) / 2.0, -std::sqrt(3.0) / 2.0;
  return VoterProfile(pts);
}

inline SimulationOutput run_byzantine(const json& cfg, std::uint64_t seed, int threads) {
  ByzantineConfig bc;
  bc.v_truthful = field<std::int64_t>(cfg, "V_T", 3);
  bc.v_strategic = field<std::int64_t>(cfg, "V_S", 1);
  bc.trials = field<int>(cfg, "trials", 500);
  bc.seed = seed;
  bc.threads = threads;
  if (bc.v_strategic < 0 || bc.v_strategic >= bc.v_truthful) throw ParseError("config: need 0 <= V_S < V_T");
  if (bc.trials < 1) throw ParseError("config: trials must be >= 1");
  const auto profile = field<std::string>(cfg, "profile", "sampled");
  if (profile == "simplex") {
    if (bc.v_truthful != 3) throw ParseError("config: profile 'simplex' needs V_T = 3");
    bc.fixed_truthful = simplex_triangle();
  } else if (profile == "sampled") {
    bc.distribution = parse_distribution(cfg);
  } else {
    throw ParseError("config: profile must be 'simplex' or 'sampled'");
  }
  const ByzantineReport rep = byzantine_experiment(bc);
  SimulationOutput o;
  o.csv = "trial,seed,strategy,ok,delta,radius,displacement,within,error\n";
  for (const auto& t : rep.trials) {
    ++o.total;
    o.completed += t.ok ? 1 : 0;
    o.csv += std::to_string(t.trial) + "," + std::to_string(t.seed) + "," + to_string(t.strategy) + "," +
             (t.ok ? "1" : "0") + "," + csv_num(t.delta) + "," + csv_num(t.radius) + "," + csv_num(t.displacement) +
             "," + (t.within ? "1" : "0") + "," + csv_cell(t.error) + "\n";
  }
  const double rho = static_cast<double>(bc.v_strategic) / static_cast<double>(bc.v_truthful);
  o.results = {{"V_T", bc.v_truthful},
               {"V_S", bc.v_strategic},
               {"profile", profile},
               {"radius_factor", num(1.0 / std::sqrt(1.0 - rho * rho))},
               {"max_displacement", num(rep.max_displacement)},
               {"max_displacement_over_radius", num(rep.max_ratio)},
               {"violations", rep.violations},
               {"failed", rep.failed},
               {"all_within", rep.all_within}};
  return o;
}

}  // namespace detail

inline int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  if (a.parallel < 1) throw ParseError("--parallel must be >= 1");
  json cfg;
  try {
    cfg = json::parse(read_text_file(a.config));
  } catch (const json::parse_error& ex) {
    throw ParseError(a.config + ": " + ex.what());
  }
  if (!cfg.is_object()) throw ParseError(a.config + ": top level must be a JSON object");
  const auto experiment = detail::field<std::string>(cfg, "experiment", "");
  std::optional<std::uint64_t> seed_flag = a.seed;
  if (!seed_flag && cfg.contains("seed")) seed_flag = detail::field<std::uint64_t>(cfg, "seed", 0);
  SeedChoice seed = resolve_seed(seed_flag);
  if (!a.seed && cfg.contains("seed")) seed.source = "config";

  detail::SimulationOutput o;
  if (experiment == "theorem1") {
    o = detail::run_theorem1(cfg, a.parallel);
  } else if (experiment == "asymptotic") {
    o = detail::run_asymptotic(cfg, seed.value, a.parallel);
  } else if (experiment == "convergence") {
    o = detail::run_convergence(cfg, seed.value, a.parallel);
  } else if (experiment == "byzantine") {
    o = detail::run_byzantine(cfg, seed.value, a.parallel);
  } else {
    throw ParseError(a.config + ": 'experiment' must be one of asymptotic, theorem1, byzantine, convergence");
  }

  const double fraction = o.total > 0 ? static_cast<double>(o.completed) / o.total : 0.0;
  json inputs = {{"config", a.config}, {"experiment", experiment}, {"seed", seed.value},
                 {"seed_source", seed.source}, {"settings", cfg}};
  json cert = {{"trials_total", o.total}, {"trials_completed", o.completed}, {"completed_fraction", num(fraction)}};
  const json doc = document("simulate", std::move(inputs), std::move(o.results), std::move(cert), a.deterministic);
  if (a.output.empty()) {
    emit(doc, "", out);
  } else {
    std::error_code ec;
    std::filesystem::create_directories(a.output, ec);
    if (ec) throw ParseError(a.output + ": cannot create directory: " + ec.message());
    const std::filesystem::path dir(a.output);
    emit(doc, (dir / (experiment + ".json")).string(), out);
    write_text_file((dir / (experiment + "_trials.csv")).string(), o.csv);
  }
  return fraction >= 0.9 ? kExitOk : kExitSolver;
}

// ---------------------------------------------------------------------------

inline int exit_code_for(Errc c) {
  switch (c) {
    case Errc::dimension_mismatch:
    case Errc::not_spd:
    case Errc::invalid_argument:
    case Errc::degenerate_dimension:
    case Errc::majority_attack: return kExitInvalid;
    default: return kExitSolver;
  }
}

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Geometric-median aggregation and manipulability analysis", "medianforge"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  AggregateArgs agg;
  auto* sa = app.add_subcommand("aggregate", "Aggregate a profile");
  sa->add_option("--input", agg.input, "Profile CSV, one voter per row")->required();
  sa->add_option("--method", agg.method, "gm | cw | avg | skewed-gm")
      ->check(CLI::IsMember({"gm", "cw", "avg", "skewed-gm"}));
  sa->add_option("--skew-matrix", agg.skew_matrix, "Sigma for skewed-gm (square CSV)");
  sa->add_option("--weights", agg.weights, "One positive weight per voter");
  sa->add_option("--tol", agg.tol, "Gradient-norm tolerance");
  sa->add_option("--output", agg.output, "Report path (stdout if omitted)");
  sa->add_flag("--deterministic", agg.deterministic, "Zero the report timestamp");

  SkewnessArgs sk;
  auto* ss = app.add_subcommand("skewness", "Skewness of an SPD matrix");
  ss->add_option("--matrix", sk.matrix, "Square CSV")->required();
  ss->add_flag("--numeric-check", sk.numeric_check, "Cross-check by sphere maximization");
  ss->add_option("--output", sk.output, "Report path (stdout if omitted)");
  ss->add_flag("--deterministic", sk.deterministic, "Zero the report timestamp");

  BestResponseArgs br;
  std::string br_seed;
  auto* sb = app.add_subcommand("best-response", "Best strategic vote against honest voters");
  sb->add_option("--input", br.input, "Honest profile CSV");
  sb->add_option("--theta0", br.theta0, "Preferred point: inline x,y,... or CSV file");
  sb->add_option("--pref-matrix", br.pref_matrix, "Preference matrix S (square CSV)");
  sb->add_option("--skew-matrix", br.skew_matrix, "Aggregate with the Sigma-skewed median");
  sb->add_option("--restarts", br.restarts, "Black-box restarts");
  sb->add_option("--seed", br_seed, "Seed (falls back to MEDIANFORGE_SEED)");
  sb->add_option("--preset", br.preset, "Built-in instance: thm1");
  sb->add_option("--X", br.x, "Preset corner abscissa");
  sb->add_option("--V", br.v, "Preset copies per corner");
  sb->add_option("--tol", br.tol, "Gradient-norm tolerance");
  sb->add_option("--output", br.output, "Report path (stdout if omitted)");
  sb->add_flag("--deterministic", br.deterministic, "Zero the report timestamp");

  SimulateArgs sim;
  std::string sim_seed;
  auto* sm = app.add_subcommand("simulate", "Run an experiment from a JSON config");
  sm->add_option("--config", sim.config, "Experiment config (JSON)")->required();
  sm->add_option("--parallel", sim.parallel, "Worker threads");
  sm->add_option("--seed", sim_seed, "Override the config seed");
  sm->add_option("--output", sim.output, "Output directory (report to stdout if omitted)");
  sm->add_flag("--deterministic", sim.deterministic, "Zero the report timestamp");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*sa) return cmd_aggregate(agg, out);
    if (*ss) return cmd_skewness(sk, out);
    if (*sb) {
      if (!br_seed.empty()) br.seed = parse_seed(br_seed, "--seed");
      return cmd_best_response(br, out);
    }
    if (*sm) {
      if (!sim_seed.empty()) sim.seed = parse_seed(sim_seed, "--seed");
      return cmd_simulate(sim, out);
    }
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitInvalid;
}

}  // namespace medianforge::cli

#endif  // MEDIANFORGE_CLI_HPP
