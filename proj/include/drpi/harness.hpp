#pragma once

// Experiment harness: config schema, batch episodes, summary statistics and
// file outputs.
//
// Config files are flat "key = value" lines with dotted sections (model.*,
// cost.*, run.*, robust.*). '#' starts a comment. Lists are comma separated.
// Unknown keys are errors.

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "drpi/controller.hpp"
#include "drpi/costs.hpp"
#include "drpi/errors.hpp"
#include "drpi/models.hpp"
#include "drpi/uncertainty.hpp"

namespace drpi::harness {

/// "%.17g" formatting used for every float the harness writes.
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct ExperimentConfig {
  // model.*
  std::string model_family = "double_integrator";
  double model_a = 0.0;
  double model_b = 1.0;
  double model_sigma = 1.0;

  // cost.*
  std::string cost_kind = "navigation";
  NavigationCostParams nav;
  QuadraticCostParams quad;
  double control_weight = 1e-3;

  // run.*
  std::vector<double> x0;
  std::vector<double> true_mu{0.3, -0.3};
  double dt = 0.05;
  double T = 25.0;
  int samples = 1000;
  int episodes = 100;
  std::string scheme = "both";
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out = "out";
  bool save_trajectories = false;

  // robust.*
  RobustnessConfig robust{0.0, 0.1, GammaSchedule::inverse_k, 2};
  SearchConfig search;

  int horizon() const { return static_cast<int>(std::lround(T / dt)); }

  std::vector<Scheme> schemes() const {
    if (scheme == "drpi") return {Scheme::drpi};
    if (scheme == "pic") return {Scheme::pic};
    return {Scheme::pic, Scheme::drpi};
  }

  DynamicsModel model() const {
    ModelParams params;
    if (model_family == "scalar_lq") params = {{"a", model_a}, {"b", model_b}, {"sigma", model_sigma}};
    return make_model(model_family, params);
  }

  CostModel cost(int control_dim) const {
    const Eigen::MatrixXd r = control_weight * Eigen::MatrixXd::Identity(control_dim, control_dim);
    if (cost_kind == "quadratic") return CostModel::quadratic(quad, r);
    return CostModel::navigation(nav, r);
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_number(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a finite number, got '" + text + "'");
  }
}

inline long long parse_integer(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an integer, got '" + text + "'");
  }
}

inline std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(key, trim(item)));
  if (out.empty()) throw ConfigError(key + ": expected a comma separated list");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

inline Rect parse_rect(const std::string& key, const std::string& text) {
  const auto v = parse_list(key, text);
  if (v.size() != 4) throw ConfigError(key + ": expected x_min,x_max,y_min,y_max");
  return {v[0], v[1], v[2], v[3]};
}

inline std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt_double(v[i]);
  return s;
}

inline const char* schedule_name(GammaSchedule s) {
  switch (s) {
    case GammaSchedule::fixed:
      return "fixed";
    case GammaSchedule::inverse_k:
      return "inverse_k";
    case GammaSchedule::finite_sample:
      return "finite_sample";
  }
  return "fixed";
}

inline std::vector<double> default_initial_state(const std::string& family) {
  if (family == "double_integrator") return {-3.5, 2.5, 0.0, 0.0};
  if (family == "unicycle") return {-3.5, 2.5, -std::numbers::pi / 4};
  return {1.0};
}

}  // namespace detail

/// Apply one key = value assignment.
inline void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  using namespace detail;
  static const std::map<std::string, std::function<void(ExperimentConfig&, const std::string&, const std::string&)>>
      setters = {
          {"model.family", [](auto& c, auto&, auto& v) { c.model_family = v; }},
          {"model.a", [](auto& c, auto& k, auto& v) { c.model_a = parse_number(k, v); }},
          {"model.b", [](auto& c, auto& k, auto& v) { c.model_b = parse_number(k, v); }},
          {"model.sigma", [](auto& c, auto& k, auto& v) { c.model_sigma = parse_number(k, v); }},
          {"cost.kind", [](auto& c, auto&, auto& v) { c.cost_kind = v; }},
          {"cost.c1", [](auto& c, auto& k, auto& v) { c.nav.c1 = parse_number(k, v); }},
          {"cost.c2", [](auto& c, auto& k, auto& v) { c.nav.c2 = parse_number(k, v); }},
          {"cost.c3", [](auto& c, auto& k, auto& v) { c.nav.c3 = parse_number(k, v); }},
          {"cost.terminal_weight", [](auto& c, auto& k, auto& v) { c.nav.terminal_weight = parse_number(k, v); }},
          {"cost.r", [](auto& c, auto& k, auto& v) { c.control_weight = parse_number(k, v); }},
          {"cost.target",
           [](auto& c, auto& k, auto& v) {
             const auto t = parse_list(k, v);
             if (t.size() != 2) throw ConfigError(k + ": expected two coordinates");
             c.nav.target = Eigen::Vector2d(t[0], t[1]);
           }},
          {"cost.goal_radius", [](auto& c, auto& k, auto& v) { c.nav.goal_radius = parse_number(k, v); }},
          {"cost.obstacle", [](auto& c, auto& k, auto& v) { c.nav.obstacle = parse_rect(k, v); }},
          {"cost.boundary", [](auto& c, auto& k, auto& v) { c.nav.boundary = parse_rect(k, v); }},
          {"cost.q_x", [](auto& c, auto& k, auto& v) { c.quad.state_weight = parse_number(k, v); }},
          {"cost.q_terminal", [](auto& c, auto& k, auto& v) { c.quad.terminal_weight = parse_number(k, v); }},
          {"run.x0", [](auto& c, auto& k, auto& v) { c.x0 = parse_list(k, v); }},
          {"run.true_mu", [](auto& c, auto& k, auto& v) { c.true_mu = parse_list(k, v); }},
          {"run.dt", [](auto& c, auto& k, auto& v) { c.dt = parse_number(k, v); }},
          {"run.T", [](auto& c, auto& k, auto& v) { c.T = parse_number(k, v); }},
          {"run.M", [](auto& c, auto& k, auto& v) { c.samples = static_cast<int>(parse_integer(k, v)); }},
          {"run.episodes", [](auto& c, auto& k, auto& v) { c.episodes = static_cast<int>(parse_integer(k, v)); }},
          {"run.scheme", [](auto& c, auto&, auto& v) { c.scheme = v; }},
          {"run.seed", [](auto& c, auto& k, auto& v) { c.seed = static_cast<std::uint64_t>(parse_integer(k, v)); }},
          {"run.workers", [](auto& c, auto& k, auto& v) { c.workers = static_cast<int>(parse_integer(k, v)); }},
          {"run.out", [](auto& c, auto&, auto& v) { c.out = v; }},
          {"run.save_trajectories", [](auto& c, auto& k, auto& v) { c.save_trajectories = parse_bool(k, v); }},
          {"robust.schedule",
           [](auto& c, auto& k, auto& v) {
             if (v == "fixed") c.robust.schedule = GammaSchedule::fixed;
             else if (v == "inverse_k") c.robust.schedule = GammaSchedule::inverse_k;
             else if (v == "finite_sample") c.robust.schedule = GammaSchedule::finite_sample;
             else throw ConfigError(k + ": expected fixed, inverse_k or finite_sample");
           }},
          {"robust.gamma", [](auto& c, auto& k, auto& v) { c.robust.gamma = parse_number(k, v); }},
          {"robust.epsilon", [](auto& c, auto& k, auto& v) { c.robust.epsilon = parse_number(k, v); }},
          {"robust.grid_points",
           [](auto& c, auto& k, auto& v) { c.search.grid_points = static_cast<int>(parse_integer(k, v)); }},
          {"robust.refine_tolerance",
           [](auto& c, auto& k, auto& v) { c.search.refine_tolerance = parse_number(k, v); }},
          {"robust.theta_max_multiplier",
           [](auto& c, auto& k, auto& v) { c.search.theta_max_multiplier = parse_number(k, v); }},
      };
  const auto it = setters.find(key);
  if (it == setters.end()) throw ConfigError(key + ": unknown key");
  it->second(cfg, key, value);
}

/// Check cross-field invariants and fill model-dependent defaults.
inline void finalize(ExperimentConfig& cfg) {
  if (cfg.model_family != "double_integrator" && cfg.model_family != "unicycle" && cfg.model_family != "scalar_lq")
    throw ConfigError("model.family: unknown model '" + cfg.model_family + "'");
  if (cfg.cost_kind != "navigation" && cfg.cost_kind != "quadratic")
    throw ConfigError("cost.kind: expected navigation or quadratic");
  if (cfg.scheme != "drpi" && cfg.scheme != "pic" && cfg.scheme != "both")
    throw ConfigError("run.scheme: expected drpi, pic or both");
  if (!(cfg.dt > 0.0)) throw ConfigError("run.dt: must be positive");
  if (!(cfg.T > 0.0)) throw ConfigError("run.T: must be positive");
  const double ratio = cfg.T / cfg.dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio || std::round(ratio) < 1)
    throw ConfigError("run.T, run.dt: T / dt must be a positive integer");
  if (cfg.samples < 1) throw ConfigError("run.M: must be >= 1");
  if (cfg.episodes < 1) throw ConfigError("run.episodes: must be >= 1");
  if (cfg.workers < 1) throw ConfigError("run.workers: must be >= 1");
  if (cfg.episodes >= (1 << 24)) throw ConfigError("run.episodes: too many episodes");

  DynamicsModel model = [&] {
    try {
      return cfg.model();
    } catch (const Error& e) {
      throw ConfigError(std::string("model: ") + e.what());
    }
  }();
  if (cfg.x0.empty()) cfg.x0 = detail::default_initial_state(cfg.model_family);
  if (static_cast<int>(cfg.x0.size()) != model.state_dim())
    throw ConfigError("run.x0: expected " + std::to_string(model.state_dim()) + " entries");
  if (static_cast<int>(cfg.true_mu.size()) != model.noise_dim())
    throw ConfigError("run.true_mu: expected " + std::to_string(model.noise_dim()) + " entries");
  if (cfg.cost_kind == "navigation" && model.state_dim() < 2)
    throw ConfigError("cost.kind: navigation cost needs a planar model");
  cfg.robust.p = model.noise_dim();
  try {
    cfg.robust.validate();
    (void)cfg.cost(model.control_dim());
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("cost/robust: ") + e.what());
  }
  if (cfg.search.grid_points < 3) throw ConfigError("robust.grid_points: must be >= 3");
  if (!(cfg.search.refine_tolerance > 0.0)) throw ConfigError("robust.refine_tolerance: must be positive");
  if (!(cfg.search.theta_max_multiplier > 1.0)) throw ConfigError("robust.theta_max_multiplier: must exceed 1");
}

inline ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    set_config_value(cfg, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  finalize(cfg);
  return cfg;
}

inline ExperimentConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in);
}

/// Canonical text form: every key, sorted, floats at 17 significant digits.
inline std::string emit_config(const ExperimentConfig& cfg) {
  using detail::join;
  const auto rect = [](const Rect& r) { return join({r.x_min, r.x_max, r.y_min, r.y_max}); };
  std::map<std::string, std::string> kv = {
      {"cost.boundary", rect(cfg.nav.boundary)},
      {"cost.c1", fmt_double(cfg.nav.c1)},
      {"cost.c2", fmt_double(cfg.nav.c2)},
      {"cost.c3", fmt_double(cfg.nav.c3)},
      {"cost.goal_radius", fmt_double(cfg.nav.goal_radius)},
      {"cost.kind", cfg.cost_kind},
      {"cost.obstacle", rect(cfg.nav.obstacle)},
      {"cost.q_terminal", fmt_double(cfg.quad.terminal_weight)},
      {"cost.q_x", fmt_double(cfg.quad.state_weight)},
      {"cost.r", fmt_double(cfg.control_weight)},
      {"cost.target", join({cfg.nav.target[0], cfg.nav.target[1]})},
      {"cost.terminal_weight", fmt_double(cfg.nav.terminal_weight)},
      {"model.a", fmt_double(cfg.model_a)},
      {"model.b", fmt_double(cfg.model_b)},
      {"model.family", cfg.model_family},
      {"model.sigma", fmt_double(cfg.model_sigma)},
      {"robust.epsilon", fmt_double(cfg.robust.epsilon)},
      {"robust.gamma", fmt_double(cfg.robust.gamma)},
      {"robust.grid_points", std::to_string(cfg.search.grid_points)},
      {"robust.refine_tolerance", fmt_double(cfg.search.refine_tolerance)},
      {"robust.schedule", detail::schedule_name(cfg.robust.schedule)},
      {"robust.theta_max_multiplier", fmt_double(cfg.search.theta_max_multiplier)},
      {"run.M", std::to_string(cfg.samples)},
      {"run.T", fmt_double(cfg.T)},
      {"run.dt", fmt_double(cfg.dt)},
      {"run.episodes", std::to_string(cfg.episodes)},
      {"run.out", cfg.out},
      {"run.save_trajectories", cfg.save_trajectories ? "true" : "false"},
      {"run.scheme", cfg.scheme},
      {"run.seed", std::to_string(cfg.seed)},
      {"run.true_mu", join(cfg.true_mu)},
      {"run.workers", std::to_string(cfg.workers)},
      {"run.x0", join(cfg.x0)},
  };
  std::string text;
  for (const auto& [k, v] : kv) text += k + " = " + v + "\n";
  return text;
}

/// Table-style statistics for one scheme.
struct SchemeSummary {
  std::string scheme;
  int episodes = 0;
  int successes = 0;
  int collisions = 0;
  int timeouts = 0;
  double success_rate = 0.0;
  std::optional<double> arrive_mean;
  std::optional<double> arrive_std;
  std::optional<double> arrive_p95;
};

struct ExperimentSummary {
  std::vector<SchemeSummary> schemes;

  const SchemeSummary* find(const std::string& name) const {
    for (const auto& s : schemes)
      if (s.scheme == name) return &s;
    return nullptr;
  }
};

/// Nearest-rank percentile: the ceil(pct n / 100)-th smallest value.
inline double nearest_rank_percentile(std::vector<double> values, double pct) {
  if (values.empty()) throw InvalidArgument("percentile of empty sample");
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(pct / 100.0 * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

/// Success rate and arrive-time statistics (population std, nearest-rank p95)
/// over successful episodes.
inline SchemeSummary summarize(std::span<const EpisodeRecord> records, const std::string& scheme = "") {
  if (records.empty()) throw InvalidArgument("summarize: no episodes");
  SchemeSummary s;
  s.scheme = scheme;
  s.episodes = static_cast<int>(records.size());
  std::vector<double> times;
  for (const auto& r : records) {
    switch (r.status) {
      case EpisodeStatus::success:
        ++s.successes;
        times.push_back(r.arrive_time.value_or(0.0));
        break;
      case EpisodeStatus::collision:
        ++s.collisions;
        break;
      case EpisodeStatus::timeout:
        ++s.timeouts;
        break;
    }
  }
  s.success_rate = 100.0 * s.successes / s.episodes;
  if (!times.empty()) {
    double mean = 0.0;
    for (double t : times) mean += t;
    mean /= static_cast<double>(times.size());
    double var = 0.0;
    for (double t : times) var += (t - mean) * (t - mean);
    var /= static_cast<double>(times.size());
    s.arrive_mean = mean;
    s.arrive_std = std::sqrt(var);
    s.arrive_p95 = nearest_rank_percentile(times, 95.0);
  }
  return s;
}

inline std::string summary_json(const ExperimentSummary& summary) {
  const auto opt = [](const std::optional<double>& v) { return v ? fmt_double(*v) : std::string("null"); };
  std::string out = "{\n  \"schemes\": [";
  for (std::size_t i = 0; i < summary.schemes.size(); ++i) {
    const auto& s = summary.schemes[i];
    out += i ? ",\n    {" : "\n    {";
    out += "\"scheme\": \"" + s.scheme + "\", ";
    out += "\"episodes\": " + std::to_string(s.episodes) + ", ";
    out += "\"successes\": " + std::to_string(s.successes) + ", ";
    out += "\"collisions\": " + std::to_string(s.collisions) + ", ";
    out += "\"timeouts\": " + std::to_string(s.timeouts) + ", ";
    out += "\"success_rate\": " + fmt_double(s.success_rate) + ", ";
    out += "\"arrive_mean\": " + opt(s.arrive_mean) + ", ";
    out += "\"arrive_std\": " + opt(s.arrive_std) + ", ";
    out += "\"arrive_p95\": " + opt(s.arrive_p95) + "}";
  }
  out += "\n  ]\n}\n";
  return out;
}

struct ExperimentResult {
  ExperimentSummary summary;
  /// records[scheme index][episode]
  std::vector<std::vector<EpisodeRecord>> records;
  std::vector<Scheme> schemes;
};

/// Progress callback: (finished episodes, total episodes).
using ProgressFn = std::function<void(int, int)>;

/// Run every scheme for cfg.episodes episodes. Episode e uses
/// SeedSpec{seed, e} for all schemes, so schemes see the same plant noise.
inline ExperimentResult run_episodes(const ExperimentConfig& cfg, const ProgressFn& progress = {}) {
  const DynamicsModel model = cfg.model();
  const CostModel cm = cfg.cost(model.control_dim());

  ExperimentResult result;
  result.schemes = cfg.schemes();
  const int n_schemes = static_cast<int>(result.schemes.size());
  result.records.assign(static_cast<std::size_t>(n_schemes),
                        std::vector<EpisodeRecord>(static_cast<std::size_t>(cfg.episodes)));

  const int total = n_schemes * cfg.episodes;
  std::atomic<int> next{0};
  std::atomic<int> done{0};
  std::mutex progress_mutex;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(total));

  auto worker = [&] {
    for (int task = next++; task < total; task = next++) {
      const int si = task / cfg.episodes;
      const int e = task % cfg.episodes;
      try {
        EpisodeConfig ec;
        ec.scheme = result.schemes[si];
        ec.x0 = Eigen::Map<const Eigen::VectorXd>(cfg.x0.data(), static_cast<Eigen::Index>(cfg.x0.size()));
        ec.true_mu =
            Eigen::Map<const Eigen::VectorXd>(cfg.true_mu.data(), static_cast<Eigen::Index>(cfg.true_mu.size()));
        ec.horizon = cfg.horizon();
        ec.samples = cfg.samples;
        ec.dt = cfg.dt;
        ec.robust = cfg.robust;
        ec.step.search = cfg.search;
        result.records[si][e] = run_episode(model, cm, ec, SeedSpec{cfg.seed, static_cast<std::uint32_t>(e), 0});
      } catch (...) {
        errors[task] = std::current_exception();
      }
      const int finished = ++done;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(finished, total);
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (int w = 1; w < cfg.workers; ++w) pool.emplace_back(worker);
    worker();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (int si = 0; si < n_schemes; ++si)
    result.summary.schemes.push_back(summarize(result.records[si], to_string(result.schemes[si])));
  return result;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

inline std::string episodes_csv(const ExperimentResult& result) {
  std::string csv = "episode,scheme,status,arrive_time_s,realized_state_cost,realized_total_cost\n";
  for (std::size_t si = 0; si < result.schemes.size(); ++si) {
    for (std::size_t e = 0; e < result.records[si].size(); ++e) {
      const auto& r = result.records[si][e];
      csv += std::to_string(e) + "," + to_string(result.schemes[si]) + "," + to_string(r.status) + "," +
             (r.arrive_time ? fmt_double(*r.arrive_time) : std::string()) + "," +
             fmt_double(r.realized_state_cost) + "," + fmt_double(r.realized_total_cost) + "\n";
    }
  }
  return csv;
}

inline std::string trajectory_csv(const EpisodeRecord& r, double dt, int control_dim) {
  const int n = r.states.empty() ? 0 : static_cast<int>(r.states.front().size());
  const int k = control_dim;
  std::string csv = "step,t";
  for (int i = 0; i < n; ++i) csv += ",x" + std::to_string(i);
  for (int i = 0; i < k; ++i) csv += ",u" + std::to_string(i);
  csv += "\n";
  for (std::size_t s = 0; s < r.states.size(); ++s) {
    csv += std::to_string(s) + "," + fmt_double(static_cast<double>(s) * dt);
    for (int i = 0; i < n; ++i) csv += "," + fmt_double(r.states[s][i]);
    for (int i = 0; i < k; ++i) csv += s < r.controls.size() ? "," + fmt_double(r.controls[s][i]) : std::string(",");
    csv += "\n";
  }
  return csv;
}

/// Write summary.json, episodes.csv and (optionally) per-episode trajectories.
inline void write_outputs(const ExperimentConfig& cfg, const ExperimentResult& result) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.out);
  fs::create_directories(dir);
  const int control_dim = cfg.model().control_dim();
  write_text(dir / "summary.json", summary_json(result.summary));
  write_text(dir / "episodes.csv", episodes_csv(result));
  if (!cfg.save_trajectories) return;
  for (std::size_t si = 0; si < result.schemes.size(); ++si) {
    const fs::path sub = dir / to_string(result.schemes[si]);
    fs::create_directories(sub);
    for (std::size_t e = 0; e < result.records[si].size(); ++e)
      write_text(sub / ("traj_" + std::to_string(e) + ".csv"), trajectory_csv(result.records[si][e], cfg.dt, control_dim));
  }
}

inline ExperimentSummary run_experiment(const ExperimentConfig& cfg, const ProgressFn& progress = {}) {
  ExperimentResult result = run_episodes(cfg, progress);
  write_outputs(cfg, result);
  return result.summary;
}

}  // namespace drpi::harness
