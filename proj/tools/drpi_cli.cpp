// Command-line front end: simulate, sweep, bound.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "drpi/drpi.hpp"

namespace {

using drpi::harness::ExperimentConfig;
using drpi::harness::fmt_double;

struct Overrides {
  std::string scheme;
  int episodes = 0;
  long long seed = -1;
  std::string out;
  int workers = 0;
  bool save_trajectories = false;
  std::vector<std::string> assignments;
};

ExperimentConfig load(const std::string& path, const Overrides& o) {
  ExperimentConfig cfg = drpi::harness::load_config(path);
  using drpi::harness::set_config_value;
  for (const auto& a : o.assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos) throw drpi::ConfigError("--set expects key=value, got '" + a + "'");
    set_config_value(cfg, a.substr(0, eq), a.substr(eq + 1));
  }
  if (!o.scheme.empty()) set_config_value(cfg, "run.scheme", o.scheme);
  if (o.episodes > 0) cfg.episodes = o.episodes;
  if (o.seed >= 0) cfg.seed = static_cast<std::uint64_t>(o.seed);
  if (!o.out.empty()) cfg.out = o.out;
  if (o.workers > 0) cfg.workers = o.workers;
  if (o.save_trajectories) cfg.save_trajectories = true;
  drpi::harness::finalize(cfg);
  return cfg;
}

void print_summary(const drpi::harness::ExperimentSummary& summary) {
  std::printf("%-6s %9s %9s %9s %9s %6s %6s\n", "scheme", "success%", "mean[s]", "std[s]", "p95[s]", "coll", "tout");
  for (const auto& s : summary.schemes) {
    auto opt = [](const std::optional<double>& v) { return v ? *v : std::nan(""); };
    std::printf("%-6s %9.2f %9.2f %9.2f %9.2f %6d %6d\n", s.scheme.c_str(), s.success_rate, opt(s.arrive_mean),
                opt(s.arrive_std), opt(s.arrive_p95), s.collisions, s.timeouts);
  }
}

void progress_to_stderr(int done, int total) {
  std::fprintf(stderr, "\r%d/%d episodes", done, total);
  if (done == total) std::fprintf(stderr, "\n");
}

void add_common(CLI::App* cmd, std::string& config, Overrides& o) {
  cmd->add_option("--config", config, "Experiment config file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--episodes", o.episodes, "Episodes per scheme");
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--workers", o.workers, "Episodes run concurrently");
  cmd->add_option("--set", o.assignments, "Override a config key (key=value), repeatable");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributionally robust path-integral control experiments"};
  app.require_subcommand(1);

  std::string config;
  Overrides o;
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "No progress output");

  auto* simulate = app.add_subcommand("simulate", "Run closed-loop episodes and write summary/CSV outputs");
  add_common(simulate, config, o);
  simulate->add_option("--scheme", o.scheme, "drpi, pic or both")->check(CLI::IsMember({"drpi", "pic", "both"}));
  simulate->add_flag("--save-trajectories", o.save_trajectories, "Write one trajectory CSV per episode");

  auto* sweep = app.add_subcommand("sweep", "Run DRPI with fixed gamma values");
  add_common(sweep, config, o);
  std::vector<double> gammas;
  sweep->add_option("--gamma", gammas, "Comma separated gamma values")->required()->delimiter(',');

  auto* bound = app.add_subcommand("bound", "Print the KL radius for confidence 1-eps and its coverage bound");
  int p = 0;
  long n = 0;
  double eps = 0.0;
  bound->add_option("--p", p, "Disturbance dimension")->required();
  bound->add_option("--n", n, "Number of data sequences")->required();
  bound->add_option("--eps", eps, "Violation probability in (0,1)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*bound) {
      const double gamma = drpi::gamma_for_confidence(p, n, eps);
      std::cout << "gamma " << fmt_double(gamma) << "\n";
      std::cout << "coverage_lower_bound " << fmt_double(drpi::coverage_lower_bound(gamma, n, p)) << "\n";
      return 0;
    }

    const drpi::harness::ProgressFn progress = quiet ? drpi::harness::ProgressFn{} : progress_to_stderr;

    if (*simulate) {
      const ExperimentConfig cfg = load(config, o);
      const auto summary = drpi::harness::run_experiment(cfg, progress);
      print_summary(summary);
      std::cout << "outputs written to " << cfg.out << "\n";
      return 0;
    }

    if (*sweep) {
      ExperimentConfig base = load(config, o);
      std::filesystem::create_directories(base.out);
      std::string csv = "gamma,success_rate,arrive_mean,arrive_std,arrive_p95,collisions,timeouts\n";
      for (std::size_t i = 0; i < gammas.size(); ++i) {
        ExperimentConfig cfg = base;
        cfg.scheme = "drpi";
        cfg.robust.schedule = drpi::GammaSchedule::fixed;
        cfg.robust.gamma = gammas[i];
        cfg.out = (std::filesystem::path(base.out) / ("gamma_" + std::to_string(i))).string();
        drpi::harness::finalize(cfg);
        const auto summary = drpi::harness::run_experiment(cfg, progress);
        const auto& s = summary.schemes.front();
        auto opt = [](const std::optional<double>& v) { return v ? fmt_double(*v) : std::string(); };
        csv += fmt_double(gammas[i]) + "," + fmt_double(s.success_rate) + "," + opt(s.arrive_mean) + "," +
               opt(s.arrive_std) + "," + opt(s.arrive_p95) + "," + std::to_string(s.collisions) + "," +
               std::to_string(s.timeouts) + "\n";
        std::cout << "gamma " << fmt_double(gammas[i]) << "\n";
        print_summary(summary);
      }
      drpi::harness::write_text(std::filesystem::path(base.out) / "sweep.csv", csv);
      return 0;
    }
  } catch (const drpi::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
