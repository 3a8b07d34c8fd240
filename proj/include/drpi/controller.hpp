#pragma once

// Closed-loop DRPI and its risk-neutral baseline (PIC, gamma = 0).

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "drpi/costs.hpp"
#include "drpi/errors.hpp"
#include "drpi/models.hpp"
#include "drpi/random.hpp"
#include "drpi/rollout.hpp"
#include "drpi/solver.hpp"
#include "drpi/uncertainty.hpp"

namespace drpi {

enum class Scheme { drpi, pic };

inline const char* to_string(Scheme s) { return s == Scheme::drpi ? "drpi" : "pic"; }

enum class EpisodeStatus { success, collision, timeout };

inline const char* to_string(EpisodeStatus s) {
  switch (s) {
    case EpisodeStatus::success:
      return "success";
    case EpisodeStatus::collision:
      return "collision";
    case EpisodeStatus::timeout:
      return "timeout";
  }
  return "?";
}

struct EpisodeRecord {
  std::vector<StateVec> states;
  std::vector<ControlVec> controls;
  std::vector<double> theta_hats;
  std::vector<double> gammas;
  std::vector<double> lambda_effs;
  /// Realized disturbance increments, including the pre-episode sample at index 0.
  std::vector<DisturbanceIncrement> increments;
  EpisodeStatus status = EpisodeStatus::timeout;
  std::optional<double> arrive_time;
  double realized_state_cost = 0.0;
  double realized_total_cost = 0.0;
  DriftEstimate final_drift;
};

struct StepOptions {
  int workers = 1;
  bool zero_noise = false;  // test hook: force the rollout noise to zero
  SearchConfig search;
};

struct StepResult {
  ControlVec u;
  ThetaSolution diagnostics;
  RolloutBatch batch;
};

/// One pass of the DRPI loop body at timestep k < horizon: sample, roll out,
/// solve the master problem, weight, and assemble the control.
inline StepResult drpi_step(const DynamicsModel& model, const CostModel& cm, const StateVec& x_k, int k,
                            int horizon, const DriftEstimate& drift, double gamma, int m, double dt,
                            double theta_star, const SeedSpec& seed, const StepOptions& options = {}) {
  if (k < 0 || k >= horizon) throw InvalidArgument("drpi_step: need 0 <= k < K");
  if (!(gamma >= 0.0)) throw InvalidArgument("drpi_step: gamma must be >= 0");
  if (m <= 0) throw InvalidArgument("drpi_step: M must be positive");
  try {
    NoiseTensor noise = options.zero_noise
                            ? NoiseTensor(m, horizon - k, model.noise_dim())
                            : sample_disturbances(m, horizon - k, model.noise_dim(), seed, options.workers);
    StepResult out;
    out.batch = rollout_uncontrolled(model, cm, x_k, k, drift, std::move(noise), dt, {options.workers, false});
    out.diagnostics = solve_master(gamma, theta_star, out.batch.costs, options.search);
    const auto weights = path_integral_weights(out.batch.costs, out.diagnostics.lambda_eff);
    out.u = control_from_weights(model, cm.control_weight(), x_k, weights, out.batch.first_step_noise, dt, k * dt);
    return out;
  } catch (const Error& e) {
    throw Error("timestep " + std::to_string(k) + ": " + e.what());
  }
}

struct EpisodeConfig {
  Scheme scheme = Scheme::drpi;
  StateVec x0;
  Eigen::VectorXd true_mu;
  int horizon = 500;
  int samples = 1000;
  double dt = 0.05;
  RobustnessConfig robust;
  StepOptions step;
};

/// Closed-loop simulation with online drift estimation.
///
/// Before step 0 one disturbance increment is observed and seeds the drift
/// estimate. At step k > 0 the increment realized during step k-1 is absorbed.
/// The gamma schedule is evaluated at the current data count (1 at step 0);
/// the PIC scheme forces gamma = 0. The plant is driven by
/// dxi = mu dt + w sqrt(dt) with w from the truth stream, which is disjoint
/// from the rollout streams.
inline EpisodeRecord run_episode(const DynamicsModel& model, const CostModel& cm, const EpisodeConfig& cfg,
                                 const SeedSpec& seed) {
  const int p = model.noise_dim();
  model.check_state(cfg.x0);
  if (cfg.true_mu.size() != p) throw DimensionError("run_episode: true drift has wrong length");
  if (cfg.horizon < 1) throw InvalidArgument("run_episode: horizon must be >= 1");
  if (!(cfg.dt > 0.0)) throw InvalidArgument("run_episode: dt must be positive");
  cfg.robust.validate();

  const double dt = cfg.dt;
  const double sqrt_dt = std::sqrt(dt);
  const double th_star = theta_star(model, cm.control_weight());

  // Truth stream: draw j is the increment for plant step j - 1; draw 0 is
  // the pre-episode sample.
  NormalStream truth(StreamTag::truth, SeedSpec{seed.master_seed, seed.episode, 0}, 0);
  auto next_increment = [&] {
    DisturbanceIncrement dxi(p);
    for (int j = 0; j < p; ++j) dxi[j] = cfg.true_mu[j] * dt + truth.next() * sqrt_dt;
    return dxi;
  };

  EpisodeRecord rec;
  rec.states.push_back(cfg.x0);
  rec.increments.push_back(next_increment());
  DriftEstimate drift = update_drift_online(DriftEstimate::prior(p, dt), rec.increments.front());

  auto classify = [&](const StateVec& x, double t) -> std::optional<EpisodeStatus> {
    if (!cm.has_geometry()) return std::nullopt;
    const auto xs = as_span(x);
    if (cm.in_obstacle(xs) || cm.outside_boundary(xs)) return EpisodeStatus::collision;
    if (cm.at_goal(xs)) {
      rec.arrive_time = t;
      return EpisodeStatus::success;
    }
    return std::nullopt;
  };

  if (auto s = classify(cfg.x0, 0.0)) {
    rec.status = *s;
    rec.final_drift = drift;
    return rec;
  }

  StateVec x = cfg.x0;
  for (int k = 0; k < cfg.horizon; ++k) {
    if (k > 0) drift = update_drift_online(drift, rec.increments.back());
    const double gamma = cfg.scheme == Scheme::pic ? 0.0 : gamma_schedule(cfg.robust, drift.count, drift.count);

    StepResult step;
    try {
      step = drpi_step(model, cm, x, k, cfg.horizon, drift, gamma, cfg.samples, dt, th_star,
                       SeedSpec{seed.master_seed, seed.episode, static_cast<std::uint32_t>(k)}, cfg.step);
    } catch (const Error& e) {
      throw Error("episode " + std::to_string(seed.episode) + ", " + e.what());
    }

    const DisturbanceIncrement dxi = next_increment();
    x = em_step(model, x, step.u, dxi, dt, k * dt);
    rec.increments.push_back(dxi);
    rec.controls.push_back(step.u);
    rec.states.push_back(x);
    rec.theta_hats.push_back(step.diagnostics.theta_hat);
    rec.lambda_effs.push_back(step.diagnostics.lambda_eff);
    rec.gammas.push_back(gamma);

    const double q = state_cost(cm, x) * dt;
    rec.realized_state_cost += q;
    rec.realized_total_cost += q + control_cost(cm, step.u) * dt;

    if (auto s = classify(x, (k + 1) * dt)) {
      rec.status = *s;
      rec.final_drift = drift;
      return rec;
    }
  }
  rec.status = EpisodeStatus::timeout;
  rec.final_drift = drift;
  return rec;
}

}  // namespace drpi
