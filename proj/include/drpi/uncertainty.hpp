#pragma once

// Drift estimation from disturbance increments and the KL-radius calculators.

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <vector>

#include "drpi/errors.hpp"

namespace drpi {

/// Running estimate of a constant disturbance drift mu.
struct DriftEstimate {
  Eigen::VectorXd mu_hat;
  long count = 0;
  double dt = 0.0;

  static DriftEstimate prior(int p, double dt, Eigen::VectorXd prior_mean = {}) {
    if (p <= 0) throw InvalidArgument("DriftEstimate: dimension must be positive");
    if (!(dt > 0.0)) throw InvalidArgument("DriftEstimate: dt must be positive");
    DriftEstimate est;
    est.mu_hat = prior_mean.size() == 0 ? Eigen::VectorXd::Zero(p) : std::move(prior_mean);
    if (est.mu_hat.size() != p) throw DimensionError("DriftEstimate: prior has wrong length");
    est.dt = dt;
    return est;
  }
};

enum class GammaSchedule { fixed, inverse_k, finite_sample };

struct RobustnessConfig {
  double gamma = 0.0;
  double epsilon = 0.1;
  GammaSchedule schedule = GammaSchedule::fixed;
  int p = 1;

  void validate() const {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw InvalidArgument("robustness: gamma must be >= 0");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidArgument("robustness: epsilon must be in (0,1)");
    if (p <= 0) throw InvalidArgument("robustness: p must be positive");
  }
};

/// mu_hat = sum of all increments / (N K dt).
inline DriftEstimate estimate_drift_batch(std::span<const std::vector<Eigen::VectorXd>> sequences, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("estimate_drift_batch: dt must be positive");
  Eigen::VectorXd sum;
  long count = 0;
  for (const auto& seq : sequences) {
    for (const auto& dxi : seq) {
      if (sum.size() == 0) sum = Eigen::VectorXd::Zero(dxi.size());
      if (dxi.size() != sum.size()) throw DimensionError("estimate_drift_batch: ragged increments");
      sum += dxi;
      ++count;
    }
  }
  if (count == 0) throw InvalidArgument("estimate_drift_batch: no data");
  DriftEstimate est;
  est.mu_hat = sum / (static_cast<double>(count) * dt);
  est.count = count;
  est.dt = dt;
  return est;
}

/// Streaming mean: mu_hat += (dxi/dt - mu_hat) / (count + 1).
inline DriftEstimate update_drift_online(DriftEstimate est, const Eigen::VectorXd& dxi) {
  if (!(est.dt > 0.0)) throw InvalidArgument("update_drift_online: dt must be positive");
  if (dxi.size() != est.mu_hat.size()) throw DimensionError("update_drift_online: increment has wrong length");
  if (!dxi.allFinite()) throw NonFiniteError("update_drift_online: non-finite increment");
  est.count += 1;
  est.mu_hat += (dxi / est.dt - est.mu_hat) / static_cast<double>(est.count);
  return est;
}

/// Smallest KL radius that contains the true law w.p. 1 - epsilon:
/// sqrt(p)/N * log(2p/epsilon).
inline double gamma_for_confidence(int p, long n, double epsilon) {
  if (p <= 0) throw InvalidArgument("gamma_for_confidence: p must be positive");
  if (n <= 0) throw InvalidArgument("gamma_for_confidence: N must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidArgument("gamma_for_confidence: epsilon must be in (0,1)");
  return std::sqrt(static_cast<double>(p)) / static_cast<double>(n) * std::log(2.0 * p / epsilon);
}

/// 1 - 2p exp(-gamma N / sqrt(p)). Can be negative (vacuous bound).
inline double coverage_lower_bound(double gamma, long n, int p) {
  if (p <= 0 || n <= 0) throw InvalidArgument("coverage_lower_bound: p and N must be positive");
  if (!(gamma >= 0.0)) throw InvalidArgument("coverage_lower_bound: gamma must be >= 0");
  return 1.0 - 2.0 * p * std::exp(-gamma * static_cast<double>(n) / std::sqrt(static_cast<double>(p)));
}

/// KL divergence between two unit-diffusion Brownian laws with constant
/// drifts over [0, T]: T/2 |mu_hat - mu|^2.
inline double kl_drifted_brownian(const Eigen::VectorXd& mu_hat, const Eigen::VectorXd& mu, double horizon) {
  if (mu_hat.size() != mu.size()) throw DimensionError("kl_drifted_brownian: dimension mismatch");
  if (!(horizon > 0.0)) throw InvalidArgument("kl_drifted_brownian: T must be positive");
  return 0.5 * horizon * (mu_hat - mu).squaredNorm();
}

/// Radius to use at data count k (k >= 1).
inline double gamma_schedule(const RobustnessConfig& rc, long k, long n_available) {
  if (k < 1) throw InvalidArgument("gamma_schedule: k must be >= 1");
  switch (rc.schedule) {
    case GammaSchedule::fixed:
      return rc.gamma;
    case GammaSchedule::inverse_k:
      return 1.0 / static_cast<double>(k);
    case GammaSchedule::finite_sample:
      return gamma_for_confidence(rc.p, n_available, rc.epsilon);
  }
  return rc.gamma;
}

}  // namespace drpi
