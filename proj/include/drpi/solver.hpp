#pragma once

// Distributionally robust path-integral solver.
//
// The robust problem splits into a univariate master problem over the risk
// parameter theta,
//
//   min_{theta > theta*}  gamma * theta + g(theta),
//
// and a risk-sensitive subproblem g(theta) evaluated as the free energy of
// uncontrolled rollouts at the effective temperature
//
//   lambda_eff(theta) = theta * theta* / (theta - theta*),
//
// where theta* solves theta* G R^-1 G^T = Sigma Sigma^T. lambda_eff falls
// from +inf (theta -> theta*+, fully risk averse) to theta* (theta -> inf,
// risk neutral). Trajectories are weighted by exp(-J / lambda_eff).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "drpi/errors.hpp"
#include "drpi/models.hpp"
#include "drpi/random.hpp"

namespace drpi {

/// Relative margin kept between theta and the pole at theta*.
inline constexpr double kSingularMargin = 1e-6;

struct ThetaSolution {
  double theta_hat = 0.0;
  double theta_star = 0.0;
  double lambda_eff = 0.0;
  double master_value = 0.0;
  int evaluations = 0;
};

struct SearchConfig {
  int grid_points = 200;
  double refine_tolerance = 1e-8;
  double theta_max_multiplier = 1e6;
};

/// Deterministic probe states for checks that must hold "at all states".
inline std::vector<Eigen::VectorXd> probe_states(int n, int count = 8, std::uint64_t seed = 0x5eed) {
  std::vector<Eigen::VectorXd> states;
  states.push_back(Eigen::VectorXd::Zero(n));
  NormalStream stream(StreamTag::experiment, SeedSpec{seed, 0, 0}, 0);
  for (int c = 1; c < count; ++c) {
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = 3.0 * stream.next();
    states.push_back(std::move(x));
  }
  return states;
}

/// Least-squares scalar with theta* G R^-1 G^T = Sigma Sigma^T at the probe
/// states; throws NoLinearizingTheta if the residual is not negligible.
inline double theta_star(const DynamicsModel& model, const Eigen::MatrixXd& r,
                         std::span<const Eigen::VectorXd> states) {
  if (r.rows() != model.control_dim() || r.cols() != model.control_dim())
    throw DimensionError("theta_star: R has wrong shape");
  Eigen::LLT<Eigen::MatrixXd> llt(r);
  if (llt.info() != Eigen::Success) throw InvalidArgument("theta_star: R must be positive definite");
  const Eigen::MatrixXd r_inv = llt.solve(Eigen::MatrixXd::Identity(r.rows(), r.cols()));

  std::vector<std::pair<Eigen::MatrixXd, Eigen::MatrixXd>> pairs;
  double cross = 0.0;
  double norm = 0.0;
  for (const auto& x : states) {
    const Eigen::MatrixXd g = model.control_matrix(x, 0.0);
    const Eigen::MatrixXd sig = model.diffusion(x, 0.0);
    Eigen::MatrixXd a = g * r_inv * g.transpose();
    Eigen::MatrixXd b = sig * sig.transpose();
    cross += (a.array() * b.array()).sum();
    norm += a.squaredNorm();
    pairs.emplace_back(std::move(a), std::move(b));
  }
  if (pairs.empty()) throw InvalidArgument("theta_star: no probe states");
  if (!(norm > 0.0)) throw NoLinearizingTheta("theta_star: G R^-1 G^T vanishes");
  const double theta = cross / norm;
  for (const auto& [a, b] : pairs) {
    if ((theta * a - b).norm() > 1e-9 * b.norm())
      throw NoLinearizingTheta("theta_star: no scalar theta satisfies theta G R^-1 G^T = Sigma Sigma^T for " +
                               model.name());
  }
  if (!(theta > 0.0)) throw NoLinearizingTheta("theta_star: non-positive solution");
  return theta;
}

inline double theta_star(const DynamicsModel& model, const Eigen::MatrixXd& r) {
  const auto states = probe_states(model.state_dim());
  return theta_star(model, r, states);
}

/// lambda_eff = theta theta* / (theta - theta*).
inline double effective_temperature(double theta, double theta_star) {
  if (!(theta_star > 0.0)) throw InvalidArgument("effective_temperature: theta* must be positive");
  if (!(theta > theta_star * (1.0 + kSingularMargin)))
    throw SingularTheta("effective_temperature: theta must exceed theta* (1 + 1e-6)");
  if (std::isinf(theta)) return theta_star;
  return theta * theta_star / (theta - theta_star);
}

namespace detail {
inline void check_costs(std::span<const double> costs, const char* who) {
  if (costs.empty()) throw InvalidArgument(std::string(who) + ": empty cost vector");
  for (double c : costs)
    if (!std::isfinite(c)) throw NonFiniteError(std::string(who) + ": non-finite cost");
}
}  // namespace detail

/// -lambda log( mean exp(-J_i / lambda) ), shifted by min J.
inline double free_energy(std::span<const double> costs, double lambda) {
  detail::check_costs(costs, "free_energy");
  if (!(lambda > 0.0)) throw InvalidArgument("free_energy: lambda must be positive");
  const double j_min = *std::min_element(costs.begin(), costs.end());
  // log mean exp(-d/lambda) = log1p(mean expm1(-d/lambda)) stays accurate for
  // large lambda, where every term is close to one.
  double acc = 0.0;
  for (double c : costs) acc += std::expm1(-(c - j_min) / lambda);
  const double s = acc / static_cast<double>(costs.size());
  return j_min - lambda * std::log1p(s);
}

/// Softmax of -J / lambda.
inline std::vector<double> path_integral_weights(std::span<const double> costs, double lambda) {
  detail::check_costs(costs, "path_integral_weights");
  if (!(lambda > 0.0)) throw InvalidArgument("path_integral_weights: lambda must be positive");
  const double j_min = *std::min_element(costs.begin(), costs.end());
  std::vector<double> w(costs.size());
  double total = 0.0;
  for (std::size_t i = 0; i < costs.size(); ++i) {
    w[i] = std::exp(-(costs[i] - j_min) / lambda);
    total += w[i];
  }
  for (double& v : w) v /= total;
  return w;
}

/// gamma theta + free_energy(costs, lambda_eff(theta)).
inline double master_objective(double gamma, double theta, double theta_star, std::span<const double> costs) {
  if (!(gamma >= 0.0)) throw InvalidArgument("master_objective: gamma must be >= 0");
  return gamma * theta + free_energy(costs, effective_temperature(theta, theta_star));
}

/// Admissible theta interval for the master search.
struct ThetaDomain {
  double theta_lo;
  double theta_hi;
  // s = 1/lambda_eff = 1/theta* - 1/theta, increasing in theta.
  double s_lo;
  double s_hi;

  static ThetaDomain make(double theta_star, const SearchConfig& cfg) {
    if (!(cfg.theta_max_multiplier > 1.0 + 2 * kSingularMargin))
      throw InvalidArgument("search: theta_max_multiplier too small");
    ThetaDomain d{};
    const double inv = 1.0 / theta_star;
    d.s_lo = inv * (kSingularMargin / (1.0 + kSingularMargin)) * (1.0 + 1e-7);
    d.s_hi = inv * (1.0 - 1.0 / cfg.theta_max_multiplier);
    d.theta_hi = theta_star * cfg.theta_max_multiplier;
    d.theta_lo = d.theta_of(d.s_lo, theta_star);
    return d;
  }

  double theta_of(double s, double theta_star) const {
    if (s >= s_hi) return theta_hi;
    return 1.0 / (1.0 / theta_star - s);
  }
};

/// Grid + golden-section minimization of the master objective.
///
/// gamma == 0 short-circuits to the risk-neutral endpoint (lambda_eff = theta*).
/// Ties are broken toward larger theta.
inline ThetaSolution solve_master(double gamma, double theta_star, std::span<const double> costs,
                                  const SearchConfig& cfg = {}) {
  detail::check_costs(costs, "solve_master");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw InvalidArgument("solve_master: gamma must be >= 0");
  if (!(theta_star > 0.0)) throw InvalidArgument("solve_master: theta* must be positive");
  if (cfg.grid_points < 3) throw InvalidArgument("solve_master: need at least 3 grid points");
  if (!(cfg.refine_tolerance > 0.0)) throw InvalidArgument("solve_master: refine tolerance must be positive");

  const ThetaDomain dom = ThetaDomain::make(theta_star, cfg);
  ThetaSolution sol;
  sol.theta_star = theta_star;

  if (gamma == 0.0) {
    sol.theta_hat = dom.theta_hi;
    sol.lambda_eff = theta_star;
    sol.master_value = free_energy(costs, theta_star);
    sol.evaluations = 1;
    return sol;
  }

  auto objective_at = [&](double log_s) {
    ++sol.evaluations;
    const double theta = dom.theta_of(std::exp(log_s), theta_star);
    return master_objective(gamma, theta, theta_star, costs);
  };

  const double a = std::log(dom.s_lo);
  const double b = std::log(dom.s_hi);
  const int n = cfg.grid_points;
  std::vector<double> grid(static_cast<std::size_t>(n));
  std::vector<double> values(static_cast<std::size_t>(n));
  int best = n - 1;
  for (int j = n - 1; j >= 0; --j) {
    grid[j] = j == n - 1 ? b : a + (b - a) * static_cast<double>(j) / (n - 1);
    values[j] = objective_at(grid[j]);
    if (values[j] < values[best]) best = j;
  }

  double best_log_s = grid[best];
  double best_value = values[best];

  // Golden-section search on the bracket around the best grid point.
  double lo = grid[std::max(best - 1, 0)];
  double hi = grid[std::min(best + 1, n - 1)];
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = objective_at(x1);
  double f2 = objective_at(x2);
  while (hi - lo > cfg.refine_tolerance) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = objective_at(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = objective_at(x2);
    }
  }
  const double candidates[] = {lo, x1, x2, hi};
  for (double c : candidates) {
    const double v = c == x1 ? f1 : (c == x2 ? f2 : objective_at(c));
    if (v < best_value || (v == best_value && c > best_log_s)) {
      best_value = v;
      best_log_s = c;
    }
  }

  sol.theta_hat = dom.theta_of(std::exp(best_log_s), theta_star);
  sol.lambda_eff = effective_temperature(sol.theta_hat, theta_star);
  sol.master_value = best_value;
  return sol;
}

/// Path-integral control from weighted first-step noise.
///
/// Channel-noise models (Sigma = G S): u = S sum_i r_i eps_i / sqrt(dt).
/// Otherwise u = R^-1 G_c^T (G_c R^-1 G_c^T)^-1 Sigma_c sum_i r_i eps_i / sqrt(dt)
/// with G_c, Sigma_c the rows of the directly actuated states.
inline ControlVec control_from_weights(const DynamicsModel& model, const Eigen::MatrixXd& r, const StateVec& x_k,
                                       std::span<const double> weights, const Eigen::MatrixXd& first_step_noise,
                                       double dt, double t = 0.0) {
  model.check_state(x_k);
  if (!(dt > 0.0)) throw InvalidArgument("control_from_weights: dt must be positive");
  if (first_step_noise.rows() != static_cast<Eigen::Index>(weights.size()) ||
      first_step_noise.cols() != model.noise_dim())
    throw DimensionError("control_from_weights: noise matrix must be M x p");
  if (r.rows() != model.control_dim() || r.cols() != model.control_dim())
    throw DimensionError("control_from_weights: R has wrong shape");

  const Eigen::Map<const Eigen::VectorXd> w(weights.data(), static_cast<Eigen::Index>(weights.size()));
  const Eigen::VectorXd mean_noise = first_step_noise.transpose() * w / std::sqrt(dt);

  if (model.channel_noise()) return model.channel_matrix() * mean_noise;

  const auto& rows = model.actuated_indices();
  const int l = static_cast<int>(rows.size());
  if (l == 0) throw SingularProjection("control_from_weights: model has no actuated states");
  const Eigen::MatrixXd g = model.control_matrix(x_k, t);
  const Eigen::MatrixXd sig = model.diffusion(x_k, t);
  Eigen::MatrixXd g_c(l, model.control_dim());
  Eigen::MatrixXd sig_c(l, model.noise_dim());
  for (int i = 0; i < l; ++i) {
    g_c.row(i) = g.row(rows[i]);
    sig_c.row(i) = sig.row(rows[i]);
  }
  const Eigen::MatrixXd r_inv = r.llt().solve(Eigen::MatrixXd::Identity(r.rows(), r.cols()));
  const Eigen::MatrixXd proj = g_c * r_inv * g_c.transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(proj);
  const auto& sv = svd.singularValues();
  if (!(sv.minCoeff() > 0.0) || sv.maxCoeff() / sv.minCoeff() > 1e12)
    throw SingularProjection("control_from_weights: G_c R^-1 G_c^T is singular");
  return r_inv * g_c.transpose() * proj.ldlt().solve(sig_c * mean_noise);
}

}  // namespace drpi
