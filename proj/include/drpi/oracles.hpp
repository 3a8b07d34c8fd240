#pragma once

// Analytic references for scalar linear-quadratic problems on the
// Euler-discretized chain
//
//   x_{j+1} = (1 + a dt) x_j + b dt u_j + sigma sqrt(dt) z_j,  z_j ~ N(0,1),
//
// with cost  sum_{j=1}^{K-1} 1/2 qx x_j^2 dt + sum_{j=0}^{K-1} 1/2 r u_j^2 dt
// + 1/2 qT x_K^2. The state at j = 0 is not charged, matching the rollout
// engine's cost convention.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "drpi/errors.hpp"

namespace drpi::oracles {

struct ScalarLQProblem {
  double a = 0.0;
  double b = 1.0;
  double sigma = 1.0;
  double q_x = 1.0;
  double r = 1.0;
  double q_T = 0.0;
  double T = 1.0;
  double dt = 0.05;

  int steps() const { return static_cast<int>(std::lround(T / dt)); }

  void validate() const {
    if (!(r > 0.0)) throw InvalidArgument("ScalarLQProblem: r must be positive");
    if (!(sigma > 0.0)) throw InvalidArgument("ScalarLQProblem: sigma must be positive");
    if (!(q_x >= 0.0 && q_T >= 0.0)) throw InvalidArgument("ScalarLQProblem: state weights must be nonnegative");
    if (!(dt > 0.0) || !(T > 0.0)) throw InvalidArgument("ScalarLQProblem: T and dt must be positive");
    if (std::abs(T / dt - std::round(T / dt)) > 1e-9 * (T / dt)) throw InvalidArgument("ScalarLQProblem: dt must divide T");
    if (b == 0.0) throw InvalidArgument("ScalarLQProblem: b must be non-zero");
  }

  /// theta* with theta* b^2 / r = sigma^2.
  double theta_star() const { return r * sigma * sigma / (b * b); }
};

/// Backward Riccati solution: u_j = -gains[j] x_j, value_j(x) = 1/2 P_j x^2 + c_j.
struct RiccatiSolution {
  std::vector<double> gains;  // K entries
  std::vector<double> p;      // K+1 entries
  std::vector<double> c;      // K+1 entries

  double value(double x0) const { return 0.5 * p.front() * x0 * x0 + c.front(); }
};

namespace detail {

// One backward sweep. inv_theta = 0 is the risk-neutral recursion.
inline RiccatiSolution riccati_sweep(const ScalarLQProblem& prob, double inv_theta) {
  prob.validate();
  const int k_steps = prob.steps();
  const double dt = prob.dt;
  const double a_d = 1.0 + prob.a * dt;
  const double b_d = prob.b * dt;
  const double noise_var = prob.sigma * prob.sigma * dt;

  RiccatiSolution sol;
  sol.gains.assign(static_cast<std::size_t>(k_steps), 0.0);
  sol.p.assign(static_cast<std::size_t>(k_steps) + 1, 0.0);
  sol.c.assign(static_cast<std::size_t>(k_steps) + 1, 0.0);
  sol.p[k_steps] = prob.q_T;

  for (int j = k_steps - 1; j >= 0; --j) {
    // Cost-to-go seen from x_{j+1}, including its running charge.
    const double p_next = sol.p[j + 1] + (j + 1 < k_steps ? prob.q_x * dt : 0.0);
    const double c_next = sol.c[j + 1];
    double p_tilde = p_next;
    double c_here = c_next + 0.5 * p_next * noise_var;
    if (inv_theta > 0.0) {
      // theta log E exp(V/theta) for Gaussian x_{j+1}.
      const double load = p_next * noise_var * inv_theta;
      if (!(load < 1.0)) throw RiskBreakdown("LEQG recursion breaks down: theta too small");
      p_tilde = p_next / (1.0 - load);
      c_here = c_next - 0.5 / inv_theta * std::log1p(-load);
    }
    const double denom_u = prob.r * dt + p_tilde * b_d * b_d;
    sol.gains[j] = p_tilde * b_d * a_d / denom_u;
    sol.p[j] = a_d * a_d * p_tilde * prob.r * dt / denom_u;
    sol.c[j] = c_here;
  }
  return sol;
}

}  // namespace detail

/// Risk-neutral LQR on the discretized chain.
inline RiccatiSolution lqr_solution(const ScalarLQProblem& prob) { return detail::riccati_sweep(prob, 0.0); }

inline std::vector<double> lqr_gains(const ScalarLQProblem& prob) { return lqr_solution(prob).gains; }

/// Risk-sensitive (LEQG) solution minimizing theta log E exp(J / theta).
/// theta = +inf gives the LQR solution. Throws RiskBreakdown when theta is too
/// small for the exponentiated cost to be finite.
inline RiccatiSolution leqg_solution(const ScalarLQProblem& prob, double theta) {
  if (!(theta > 0.0)) throw InvalidArgument("leqg: theta must be positive");
  return detail::riccati_sweep(prob, std::isinf(theta) ? 0.0 : 1.0 / theta);
}

struct LeqgResult {
  std::vector<double> gains;
  double value = 0.0;
};

inline LeqgResult leqg_gains_and_value(const ScalarLQProblem& prob, double theta, double x0) {
  const RiccatiSolution sol = leqg_solution(prob, theta);
  return {sol.gains, sol.value(x0)};
}

/// Gauss-Hermite rule for the standard normal (probabilists' weight), via
/// Golub-Welsch. Weights sum to one.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline QuadratureRule gauss_hermite(int n) {
  if (n <= 0) throw InvalidArgument("gauss_hermite: need at least one node");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    jacobi(i, i - 1) = std::sqrt(static_cast<double>(i));
    jacobi(i - 1, i) = jacobi(i, i - 1);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = eig.eigenvalues()[i];
    const double v0 = eig.eigenvectors()(0, i);
    rule.weights[i] = v0 * v0;
  }
  return rule;
}

/// -lambda log E[exp(-J0 / lambda)] over `steps` uncontrolled steps from x0,
/// with J0 = sum_{j=1}^{steps-1} 1/2 qx x_j^2 dt + 1/2 qT x_steps^2, by tensor
/// Gauss-Hermite quadrature. lambda = +inf returns E[J0].
inline double free_energy_quadrature(const ScalarLQProblem& prob, int steps, double lambda, double x0,
                                      int nodes = 64) {
  prob.validate();
  if (steps < 1 || steps > 3) throw InvalidArgument("free_energy_quadrature: steps must be 1, 2 or 3");
  if (!(lambda > 0.0)) throw InvalidArgument("free_energy_quadrature: lambda must be positive");
  if (nodes < 64) throw InvalidArgument("free_energy_quadrature: use at least 64 nodes");
  const QuadratureRule rule = gauss_hermite(nodes);
  const double a_d = 1.0 + prob.a * prob.dt;
  const double scale = prob.sigma * std::sqrt(prob.dt);

  // Enumerate every node tuple; collect (log weight, cost).
  std::vector<double> log_w;
  std::vector<double> cost;
  std::vector<int> idx(static_cast<std::size_t>(steps), 0);
  const std::size_t total = static_cast<std::size_t>(std::pow(nodes, steps));
  log_w.reserve(total);
  cost.reserve(total);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (int s = 0; s < steps; ++s) {
      idx[s] = static_cast<int>(rem % nodes);
      rem /= nodes;
    }
    double x = x0;
    double j0 = 0.0;
    double lw = 0.0;
    for (int s = 0; s < steps; ++s) {
      x = a_d * x + scale * rule.nodes[idx[s]];
      lw += std::log(rule.weights[idx[s]]);
      j0 += s + 1 < steps ? 0.5 * prob.q_x * x * x * prob.dt : 0.5 * prob.q_T * x * x;
    }
    log_w.push_back(lw);
    cost.push_back(j0);
  }

  double weight_sum = 0.0;
  for (double lw : log_w) weight_sum += std::exp(lw);
  if (std::isinf(lambda)) {
    double mean = 0.0;
    for (std::size_t i = 0; i < total; ++i) mean += std::exp(log_w[i]) * cost[i];
    return mean / weight_sum;
  }
  // Shift by the smallest cost and use expm1/log1p so large lambda does not
  // cancel catastrophically.
  const double j_min = *std::min_element(cost.begin(), cost.end());
  double acc = 0.0;
  for (std::size_t i = 0; i < total; ++i) acc += std::exp(log_w[i]) * std::expm1(-(cost[i] - j_min) / lambda);
  return j_min - lambda * std::log1p(acc / weight_sum);
}

}  // namespace drpi::oracles
