#pragma once

// Monte Carlo engine for uncontrolled rollouts under an estimated drift.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "drpi/costs.hpp"
#include "drpi/errors.hpp"
#include "drpi/models.hpp"
#include "drpi/random.hpp"
#include "drpi/uncertainty.hpp"

namespace drpi {

/// Split [0, count) into `workers` contiguous chunks and run `body(begin, end)`
/// on each. Exceptions from workers are rethrown (first chunk wins).
inline void parallel_for(std::size_t count, int workers,
                         const std::function<void(std::size_t, std::size_t)>& body) {
  const std::size_t w = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), 1,
                                                std::max<std::size_t>(count, 1));
  if (w == 1) {
    body(0, count);
    return;
  }
  std::vector<std::exception_ptr> errors(w);
  {
    std::vector<std::jthread> threads;
    threads.reserve(w);
    for (std::size_t c = 0; c < w; ++c) {
      const std::size_t begin = count * c / w;
      const std::size_t end = count * (c + 1) / w;
      threads.emplace_back([&, begin, end, c] {
        try {
          body(begin, end);
        } catch (...) {
          errors[c] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// Dense [M][steps][p] array of standard normals, row-major.
struct NoiseTensor {
  int trajectories = 0;
  int steps = 0;
  int dim = 0;
  std::vector<double> data;

  NoiseTensor() = default;
  NoiseTensor(int m, int s, int p)
      : trajectories(m), steps(s), dim(p), data(static_cast<std::size_t>(m) * s * p, 0.0) {}

  std::span<const double> at(int i, int step) const {
    return {data.data() + (static_cast<std::size_t>(i) * steps + step) * dim, static_cast<std::size_t>(dim)};
  }
  std::span<double> at(int i, int step) {
    return {data.data() + (static_cast<std::size_t>(i) * steps + step) * dim, static_cast<std::size_t>(dim)};
  }
  std::span<double> trajectory(int i) {
    return {data.data() + static_cast<std::size_t>(i) * steps * dim, static_cast<std::size_t>(steps) * dim};
  }
};

/// i.i.d. N(0,1) draws; trajectory i uses its own counter-based stream.
inline NoiseTensor sample_disturbances(int m, int steps, int p, const SeedSpec& seed, int workers = 1) {
  if (m <= 0 || steps <= 0 || p <= 0) throw InvalidArgument("sample_disturbances: sizes must be positive");
  NoiseTensor noise(m, steps, p);
  parallel_for(static_cast<std::size_t>(m), workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      NormalStream stream(StreamTag::rollout, seed, static_cast<std::uint32_t>(i));
      stream.fill(noise.trajectory(static_cast<int>(i)));
    }
  });
  return noise;
}

struct RolloutBatch {
  int trajectories = 0;
  int steps = 0;
  double dt = 0.0;
  NoiseTensor noise;
  std::vector<double> costs;
  Eigen::MatrixXd first_step_noise;  // M x p
  /// Full state paths (steps + 1 states each); only filled when requested.
  std::vector<std::vector<StateVec>> paths;
};

struct RolloutOptions {
  int workers = 1;
  bool keep_paths = false;
};

/// Simulate M uncontrolled trajectories from x_k with dxi = mu_hat dt + eps sqrt(dt).
///
/// Each trajectory is charged q(x(k'+1)) dt for k' = k..K-2 and psi(x(K)) at
/// the last step. `noise` must be shaped [M][K-k][p].
inline RolloutBatch rollout_uncontrolled(const DynamicsModel& model, const CostModel& cm, const StateVec& x_k,
                                         int k, const DriftEstimate& drift, NoiseTensor noise, double dt,
                                         const RolloutOptions& options = {}) {
  model.check_state(x_k);
  if (!(dt > 0.0)) throw InvalidArgument("rollout_uncontrolled: dt must be positive");
  if (noise.dim != model.noise_dim()) throw DimensionError("rollout_uncontrolled: noise dimension mismatch");
  if (drift.mu_hat.size() != model.noise_dim()) throw DimensionError("rollout_uncontrolled: drift dimension mismatch");
  if (noise.trajectories <= 0 || noise.steps <= 0) throw InvalidArgument("rollout_uncontrolled: empty noise tensor");
  if (!x_k.allFinite()) throw NonFiniteError("rollout_uncontrolled: non-finite initial state");

  const int m = noise.trajectories;
  const int steps = noise.steps;
  const int n = model.state_dim();
  const int p = model.noise_dim();
  const double sqrt_dt = std::sqrt(dt);
  const Eigen::VectorXd mean_increment = drift.mu_hat * dt;

  RolloutBatch batch;
  batch.trajectories = m;
  batch.steps = steps;
  batch.dt = dt;
  batch.costs.assign(static_cast<std::size_t>(m), 0.0);
  if (options.keep_paths) batch.paths.resize(static_cast<std::size_t>(m));

  parallel_for(static_cast<std::size_t>(m), options.workers, [&](std::size_t begin, std::size_t end) {
    std::vector<double> x(static_cast<std::size_t>(n));
    std::vector<double> next(static_cast<std::size_t>(n));
    std::vector<double> dxi(static_cast<std::size_t>(p));
    for (std::size_t i = begin; i < end; ++i) {
      std::copy(x_k.data(), x_k.data() + n, x.begin());
      if (options.keep_paths) {
        batch.paths[i].reserve(static_cast<std::size_t>(steps) + 1);
        batch.paths[i].push_back(x_k);
      }
      double running = 0.0;
      double cost = 0.0;
      for (int s = 0; s < steps; ++s) {
        const auto eps = noise.at(static_cast<int>(i), s);
        for (int j = 0; j < p; ++j) dxi[j] = mean_increment[j] + eps[j] * sqrt_dt;
        model.advance(x, {}, dxi, (k + s) * dt, dt, next);
        std::swap(x, next);
        for (double v : x) {
          if (!std::isfinite(v)) {
            throw NonFiniteError("rollout_uncontrolled: non-finite state in trajectory " + std::to_string(i) +
                                 " at step " + std::to_string(k + s + 1));
          }
        }
        if (options.keep_paths) batch.paths[i].push_back(Eigen::Map<const Eigen::VectorXd>(x.data(), n));
        if (s + 1 < steps) {
          running += cm.state_cost(x) * dt;
        } else {
          cost = running + cm.terminal_cost(x);
        }
      }
      batch.costs[i] = cost;
    }
  });

  batch.first_step_noise.resize(m, p);
  for (int i = 0; i < m; ++i) {
    const auto eps = noise.at(i, 0);
    for (int j = 0; j < p; ++j) batch.first_step_noise(i, j) = eps[j];
  }
  batch.noise = std::move(noise);
  return batch;
}

}  // namespace drpi
