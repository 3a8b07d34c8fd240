#include "drpi/uncertainty.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "drpi/random.hpp"

namespace drpi {
namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

TEST(EstimateDriftBatchTest, Examples) {
  const std::vector<std::vector<Eigen::VectorXd>> one{{vec({0.1}), vec({0.3})}};
  const DriftEstimate est = estimate_drift_batch(one, 0.1);
  EXPECT_NEAR(est.mu_hat[0], 2.0, 1e-14);
  EXPECT_EQ(est.count, 2);

  const std::vector<std::vector<Eigen::VectorXd>> zeros{{vec({0, 0}), vec({0, 0})}, {vec({0, 0})}};
  EXPECT_TRUE(estimate_drift_batch(zeros, 0.1).mu_hat.isZero());
}

TEST(EstimateDriftBatchTest, GaussianIncrementsCenterOnDrift) {
  const double dt = 0.05;
  const Eigen::VectorXd mu = vec({0.3, -0.3});
  NormalStream s(StreamTag::experiment, {17, 0, 0}, 0);
  constexpr int n = 10'000;
  std::vector<std::vector<Eigen::VectorXd>> seqs(1);
  for (int i = 0; i < n; ++i) seqs[0].push_back(mu * dt + vec({s.next(), s.next()}) * std::sqrt(dt));
  const DriftEstimate est = estimate_drift_batch(seqs, dt);
  // Std of mu_hat per component is 1/sqrt(N K dt).
  const double sd = 1.0 / std::sqrt(n * dt);
  EXPECT_LT(std::abs(est.mu_hat[0] - mu[0]), 3 * sd);
  EXPECT_LT(std::abs(est.mu_hat[1] - mu[1]), 3 * sd);
}

TEST(EstimateDriftBatchTest, Errors) {
  EXPECT_THROW(estimate_drift_batch(std::vector<std::vector<Eigen::VectorXd>>{}, 0.1), InvalidArgument);
  const std::vector<std::vector<Eigen::VectorXd>> ragged{{vec({1}), vec({1, 2})}};
  EXPECT_THROW(estimate_drift_batch(ragged, 0.1), DimensionError);
  const std::vector<std::vector<Eigen::VectorXd>> ok{{vec({1})}};
  EXPECT_THROW(estimate_drift_batch(ok, 0.0), InvalidArgument);
}

TEST(UpdateDriftOnlineTest, FirstSampleOverwritesPrior) {
  const DriftEstimate est = update_drift_online(DriftEstimate::prior(1, 0.1, vec({5.0})), vec({0.2}));
  EXPECT_NEAR(est.mu_hat[0], 2.0, 1e-15);
  EXPECT_EQ(est.count, 1);
}

TEST(UpdateDriftOnlineTest, ConstantStream) {
  DriftEstimate est = DriftEstimate::prior(2, 0.25);
  for (int i = 0; i < 37; ++i) {
    est = update_drift_online(est, vec({0.5, -1.0}));
    ASSERT_NEAR(est.mu_hat[0], 2.0, 1e-14);
    ASSERT_NEAR(est.mu_hat[1], -4.0, 1e-14);
  }
}

TEST(UpdateDriftOnlineTest, MatchesBatch) {
  NormalStream s(StreamTag::experiment, {5, 0, 0}, 0);
  const double dt = 0.05;
  for (int stream = 0; stream < 50; ++stream) {
    std::vector<std::vector<Eigen::VectorXd>> seqs(1);
    DriftEstimate est = DriftEstimate::prior(2, dt);
    const int len = 1 + stream * 7;
    for (int i = 0; i < len; ++i) {
      const Eigen::VectorXd dxi = vec({s.next(), s.next()}) * std::sqrt(dt);
      seqs[0].push_back(dxi);
      est = update_drift_online(est, dxi);
    }
    const DriftEstimate batch = estimate_drift_batch(seqs, dt);
    ASSERT_EQ(est.count, batch.count);
    ASSERT_LT((est.mu_hat - batch.mu_hat).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(UpdateDriftOnlineTest, Errors) {
  EXPECT_THROW(update_drift_online(DriftEstimate::prior(2, 0.1), vec({1})), DimensionError);
  EXPECT_THROW(update_drift_online(DriftEstimate::prior(1, 0.1), vec({NAN})), NonFiniteError);
  EXPECT_THROW(DriftEstimate::prior(0, 0.1), InvalidArgument);
}

TEST(GammaForConfidenceTest, Examples) {
  EXPECT_NEAR(gamma_for_confidence(2, 10, 0.1), std::sqrt(2.0) / 10 * std::log(40.0), 1e-15);
  EXPECT_NEAR(gamma_for_confidence(2, 10, 0.1), 0.52164, 1e-4);
  EXPECT_NEAR(gamma_for_confidence(1, 1, 2.0 * std::exp(-1.0)), 1.0, 1e-15);
  EXPECT_THROW(gamma_for_confidence(0, 1, 0.1), InvalidArgument);
  EXPECT_THROW(gamma_for_confidence(1, 0, 0.1), InvalidArgument);
  EXPECT_THROW(gamma_for_confidence(1, 1, 1.0), InvalidArgument);
}

TEST(CoverageLowerBoundTest, Examples) {
  EXPECT_EQ(coverage_lower_bound(0.0, 10, 3), -5.0);
  EXPECT_NEAR(coverage_lower_bound(gamma_for_confidence(3, 7, 0.05), 7, 3), 0.95, 1e-12);
  EXPECT_NEAR(coverage_lower_bound(0.52164, 10, 2), 0.9, 1e-4);
}

TEST(KlDriftedBrownianTest, Examples) {
  EXPECT_EQ(kl_drifted_brownian(vec({0.3, -0.3}), vec({0.3, -0.3}), 5.0), 0.0);
  EXPECT_NEAR(kl_drifted_brownian(vec({0.6, 0.8}), vec({0, 0}), 2.0), 1.0, 1e-15);
}

// Girsanov: E_P[log dP/dQ] over drifted Brownian paths equals T/2 |mu_p - mu_q|^2.
TEST(KlDriftedBrownianTest, MatchesMonteCarloLikelihoodRatio) {
  const Eigen::VectorXd mu_p = vec({0.4, -0.1});
  const Eigen::VectorXd mu_q = vec({0.1, 0.2});
  const double horizon = 2.0;
  constexpr int steps = 20;
  const double dt = horizon / steps;
  NormalStream s(StreamTag::experiment, {23, 0, 0}, 0);
  constexpr int paths = 20'000;
  double sum = 0.0;
  for (int i = 0; i < paths; ++i) {
    double log_ratio = 0.0;
    for (int k = 0; k < steps; ++k) {
      for (int j = 0; j < 2; ++j) {
        const double dw = mu_p[j] * dt + s.next() * std::sqrt(dt);
        const double rp = dw - mu_p[j] * dt, rq = dw - mu_q[j] * dt;
        log_ratio += (rq * rq - rp * rp) / (2 * dt);
      }
    }
    sum += log_ratio;
  }
  const double exact = kl_drifted_brownian(mu_p, mu_q, horizon);
  // Var of the log ratio is T |dmu|^2 = 2 * exact.
  EXPECT_NEAR(sum / paths, exact, 4 * std::sqrt(2 * exact / paths));
}

TEST(GammaScheduleTest, Examples) {
  RobustnessConfig rc;
  rc.schedule = GammaSchedule::inverse_k;
  EXPECT_EQ(gamma_schedule(rc, 4, 4), 0.25);
  for (long k = 1; k <= 1000; ++k) ASSERT_EQ(gamma_schedule(rc, k, k), 1.0 / static_cast<double>(k));
  rc.schedule = GammaSchedule::fixed;
  rc.gamma = 0.0;
  EXPECT_EQ(gamma_schedule(rc, 17, 17), 0.0);
  rc.schedule = GammaSchedule::finite_sample;
  rc.p = 2;
  rc.epsilon = 0.1;
  EXPECT_NEAR(gamma_schedule(rc, 3, 10), 0.52164, 1e-4);
  EXPECT_THROW(gamma_schedule(rc, 0, 10), InvalidArgument);
}

}  // namespace
}  // namespace drpi
