#include "drpi/solver.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace drpi {
namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

std::vector<double> random_costs(NormalStream& s, int m, double scale) {
  std::vector<double> c(static_cast<std::size_t>(m));
  for (double& v : c) v = scale * std::abs(s.next()) + 0.1 * s.next();
  return c;
}

TEST(ThetaStarTest, Examples) {
  auto f = [](const Eigen::VectorXd& x, double) { return Eigen::VectorXd(Eigen::VectorXd::Zero(x.size())); };
  auto eye = [](const Eigen::VectorXd&, double) { return Eigen::MatrixXd(Eigen::MatrixXd::Identity(2, 2)); };
  const auto square = DynamicsModel::custom("square", 2, 2, 2, {0, 1}, f, eye, eye);
  EXPECT_NEAR(theta_star(square, Eigen::MatrixXd::Identity(2, 2)), 1.0, 1e-15);

  const Eigen::MatrixXd r = 1e-3 * Eigen::MatrixXd::Identity(2, 2);
  EXPECT_NEAR(theta_star(make_model("double_integrator"), r), 1e-3, 1e-15);
  EXPECT_NEAR(theta_star(make_model("unicycle"), r), 1e-3, 1e-15);

  const auto lq = make_model("scalar_lq", {{"b", 1.0}, {"sigma", 2.0}});
  EXPECT_NEAR(theta_star(lq, 0.5 * Eigen::MatrixXd::Identity(1, 1)), 2.0, 1e-14);
}

TEST(ThetaStarTest, Errors) {
  auto f = [](const Eigen::VectorXd& x, double) { return Eigen::VectorXd(Eigen::VectorXd::Zero(x.size())); };
  auto eye = [](const Eigen::VectorXd&, double) { return Eigen::MatrixXd(Eigen::MatrixXd::Identity(2, 2)); };
  auto lopsided = [](const Eigen::VectorXd&, double) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Identity(2, 2);
    s(1, 1) = 2.0;
    return s;
  };
  const auto bad = DynamicsModel::custom("lopsided", 2, 2, 2, {0, 1}, f, eye, lopsided);
  EXPECT_THROW(theta_star(bad, Eigen::MatrixXd::Identity(2, 2)), NoLinearizingTheta);
  EXPECT_THROW(theta_star(make_model("double_integrator"), Eigen::MatrixXd::Identity(3, 3)), DimensionError);
}

TEST(EffectiveTemperatureTest, Examples) {
  EXPECT_NEAR(effective_temperature(2.0, 1.0), 2.0, 1e-15);
  EXPECT_NEAR(effective_temperature(2e-3, 1e-3), 2e-3, 1e-18);
  EXPECT_NEAR(effective_temperature(1e12, 1.0), 1.0, 1e-11);
  EXPECT_EQ(effective_temperature(std::numeric_limits<double>::infinity(), 0.5), 0.5);
  EXPECT_THROW(effective_temperature(1.0, 1.0), SingularTheta);
  EXPECT_THROW(effective_temperature(0.5, 1.0), SingularTheta);
  double prev = std::numeric_limits<double>::infinity();
  for (double th = 1.001; th < 1e4; th *= 1.3) {
    const double l = effective_temperature(th, 1.0);
    ASSERT_LT(l, prev);
    prev = l;
  }
}

TEST(FreeEnergyTest, Examples) {
  const std::vector<double> constant(7, 3.25);
  for (double l : {1e-6, 1.0, 1e6}) EXPECT_NEAR(free_energy(constant, l), 3.25, 1e-15);
  const std::vector<double> two{0.0, std::log(9.0)};
  EXPECT_NEAR(free_energy(two, 1.0), std::log(9.0 / 5.0), 1e-15);
  EXPECT_NEAR(free_energy(two, 1.0), 0.58779, 1e-5);
}

TEST(FreeEnergyTest, Limits) {
  const std::vector<double> j{1.0, 2.0, 4.0, 7.5};
  EXPECT_NEAR(free_energy(j, 1e-4), 1.0 + 1e-4 * std::log(4.0), 1e-12);
  EXPECT_NEAR(free_energy(j, 1e9), 3.625, 1e-8);
}

TEST(FreeEnergyTest, WideCostSpreadStaysFinite) {
  const std::vector<double> j{0.0, 1e6, 1e300};
  EXPECT_NEAR(free_energy(j, 1e-3), 1e-3 * std::log(3.0), 1e-15);
  const auto w = path_integral_weights(j, 1e-3);
  EXPECT_EQ(w[0], 1.0);
  EXPECT_EQ(w[1], 0.0);
}

TEST(FreeEnergyTest, TemperatureDerivativeIsKl) {
  // dF/dlambda = (F - E_w[J]) / lambda.
  NormalStream s(StreamTag::experiment, {31, 0, 0}, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto j = random_costs(s, 50, 2.0);
    const double l = 0.3 + 0.1 * trial;
    const double h = 1e-6 * l;
    const double fd = (free_energy(j, l + h) - free_energy(j, l - h)) / (2 * h);
    const auto w = path_integral_weights(j, l);
    const double ew = std::inner_product(w.begin(), w.end(), j.begin(), 0.0);
    ASSERT_NEAR(fd, (free_energy(j, l) - ew) / l, 1e-6);
    ASSERT_GE(fd, -1e-9);
  }
}

TEST(FreeEnergyTest, Errors) {
  EXPECT_THROW(free_energy(std::vector<double>{}, 1.0), InvalidArgument);
  EXPECT_THROW(free_energy(std::vector<double>{1.0}, 0.0), InvalidArgument);
  EXPECT_THROW(free_energy(std::vector<double>{NAN}, 1.0), NonFiniteError);
}

TEST(PathIntegralWeightsTest, Examples) {
  const auto uniform = path_integral_weights(std::vector<double>(4, 2.0), 0.3);
  for (double w : uniform) EXPECT_NEAR(w, 0.25, 1e-16);
  const double l = 0.37;
  const auto w = path_integral_weights(std::vector<double>{0.0, l * std::log(3.0)}, l);
  EXPECT_NEAR(w[0], 0.75, 1e-15);
  EXPECT_NEAR(w[1], 0.25, 1e-15);
}

TEST(PathIntegralWeightsTest, SumToOneAndShiftInvariant) {
  NormalStream s(StreamTag::experiment, {37, 0, 0}, 0);
  for (int trial = 0; trial < 200; ++trial) {
    auto j = random_costs(s, 100, 5.0);
    const double l = 0.01 + std::abs(s.next());
    const auto w = path_integral_weights(j, l);
    ASSERT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 1.0, 1e-12);
    const double c = 100.0 * s.next();
    for (double& v : j) v += c;
    const auto shifted = path_integral_weights(j, l);
    for (std::size_t i = 0; i < w.size(); ++i) ASSERT_NEAR(w[i], shifted[i], 1e-12);
  }
}

TEST(MasterObjectiveTest, RiskNeutralNonincreasingInTheta) {
  NormalStream s(StreamTag::experiment, {41, 0, 0}, 0);
  const auto j = random_costs(s, 200, 1.0);
  double prev = std::numeric_limits<double>::infinity();
  for (double th = 1.01; th < 1e5; th *= 1.5) {
    const double v = master_objective(0.0, th, 1.0, j);
    ASSERT_LE(v, prev + 1e-12);
    prev = v;
  }
}

TEST(MasterObjectiveTest, ConstantCostsAreLinear) {
  const std::vector<double> j(5, 2.0);
  EXPECT_NEAR(master_objective(0.5, 3.0, 1.0, j), 3.5, 1e-14);
}

TEST(SolveMasterTest, RiskNeutralShortCircuit) {
  const std::vector<double> j{1.0, 2.0, 3.0};
  const auto sol = solve_master(0.0, 0.25, j);
  EXPECT_EQ(sol.lambda_eff, 0.25);
  EXPECT_EQ(sol.theta_hat, 0.25 * 1e6);
  EXPECT_NEAR(sol.master_value, free_energy(j, 0.25), 1e-15);
}

TEST(SolveMasterTest, ConstantCostsPickSmallestTheta) {
  const std::vector<double> j(10, 4.0);
  const auto sol = solve_master(0.3, 2.0, j);
  const auto dom = ThetaDomain::make(2.0, {});
  EXPECT_NEAR(sol.theta_hat, dom.theta_lo, 1e-9 * dom.theta_lo);
  EXPECT_GT(sol.theta_hat, 2.0 * (1 + kSingularMargin));
  EXPECT_NEAR(sol.master_value, 0.3 * sol.theta_hat + 4.0, 1e-12);
}

TEST(SolveMasterTest, MatchesDenseScan) {
  NormalStream s(StreamTag::experiment, {43, 0, 0}, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const auto j = random_costs(s, 300, 1.0 + trial);
    const double th_star = 1e-3 * (1 + trial);
    const double gamma = 0.01 * std::pow(1.5, trial % 15);
    const auto sol = solve_master(gamma, th_star, j);
    const auto dom = ThetaDomain::make(th_star, {});
    double best = std::numeric_limits<double>::infinity();
    const double a = std::log(dom.s_lo), b = std::log(dom.s_hi);
    constexpr int n = 20'000;
    for (int i = 0; i <= n; ++i) {
      const double th = dom.theta_of(std::exp(a + (b - a) * i / n), th_star);
      best = std::min(best, master_objective(gamma, th, th_star, j));
    }
    ASSERT_LE(sol.master_value, best + 1e-6 * std::abs(best)) << "trial " << trial;
    ASSERT_NEAR(sol.master_value, master_objective(gamma, sol.theta_hat, th_star, j), 1e-12 * std::abs(best) + 1e-15);
  }
}

TEST(SolveMasterTest, ComparativeStaticsInGamma) {
  NormalStream s(StreamTag::experiment, {47, 0, 0}, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto j = random_costs(s, 200, 2.0);
    double prev_theta = std::numeric_limits<double>::infinity();
    double prev_value = -std::numeric_limits<double>::infinity();
    for (double gamma : {0.0, 1e-3, 1e-2, 0.1, 1.0, 10.0}) {
      const auto sol = solve_master(gamma, 0.1, j);
      ASSERT_LE(sol.theta_hat, prev_theta * (1 + 1e-9));
      ASSERT_GE(sol.master_value, prev_value - 1e-9);
      ASSERT_GT(sol.lambda_eff, 0.0);
      prev_theta = sol.theta_hat;
      prev_value = sol.master_value;
    }
  }
}

TEST(SolveMasterTest, Errors) {
  const std::vector<double> j{1.0};
  EXPECT_THROW(solve_master(-1.0, 1.0, j), InvalidArgument);
  EXPECT_THROW(solve_master(1.0, 0.0, j), InvalidArgument);
  EXPECT_THROW(solve_master(1.0, 1.0, std::vector<double>{}), InvalidArgument);
  SearchConfig cfg;
  cfg.grid_points = 2;
  EXPECT_THROW(solve_master(1.0, 1.0, j, cfg), InvalidArgument);
}

TEST(ControlFromWeightsTest, ZeroNoiseZeroControl) {
  const auto di = make_model("double_integrator");
  const std::vector<double> w(5, 0.2);
  const auto u = control_from_weights(di, Eigen::MatrixXd::Identity(2, 2), vec({0, 0, 0, 0}), w,
                                      Eigen::MatrixXd::Zero(5, 2), 0.05);
  EXPECT_TRUE(u.isZero());
}

TEST(ControlFromWeightsTest, SingleSampleScaledBySqrtDt) {
  const auto di = make_model("double_integrator");
  Eigen::MatrixXd eps(1, 2);
  eps << 0.3, -1.1;
  const auto u = control_from_weights(di, Eigen::MatrixXd::Identity(2, 2), vec({0, 0, 0, 0}), std::vector<double>{1.0},
                                      eps, 0.25);
  EXPECT_NEAR(u[0], 0.6, 1e-15);
  EXPECT_NEAR(u[1], -2.2, 1e-15);
}

TEST(ControlFromWeightsTest, ProjectionFormIndependentOfR) {
  auto f = [](const Eigen::VectorXd& x, double) { return Eigen::VectorXd(Eigen::VectorXd::Zero(x.size())); };
  auto eye = [](const Eigen::VectorXd&, double) { return Eigen::MatrixXd(Eigen::MatrixXd::Identity(2, 2)); };
  const auto model = DynamicsModel::custom("direct", 2, 2, 2, {0, 1}, f, eye, eye);
  ASSERT_FALSE(model.channel_noise());
  Eigen::MatrixXd eps(3, 2);
  eps << 1, 2, -1, 0.5, 0.25, -3;
  const std::vector<double> w{0.5, 0.3, 0.2};
  Eigen::MatrixXd r(2, 2);
  r << 3, 1, 1, 2;
  const auto u1 = control_from_weights(model, Eigen::MatrixXd::Identity(2, 2), vec({0, 0}), w, eps, 0.04);
  const auto u2 = control_from_weights(model, r, vec({0, 0}), w, eps, 0.04);
  EXPECT_LT((u1 - u2).cwiseAbs().maxCoeff(), 1e-12);
  const Eigen::VectorXd expected = eps.transpose() * Eigen::Map<const Eigen::VectorXd>(w.data(), 3) / 0.2;
  EXPECT_LT((u1 - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ControlFromWeightsTest, Errors) {
  const auto di = make_model("double_integrator");
  const std::vector<double> w(2, 0.5);
  EXPECT_THROW(control_from_weights(di, Eigen::MatrixXd::Identity(2, 2), vec({0, 0, 0, 0}), w,
                                    Eigen::MatrixXd::Zero(3, 2), 0.05),
               DimensionError);
  EXPECT_THROW(control_from_weights(di, Eigen::MatrixXd::Identity(2, 2), vec({0, 0, 0, 0}), w,
                                    Eigen::MatrixXd::Zero(2, 2), 0.0),
               InvalidArgument);
  auto f = [](const Eigen::VectorXd& x, double) { return Eigen::VectorXd(Eigen::VectorXd::Zero(x.size())); };
  auto g = [](const Eigen::VectorXd&, double) {
    Eigen::MatrixXd m(2, 2);
    m << 1, 1, 1, 1;
    return m;
  };
  const auto rank_deficient = DynamicsModel::custom("flat", 2, 2, 2, {0, 1}, f, g, g);
  EXPECT_THROW(control_from_weights(rank_deficient, Eigen::MatrixXd::Identity(2, 2), vec({0, 0}), w,
                                    Eigen::MatrixXd::Ones(2, 2), 0.05),
               SingularProjection);
}

}  // namespace
}  // namespace drpi
