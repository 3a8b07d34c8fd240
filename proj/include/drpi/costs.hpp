#pragma once

// State, terminal and control costs.
//
// Two cost families share one type:
//  - navigation: q(x) = c1 |x - x*| + c2 1[x in obstacle] + c3 1[x outside boundary],
//    psi(x) = cT |pos(x) - target|, positions in the first two state entries;
//  - quadratic:  q(x) = 1/2 qx |x|^2,  psi(x) = 1/2 qT |x|^2 (scalar LQ oracles).
// Control cost is 1/2 u^T R u in both cases.

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <string>

#include "drpi/errors.hpp"
#include "drpi/models.hpp"

namespace drpi {

/// Closed axis-aligned rectangle [x_min, x_max] x [y_min, y_max].
struct Rect {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;

  bool contains(double x, double y) const { return x >= x_min && x <= x_max && y >= y_min && y <= y_max; }
  bool strictly_inside(const Rect& outer) const {
    return x_min > outer.x_min && x_max < outer.x_max && y_min > outer.y_min && y_max < outer.y_max;
  }
  bool valid() const { return x_min < x_max && y_min < y_max; }
};

enum class CostKind { navigation, quadratic };

struct NavigationCostParams {
  double c1 = 1e-2;
  double c2 = 1e2;
  double c3 = 1e2;
  double terminal_weight = 10.0;
  Eigen::Vector2d target = Eigen::Vector2d::Zero();
  double goal_radius = 0.5;
  Rect obstacle{-2.5, -0.5, 0.5, 2.5};
  Rect boundary{-5.0, 5.0, -5.0, 5.0};
};

struct QuadraticCostParams {
  double state_weight = 1.0;
  double terminal_weight = 0.0;
};

class CostModel {
 public:
  static CostModel navigation(const NavigationCostParams& params, Eigen::MatrixXd control_weight) {
    CostModel cm(CostKind::navigation, std::move(control_weight));
    cm.nav_ = params;
    if (!(params.c1 >= 0.0 && params.c2 >= 0.0 && params.c3 >= 0.0 && params.terminal_weight >= 0.0))
      throw InvalidArgument("navigation cost: coefficients must be nonnegative");
    if (!(params.goal_radius > 0.0)) throw InvalidArgument("navigation cost: goal_radius must be positive");
    if (!params.obstacle.valid() || !params.boundary.valid())
      throw InvalidArgument("navigation cost: empty rectangle");
    if (!params.obstacle.strictly_inside(params.boundary))
      throw InvalidArgument("navigation cost: obstacle must lie strictly inside the boundary");
    return cm;
  }

  static CostModel quadratic(const QuadraticCostParams& params, Eigen::MatrixXd control_weight) {
    if (!(params.state_weight >= 0.0 && params.terminal_weight >= 0.0))
      throw InvalidArgument("quadratic cost: weights must be nonnegative");
    CostModel cm(CostKind::quadratic, std::move(control_weight));
    cm.quad_ = params;
    return cm;
  }

  CostKind kind() const { return kind_; }
  const Eigen::MatrixXd& control_weight() const { return r_; }
  const NavigationCostParams& navigation_params() const { return nav_; }
  const QuadraticCostParams& quadratic_params() const { return quad_; }

  /// Running state cost q(x). Raw-buffer form used by the rollout engine.
  double state_cost(std::span<const double> x) const {
    if (kind_ == CostKind::quadratic) {
      double sq = 0.0;
      for (double v : x) sq += v * v;
      return 0.5 * quad_.state_weight * sq;
    }
    const double dx = x[0] - nav_.target[0];
    const double dy = x[1] - nav_.target[1];
    double sq = dx * dx + dy * dy;
    for (std::size_t i = 2; i < x.size(); ++i) sq += x[i] * x[i];
    double q = nav_.c1 * std::sqrt(sq);
    if (in_obstacle(x)) q += nav_.c2;
    if (outside_boundary(x)) q += nav_.c3;
    return q;
  }

  double terminal_cost(std::span<const double> x) const {
    if (kind_ == CostKind::quadratic) {
      double sq = 0.0;
      for (double v : x) sq += v * v;
      return 0.5 * quad_.terminal_weight * sq;
    }
    return nav_.terminal_weight * distance_to_target(x);
  }

  bool has_geometry() const { return kind_ == CostKind::navigation; }

  bool in_obstacle(std::span<const double> x) const {
    return kind_ == CostKind::navigation && nav_.obstacle.contains(x[0], x[1]);
  }

  bool outside_boundary(std::span<const double> x) const {
    return kind_ == CostKind::navigation && !nav_.boundary.contains(x[0], x[1]);
  }

  bool at_goal(std::span<const double> x) const {
    return kind_ == CostKind::navigation && distance_to_target(x) <= nav_.goal_radius;
  }

  double distance_to_target(std::span<const double> x) const {
    return std::hypot(x[0] - nav_.target[0], x[1] - nav_.target[1]);
  }

 private:
  CostModel(CostKind kind, Eigen::MatrixXd r) : kind_(kind), r_(std::move(r)) {
    if (r_.rows() == 0 || r_.rows() != r_.cols()) throw DimensionError("control weight R must be square");
    if (!r_.allFinite() || (r_ - r_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * r_.cwiseAbs().maxCoeff())
      throw InvalidArgument("control weight R must be symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(r_);
    if (llt.info() != Eigen::Success) throw InvalidArgument("control weight R must be positive definite");
  }

  CostKind kind_;
  Eigen::MatrixXd r_;
  NavigationCostParams nav_;
  QuadraticCostParams quad_;
};

inline std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

/// q(x). Navigation costs need at least the two position entries.
inline double state_cost(const CostModel& cm, const StateVec& x, double /*t*/ = 0.0) {
  if (cm.kind() == CostKind::navigation && x.size() < 2)
    throw DimensionError("state_cost: navigation cost needs a planar position");
  if (x.size() == 0) throw DimensionError("state_cost: empty state");
  return cm.state_cost(as_span(x));
}

inline double terminal_cost(const CostModel& cm, const StateVec& x) {
  if (cm.kind() == CostKind::navigation && x.size() < 2)
    throw DimensionError("terminal_cost: navigation cost needs a planar position");
  return cm.terminal_cost(as_span(x));
}

/// 1/2 u^T R u.
inline double control_cost(const CostModel& cm, const ControlVec& u) {
  if (u.size() != cm.control_weight().rows()) throw DimensionError("control_cost: control dimension mismatch");
  return 0.5 * u.dot(cm.control_weight() * u);
}

/// psi(x_K) + sum_{s=k+1}^{K-1} q(x_s) dt for a path x_k..x_K.
///
/// The state at the first index is not charged; it is fixed when the path
/// starts. No control term is included.
inline double trajectory_cost(const CostModel& cm, std::span<const StateVec> states, double dt) {
  if (states.empty()) throw InvalidArgument("trajectory_cost: empty trajectory");
  if (!(dt > 0.0)) throw InvalidArgument("trajectory_cost: dt must be positive");
  double running = 0.0;
  for (std::size_t s = 1; s + 1 < states.size(); ++s) running += state_cost(cm, states[s]) * dt;
  return running + terminal_cost(cm, states.back());
}

}  // namespace drpi
