#pragma once

// Control-affine stochastic dynamics
//
//   dx = f(x,t) dt + G(x,t) u dt + Sigma(x,t) dxi
//
// and its Euler-Maruyama step. Three built-in families are provided
// (double integrator, unicycle, scalar linear system); arbitrary models can be
// assembled from callables with DynamicsModel::custom().

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "drpi/errors.hpp"

namespace drpi {

using StateVec = Eigen::VectorXd;
using ControlVec = Eigen::VectorXd;
using DisturbanceIncrement = Eigen::VectorXd;

enum class ModelFamily { double_integrator, unicycle, scalar_lq, custom };

/// Parameters for the scalar linear family dx = a x dt + b u dt + sigma dxi.
struct ScalarLinearParams {
  double a = 0.0;
  double b = 1.0;
  double sigma = 1.0;
};

/// Named numeric parameters accepted by make_model(). Unused keys are errors.
using ModelParams = std::map<std::string, double>;

namespace detail {
inline bool all_finite(const Eigen::Ref<const Eigen::VectorXd>& v) { return v.allFinite(); }
}  // namespace detail

class DynamicsModel {
 public:
  using DriftFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&, double)>;
  using MatrixFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&, double)>;

  static DynamicsModel double_integrator() {
    DynamicsModel m(ModelFamily::double_integrator, "double_integrator", 4, 2, 2);
    m.actuated_ = {2, 3};
    m.channel_noise_ = true;
    m.channel_ = Eigen::MatrixXd::Identity(2, 2);
    return m;
  }

  static DynamicsModel unicycle() {
    DynamicsModel m(ModelFamily::unicycle, "unicycle", 3, 2, 2);
    // No row subset of G is invertible for every heading; the control law uses
    // the channel form instead, so there is no row partition.
    m.channel_noise_ = true;
    m.channel_ = Eigen::MatrixXd::Identity(2, 2);
    return m;
  }

  static DynamicsModel scalar_lq(const ScalarLinearParams& params) {
    if (!(params.b != 0.0) || !std::isfinite(params.b))
      throw InvalidArgument("scalar_lq: b must be finite and non-zero");
    if (!(params.sigma > 0.0) || !std::isfinite(params.sigma))
      throw InvalidArgument("scalar_lq: sigma must be positive");
    if (!std::isfinite(params.a)) throw InvalidArgument("scalar_lq: a must be finite");
    DynamicsModel m(ModelFamily::scalar_lq, "scalar_lq", 1, 1, 1);
    m.scalar_ = params;
    m.actuated_ = {0};
    m.channel_noise_ = true;
    m.channel_ = Eigen::MatrixXd::Constant(1, 1, params.sigma / params.b);
    return m;
  }

  /// Assemble a model from callables. `channel` (k x p) may be empty, in which
  /// case the model is not treated as channel-noise.
  static DynamicsModel custom(std::string name, int n, int k, int p, std::vector<int> actuated,
                              DriftFn drift, MatrixFn control, MatrixFn diffusion,
                              Eigen::MatrixXd channel = {}) {
    if (n <= 0 || k <= 0 || p <= 0) throw InvalidArgument("custom model: dimensions must be positive");
    DynamicsModel m(ModelFamily::custom, std::move(name), n, k, p);
    m.actuated_ = std::move(actuated);
    auto fns = std::make_shared<Callables>();
    fns->drift = std::move(drift);
    fns->control = std::move(control);
    fns->diffusion = std::move(diffusion);
    m.callables_ = std::move(fns);
    if (channel.size() > 0) {
      if (channel.rows() != k || channel.cols() != p)
        throw DimensionError("custom model: channel matrix must be k x p");
      m.channel_noise_ = true;
      m.channel_ = std::move(channel);
    }
    m.validate_partition();
    return m;
  }

  const std::string& name() const { return name_; }
  ModelFamily family() const { return family_; }
  int state_dim() const { return n_; }
  int control_dim() const { return k_; }
  int noise_dim() const { return p_; }
  int actuated_count() const { return static_cast<int>(actuated_.size()); }
  const std::vector<int>& actuated_indices() const { return actuated_; }
  bool channel_noise() const { return channel_noise_; }
  /// k x p matrix S with Sigma = G S; only meaningful when channel_noise().
  const Eigen::MatrixXd& channel_matrix() const { return channel_; }

  Eigen::VectorXd drift(const Eigen::VectorXd& x, double t) const {
    check_state(x);
    switch (family_) {
      case ModelFamily::double_integrator:
        return Eigen::Vector4d(x[2], x[3], 0.0, 0.0);
      case ModelFamily::unicycle:
        return Eigen::VectorXd::Zero(3);
      case ModelFamily::scalar_lq:
        return Eigen::VectorXd::Constant(1, scalar_.a * x[0]);
      case ModelFamily::custom:
        return callables_->drift(x, t);
    }
    return {};
  }

  Eigen::MatrixXd control_matrix(const Eigen::VectorXd& x, double t) const {
    check_state(x);
    switch (family_) {
      case ModelFamily::double_integrator: {
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(4, 2);
        g(2, 0) = 1.0;
        g(3, 1) = 1.0;
        return g;
      }
      case ModelFamily::unicycle: {
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(3, 2);
        g(0, 0) = std::cos(x[2]);
        g(1, 0) = std::sin(x[2]);
        g(2, 1) = 1.0;
        return g;
      }
      case ModelFamily::scalar_lq:
        return Eigen::MatrixXd::Constant(1, 1, scalar_.b);
      case ModelFamily::custom:
        return callables_->control(x, t);
    }
    return {};
  }

  Eigen::MatrixXd diffusion(const Eigen::VectorXd& x, double t) const {
    check_state(x);
    switch (family_) {
      case ModelFamily::double_integrator:
      case ModelFamily::unicycle:
        return control_matrix(x, t);
      case ModelFamily::scalar_lq:
        return Eigen::MatrixXd::Constant(1, 1, scalar_.sigma);
      case ModelFamily::custom:
        return callables_->diffusion(x, t);
    }
    return {};
  }

  /// Euler-Maruyama kernel on raw buffers:
  ///   out = x + f(x,t) dt + G(x,t) u dt + Sigma(x,t) dxi.
  /// `u` may be empty (zero control). `out` must not alias `x`.
  void advance(std::span<const double> x, std::span<const double> u, std::span<const double> dxi,
               double t, double dt, std::span<double> out) const {
    switch (family_) {
      case ModelFamily::double_integrator: {
        const double u0 = u.empty() ? 0.0 : u[0];
        const double u1 = u.empty() ? 0.0 : u[1];
        out[0] = x[0] + x[2] * dt;
        out[1] = x[1] + x[3] * dt;
        out[2] = x[2] + u0 * dt + dxi[0];
        out[3] = x[3] + u1 * dt + dxi[1];
        return;
      }
      case ModelFamily::unicycle: {
        const double u0 = u.empty() ? 0.0 : u[0];
        const double u1 = u.empty() ? 0.0 : u[1];
        const double c = std::cos(x[2]);
        const double s = std::sin(x[2]);
        out[0] = x[0] + c * u0 * dt + c * dxi[0];
        out[1] = x[1] + s * u0 * dt + s * dxi[0];
        out[2] = x[2] + u1 * dt + dxi[1];
        return;
      }
      case ModelFamily::scalar_lq: {
        const double u0 = u.empty() ? 0.0 : u[0];
        out[0] = x[0] + scalar_.a * x[0] * dt + scalar_.b * u0 * dt + scalar_.sigma * dxi[0];
        return;
      }
      case ModelFamily::custom: {
        const Eigen::VectorXd xv = Eigen::Map<const Eigen::VectorXd>(x.data(), n_);
        const Eigen::VectorXd dv = Eigen::Map<const Eigen::VectorXd>(dxi.data(), p_);
        Eigen::VectorXd next = xv + callables_->drift(xv, t) * dt + callables_->diffusion(xv, t) * dv;
        if (!u.empty()) {
          const Eigen::VectorXd uv = Eigen::Map<const Eigen::VectorXd>(u.data(), k_);
          next += callables_->control(xv, t) * uv * dt;
        }
        Eigen::Map<Eigen::VectorXd>(out.data(), n_) = next;
        return;
      }
    }
  }

  /// Full-rank, partition and channel-identity checks at a few states.
  void validate(std::span<const Eigen::VectorXd> sample_states) const {
    validate_partition();
    for (const auto& x : sample_states) {
      const Eigen::MatrixXd g = control_matrix(x, 0.0);
      const Eigen::MatrixXd sig = diffusion(x, 0.0);
      if (g.rows() != n_ || g.cols() != k_) throw DimensionError(name_ + ": G has wrong shape");
      if (sig.rows() != n_ || sig.cols() != p_) throw DimensionError(name_ + ": Sigma has wrong shape");
      if (Eigen::FullPivLU<Eigen::MatrixXd>(g).rank() != k_)
        throw InvalidArgument(name_ + ": G is not full column rank");
      if (Eigen::FullPivLU<Eigen::MatrixXd>(sig).rank() != p_)
        throw InvalidArgument(name_ + ": Sigma is not full column rank");
      if (channel_noise_ && ((g * channel_ - sig).cwiseAbs().maxCoeff() > 1e-12))
        throw InvalidArgument(name_ + ": Sigma != G S");
    }
  }

  void check_state(const Eigen::VectorXd& x) const {
    if (x.size() != n_) throw DimensionError(name_ + ": state has length " + std::to_string(x.size()) +
                                             ", expected " + std::to_string(n_));
  }

 private:
  struct Callables {
    DriftFn drift;
    MatrixFn control;
    MatrixFn diffusion;
  };

  DynamicsModel(ModelFamily family, std::string name, int n, int k, int p)
      : family_(family), name_(std::move(name)), n_(n), k_(k), p_(p) {}

  void validate_partition() const {
    if (actuated_count() > n_) throw InvalidArgument(name_ + ": more actuated states than states");
    std::vector<bool> seen(static_cast<std::size_t>(n_), false);
    for (int idx : actuated_) {
      if (idx < 0 || idx >= n_) throw InvalidArgument(name_ + ": actuated index out of range");
      if (seen[static_cast<std::size_t>(idx)]) throw InvalidArgument(name_ + ": duplicate actuated index");
      seen[static_cast<std::size_t>(idx)] = true;
    }
  }

  ModelFamily family_;
  std::string name_;
  int n_;
  int k_;
  int p_;
  std::vector<int> actuated_;
  bool channel_noise_ = false;
  Eigen::MatrixXd channel_;
  ScalarLinearParams scalar_;
  std::shared_ptr<const Callables> callables_;
};

/// Build one of the registered model families by name.
///
/// double_integrator and unicycle take no parameters; scalar_lq accepts
/// "a", "b" and "sigma".
inline DynamicsModel make_model(const std::string& name, const ModelParams& params = {}) {
  auto reject_unknown = [&](std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : params) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || key == a;
      if (!ok) throw InvalidArgument("make_model(" + name + "): unknown parameter '" + key + "'");
    }
  };
  if (name == "double_integrator") {
    reject_unknown({});
    return DynamicsModel::double_integrator();
  }
  if (name == "unicycle") {
    reject_unknown({});
    return DynamicsModel::unicycle();
  }
  if (name == "scalar_lq") {
    reject_unknown({"a", "b", "sigma"});
    ScalarLinearParams sp;
    if (auto it = params.find("a"); it != params.end()) sp.a = it->second;
    if (auto it = params.find("b"); it != params.end()) sp.b = it->second;
    if (auto it = params.find("sigma"); it != params.end()) sp.sigma = it->second;
    return DynamicsModel::scalar_lq(sp);
  }
  throw InvalidArgument("make_model: unknown model '" + name + "'");
}

/// One Euler-Maruyama step: x + f dt + G u dt + Sigma dxi.
inline StateVec em_step(const DynamicsModel& model, const StateVec& x, const ControlVec& u,
                        const DisturbanceIncrement& dxi, double dt, double t = 0.0) {
  model.check_state(x);
  if (u.size() != model.control_dim())
    throw DimensionError(model.name() + ": control has length " + std::to_string(u.size()));
  if (dxi.size() != model.noise_dim())
    throw DimensionError(model.name() + ": disturbance has length " + std::to_string(dxi.size()));
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("em_step: dt must be positive");
  if (!detail::all_finite(x) || !detail::all_finite(u) || !detail::all_finite(dxi))
    throw NonFiniteError("em_step: non-finite input");
  StateVec out(model.state_dim());
  model.advance({x.data(), static_cast<std::size_t>(x.size())},
                {u.data(), static_cast<std::size_t>(u.size())},
                {dxi.data(), static_cast<std::size_t>(dxi.size())}, t, dt,
                {out.data(), static_cast<std::size_t>(out.size())});
  return out;
}

}  // namespace drpi
