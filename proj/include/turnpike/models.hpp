#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <string>

#include "turnpike/core.hpp"

namespace turnpike {

/// Control signal sampled by the integrator; must be defined on [0, T].
using ControlSignal = std::function<Eigen::VectorXd(double)>;

/// A second-order control system  q̈ = a(q, q̇, u)  with analytic partials.
class Model {
 public:
  virtual ~Model() = default;

  virtual const std::string& name() const = 0;
  virtual Eigen::Index config_dim() const = 0;
  virtual Eigen::Index control_dim() const = 0;

  virtual Eigen::VectorXd accel(const Eigen::VectorXd& q, const Eigen::VectorXd& v,
                                const Eigen::VectorXd& u) const = 0;

  /// Partial derivatives of accel with respect to q, v, u.
  virtual void accel_jacobians(const Eigen::VectorXd& q, const Eigen::VectorXd& v,
                               const Eigen::VectorXd& u, Eigen::MatrixXd& dq, Eigen::MatrixXd& dv,
                               Eigen::MatrixXd& du) const = 0;

  /// True when accel is affine in (q, v, u) with constant coefficients.
  bool linear() const { return linear_; }

  /// First-order form: x = [q; v], dx/dt = [v; accel].
  Eigen::VectorXd dynamics(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const;

 protected:
  explicit Model(bool linear) : linear_(linear) {}

 private:
  bool linear_;
};

/// Point mass on a line:  q̈ = u.
class DoubleIntegrator final : public Model {
 public:
  DoubleIntegrator() : Model(true) {}
  const std::string& name() const override;
  Eigen::Index config_dim() const override { return 1; }
  Eigen::Index control_dim() const override { return 1; }
  Eigen::VectorXd accel(const Eigen::VectorXd& q, const Eigen::VectorXd& v,
                        const Eigen::VectorXd& u) const override;
  void accel_jacobians(const Eigen::VectorXd& q, const Eigen::VectorXd& v,
                       const Eigen::VectorXd& u, Eigen::MatrixXd& dq, Eigen::MatrixXd& dv,
                       Eigen::MatrixXd& du) const override;
};

/// Planar vehicle with body-fixed thrust u1, lateral thrust u2 applied at
/// lever arm r behind the center of mass (unit mass and inertia):
///   ẍ = cosθ u1 - sinθ u2,  ÿ = sinθ u1 + cosθ u2,  θ̈ = -r u2.
class Hovercraft final : public Model {
 public:
  explicit Hovercraft(double lever_arm = 0.5);
  const std::string& name() const override;
  Eigen::Index config_dim() const override { return 3; }
  Eigen::Index control_dim() const override { return 2; }
  double lever_arm() const { return r_; }
  Eigen::VectorXd accel(const Eigen::VectorXd& q, const Eigen::VectorXd& v,
                        const Eigen::VectorXd& u) const override;
  void accel_jacobians(const Eigen::VectorXd& q, const Eigen::VectorXd& v,
                       const Eigen::VectorXd& u, Eigen::MatrixXd& dq, Eigen::MatrixXd& dv,
                       Eigen::MatrixXd& du) const override;

 private:
  double r_;
};

/// Factory keyed by model id ("double_integrator" or "hovercraft").
/// Throws ContractError for unknown ids. lever_arm only affects "hovercraft".
std::unique_ptr<Model> make_model(const std::string& id, double lever_arm = 0.5);

/// One classic RK4 step of the first-order form from state x at time t.
Eigen::VectorXd rk4_step(const Model& model, const Eigen::VectorXd& x, const ControlSignal& u,
                         double t, double h);

/// Fixed-step RK4 integration on a uniform grid with `nodes` >= 2 nodes.
/// Stored controls are the signal sampled at the nodes. Throws
/// DivergenceError if the state leaves [-1e12, 1e12] or turns non-finite.
Trajectory simulate(const Model& model, const State& x0, const ControlSignal& u, double T,
                    int nodes);

}  // namespace turnpike
