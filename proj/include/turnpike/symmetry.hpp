#pragma once

#include <Eigen/Core>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "turnpike/core.hpp"
#include "turnpike/models.hpp"

namespace turnpike {

/// Lie group acting on the state space, lifted to velocities. Group
/// elements and algebra elements are stored as flat coordinate vectors.
class SymmetryAction {
 public:
  enum class Kind { Translation, Planar };

  virtual ~SymmetryAction() = default;

  virtual const std::string& name() const = 0;
  virtual Kind kind() const = 0;
  virtual Eigen::Index group_dim() const = 0;
  virtual Eigen::Index config_dim() const = 0;

  virtual Eigen::VectorXd identity() const = 0;
  virtual Eigen::VectorXd compose(const Eigen::VectorXd& g, const Eigen::VectorXd& h) const = 0;
  virtual Eigen::VectorXd inverse(const Eigen::VectorXd& g) const = 0;
  /// Group exponential of the algebra element xi scaled by time t.
  virtual Eigen::VectorXd exp(const Eigen::VectorXd& xi, double t) const = 0;
  /// Lifted action on a full state (configuration and velocity).
  virtual State act(const Eigen::VectorXd& g, const State& x) const = 0;
};

/// R^m acting additively on the first m configuration coordinates;
/// velocities are untouched.
class TranslationAction final : public SymmetryAction {
 public:
  TranslationAction(Eigen::Index config_dim, Eigen::Index group_dim);
  const std::string& name() const override;
  Kind kind() const override { return Kind::Translation; }
  Eigen::Index group_dim() const override { return m_; }
  Eigen::Index config_dim() const override { return nq_; }
  Eigen::VectorXd identity() const override;
  Eigen::VectorXd compose(const Eigen::VectorXd& g, const Eigen::VectorXd& h) const override;
  Eigen::VectorXd inverse(const Eigen::VectorXd& g) const override;
  Eigen::VectorXd exp(const Eigen::VectorXd& xi, double t) const override;
  State act(const Eigen::VectorXd& g, const State& x) const override;

 private:
  Eigen::Index nq_;
  Eigen::Index m_;
};

/// Planar rigid motions acting on (x, y, theta) configurations. Elements
/// are (px, py, alpha): rotate by alpha about the origin, then translate.
/// Planar velocities rotate with the frame; the angular rate is unchanged.
class PlanarAction final : public SymmetryAction {
 public:
  const std::string& name() const override;
  Kind kind() const override { return Kind::Planar; }
  Eigen::Index group_dim() const override { return 3; }
  Eigen::Index config_dim() const override { return 3; }
  Eigen::VectorXd identity() const override;
  Eigen::VectorXd compose(const Eigen::VectorXd& g, const Eigen::VectorXd& h) const override;
  Eigen::VectorXd inverse(const Eigen::VectorXd& g) const override;
  Eigen::VectorXd exp(const Eigen::VectorXd& xi, double t) const override;
  State act(const Eigen::VectorXd& g, const State& x) const override;
};

/// Lifted action applied to a state, as a free function.
State act_lifted(const SymmetryAction& action, const Eigen::VectorXd& g, const State& x);

/// Motion generated by a one-parameter group orbit flown with constant
/// control: x(t) = act(exp(xi t), x0) solves the dynamics with u held
/// fixed, and the model accelerations vanish along the orbit.
struct TrimPrimitive {
  Eigen::VectorXd xi;
  Eigen::VectorXd u_bar;
  State x0;
};

/// State along the trim orbit at time t.
State trim_flow(const SymmetryAction& action, const TrimPrimitive& trim, double t);

/// Largest node-wise mismatch between integrating from a shifted start and
/// shifting the integrated trajectory, in the max norm over q and v.
double check_equivariance(const Model& model, const SymmetryAction& action,
                          const Eigen::VectorXd& g, const State& x0, const ControlSignal& u,
                          double T, int nodes);

/// Largest node-wise gap between the trim orbit and an RK4 integration of
/// the model from trim.x0 under the trim's constant control.
double trim_defect(const Model& model, const SymmetryAction& action, const TrimPrimitive& trim,
                   double T, int nodes);

/// Constructs the zero-acceleration trim orbit through x0, if one exists:
/// straight drifts for translations, drifts and in-place spins for the
/// planar group. Velocity data no such orbit can reproduce yields nullopt.
std::optional<TrimPrimitive> trim_through(const Model& model, const SymmetryAction& action,
                                          const State& x0, double tol = 1e-12);

struct VelocitySteadyState {
  Eigen::VectorXd v_bar;
  Eigen::VectorXd u_bar;
  double residual = 0.0;
  /// Set when the optimal steady state is non-unique and a minimum-norm
  /// representative was chosen.
  bool degenerate = false;
};

/// Configurations at which steady-state residuals are sampled; enough to
/// pin down any configuration dependence of the built-in models.
std::vector<Eigen::VectorXd> default_config_samples(const Model& model);

/// Solves accel(q_s, v_bar, u) = 0 for u across all configuration samples
/// by damped Newton from u = 0, with minimum-norm least-squares steps.
/// Throws RootFindError if the residual does not reach tol.
VelocitySteadyState find_velocity_steady_state(const Model& model, const Eigen::VectorXd& v_bar,
                                               const std::vector<Eigen::VectorXd>& q_samples,
                                               double tol = 1e-10, int max_iter = 50);
VelocitySteadyState find_velocity_steady_state(const Model& model, const Eigen::VectorXd& v_bar,
                                               double tol = 1e-10, int max_iter = 50);

/// Minimizes the stage cost over velocity steady states with v_bar in the
/// given compact box: 21-point-per-dimension grid search, then projected
/// Newton polish. Ties are broken toward the smallest ||v_bar|| and marked
/// degenerate.
VelocitySteadyState optimal_velocity_steady_state(const Model& model, const StageCost& cost,
                                                  const Box& v_box, double tol = 1e-10,
                                                  int max_iter = 50);

/// Default action under which each built-in model is equivariant.
std::unique_ptr<SymmetryAction> default_action(const Model& model);

}  // namespace turnpike
