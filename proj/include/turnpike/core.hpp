#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "turnpike/errors.hpp"

namespace turnpike {

/// Full state of a second-order mechanical system: configuration q and
/// velocity q̇ = v, always of equal dimension.
struct State {
  Eigen::VectorXd q;
  Eigen::VectorXd v;

  State() = default;
  State(Eigen::VectorXd q_, Eigen::VectorXd v_) : q(std::move(q_)), v(std::move(v_)) {}

  Eigen::Index dim() const { return q.size(); }
  void validate() const;
};

/// Sampled state/control (optionally costate) history on a strictly
/// increasing time grid starting at t = 0.
struct Trajectory {
  Eigen::VectorXd times;
  std::vector<State> states;
  std::vector<Eigen::VectorXd> controls;
  std::optional<std::vector<Eigen::VectorXd>> costates;

  Eigen::Index node_count() const { return times.size(); }
  double horizon() const { return times.size() > 0 ? times(times.size() - 1) : 0.0; }
  void validate() const;
};

/// Quadratic stage cost  scale * ( Σ w_v,i (v_i - v_ref,i)^2 + Σ w_u,j u_j^2 ).
/// An empty v_ref means zero reference velocity.
struct StageCost {
  Eigen::VectorXd w_v;
  Eigen::VectorXd w_u;
  double scale = 0.5;
  Eigen::VectorXd v_ref;

  double at(const Eigen::VectorXd& v, const Eigen::VectorXd& u) const;
  /// Gradient pieces d ell/dv and d ell/du.
  void gradient(const Eigen::VectorXd& v, const Eigen::VectorXd& u, Eigen::VectorXd& dv,
                Eigen::VectorXd& du) const;
  void validate() const;
};

/// Axis-aligned box constraint; empty vectors mean "unbounded".
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  bool empty() const { return lo.size() == 0 && hi.size() == 0; }
  bool contains(const Eigen::VectorXd& x, double tol = 0.0) const;
};

/// A complete fixed-horizon optimal control instance: model id, stage cost,
/// boundary states, horizon, and optional state/control boxes.
struct Scenario {
  std::string model;
  StageCost cost;
  State x0;
  State xT;
  double horizon = 0.0;
  Box control_bounds;
  Box state_bounds;

  void validate() const;
};

/// Piecewise-linear interpolation of states and controls at time t.
/// Exact (bit-identical) at grid nodes. Throws RangeError outside [0, T].
std::pair<State, Eigen::VectorXd> eval_trajectory(const Trajectory& traj, double t);

/// Trapezoidal quadrature of the stage cost over the trajectory's grid.
double trajectory_cost(const Trajectory& traj, const StageCost& cost);

/// Node-major matrix views of a trajectory (column k is node k).
Eigen::MatrixXd velocity_matrix(const Trajectory& traj);
Eigen::MatrixXd control_matrix(const Trajectory& traj);

}  // namespace turnpike
