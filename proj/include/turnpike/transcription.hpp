#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <functional>
#include <memory>

#include "turnpike/core.hpp"
#include "turnpike/models.hpp"

namespace turnpike {

enum class Scheme { Trapezoidal, HermiteSimpson };

struct TranscriptionConfig {
  int N = 100;  // interval count, >= 2
  Scheme scheme = Scheme::Trapezoidal;
};

/// Index map for the decision vector z = (x_0 .. x_N, u_0 .. u_N) with
/// x_k = (q_k, v_k). States come first, then controls, both node-major.
struct NlpLayout {
  Eigen::Index nq = 0;
  Eigen::Index nu = 0;
  Eigen::Index N = 0;

  Eigen::Index nx() const { return 2 * nq; }
  Eigen::Index dim_z() const { return (N + 1) * (nx() + nu); }
  Eigen::Index state_offset(Eigen::Index k) const { return k * nx(); }
  Eigen::Index velocity_offset(Eigen::Index k) const { return k * nx() + nq; }
  Eigen::Index control_offset(Eigen::Index k) const { return (N + 1) * nx() + k * nu; }
  /// Defect rows come first (interval-major), then the two boundary blocks.
  Eigen::Index constraint_count() const { return (N + 2) * nx(); }
};

/// Finite-dimensional equality-constrained program produced by collocation.
/// All callbacks are pure in z and safe to call concurrently.
struct NlpProblem {
  Eigen::Index dim_z = 0;
  Eigen::Index constraint_count = 0;
  NlpLayout layout;
  /// Quadratic objective and linear constraints; enables the direct KKT
  /// solve. True exactly when the model is linear.
  bool linear_quadratic = false;
  /// Constant diagonal of the objective Hessian (zero on q entries).
  Eigen::VectorXd objective_hessian_diag;
  /// Per-variable box derived from the scenario's state/control boxes;
  /// empty when the scenario is unconstrained.
  Box variable_bounds;

  std::function<double(const Eigen::VectorXd&)> objective;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> objective_gradient;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> constraints;
  std::function<Eigen::SparseMatrix<double>(const Eigen::VectorXd&)> constraint_jacobian;
};

/// Builds the collocation NLP: trapezoidal (default) or Hermite-Simpson
/// defects plus boundary equalities, with a trapezoidal-quadrature
/// objective in both schemes.
NlpProblem transcribe(std::shared_ptr<const Model> model, const Scenario& scenario,
                      const TranscriptionConfig& cfg);
NlpProblem transcribe(const Scenario& scenario, const TranscriptionConfig& cfg);

/// States interpolated linearly from x0 to xT, controls zero.
Eigen::VectorXd initial_guess(const Scenario& scenario, const TranscriptionConfig& cfg);

/// Unpacks a decision vector onto the uniform grid; exact inverse of
/// pack_trajectory.
Trajectory extract_trajectory(const Eigen::VectorXd& z, const Scenario& scenario,
                              const TranscriptionConfig& cfg);

/// Packs node states/controls into a decision vector (costates ignored).
Eigen::VectorXd pack_trajectory(const Trajectory& traj, const NlpLayout& layout);

}  // namespace turnpike
