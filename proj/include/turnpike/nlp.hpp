#pragma once

#include <Eigen/Core>
#include <vector>

#include "turnpike/transcription.hpp"

namespace turnpike {

struct SolverOptions {
  double tol_kkt = 1e-8;       // stationarity and feasibility target
  int max_outer = 30;          // augmented-Lagrangian iterations
  int max_inner = 500;         // quasi-Newton iterations per outer
  double penalty_init = 10.0;  // rho_0
  double penalty_growth = 10.0;
  unsigned seed = 0;  // reserved for randomized restarts; unused by the
                      // deterministic default algorithms

  void validate() const;
};

struct SolveReport {
  Eigen::VectorXd z_star;
  Eigen::VectorXd multipliers;
  /// Stationarity at (z_star, multipliers); for bound-constrained problems
  /// this is the projected-gradient step norm, which vanishes at a KKT
  /// point even when components sit on their bounds.
  double kkt_residual = 0.0;
  double feasibility = 0.0;
  int outer_iterations = 0;
  int inner_iterations = 0;
  bool converged = false;
  /// Feasibility and penalty after each outer iteration (augmented
  /// Lagrangian path only); exposes the decrease-or-grow dichotomy.
  std::vector<double> outer_feasibility;
  std::vector<double> outer_penalty;
};

/// Minimizes the transcribed problem. Linear-quadratic unbounded problems
/// go through one sparse KKT solve; everything else runs an augmented
/// Lagrangian with an L-BFGS inner loop, projecting onto variable bounds.
/// Non-convergence is reported, never thrown; NaN from a callback at the
/// starting point throws CallbackError.
SolveReport solve(const NlpProblem& problem, const Eigen::VectorXd& z0,
                  const SolverOptions& opts);

/// max(||grad f + J^T mu||_inf, ||c||_inf) at (z, mu).
double kkt_residual(const NlpProblem& problem, const Eigen::VectorXd& z,
                    const Eigen::VectorXd& mu);

/// Central-difference verification of the objective gradient and the
/// constraint Jacobian; returns the largest relative error.
double gradient_check(const NlpProblem& problem, const Eigen::VectorXd& z, double step);

/// Solved trajectory with the two boundary-node controls replaced by their
/// costate-consistent values. A collocated optimum's primal u_0 and u_N
/// track the adjoint half a step inside the horizon (an O(h) artifact of
/// the endpoint quadrature weight), while the boundary equality
/// multipliers carry the actual initial and final adjoints to O(h^2); the
/// stationarity of the Hamiltonian in u at the pinned boundary states then
/// gives second-order endpoint controls. Applied only to box-free
/// scenarios; otherwise the primal controls are returned unchanged.
Trajectory solution_trajectory(const SolveReport& report, std::shared_ptr<const Model> model,
                               const Scenario& scenario, const TranscriptionConfig& cfg);

}  // namespace turnpike
