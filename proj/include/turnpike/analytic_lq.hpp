#pragma once

#include <Eigen/Core>
#include <vector>

#include "turnpike/core.hpp"

namespace turnpike {

/// Coefficient matrix of the coupled state-adjoint ODE for the point mass
/// on a line with effort+speed cost, ordered (q, v, lambda1, lambda2).
Eigen::Matrix4d hamiltonian_matrix();

/// Closed-form matrix exponential of hamiltonian_matrix() * t.
/// Throws OverflowError for |t| > 700 (hyperbolics overflow a double).
Eigen::Matrix4d transition_matrix(double t);

/// Initial adjoint values pinning the two-point boundary value problem,
/// together with the data that determined them.
struct CostateInit {
  double lambda1_0 = 0.0;
  double lambda2_0 = 0.0;
  double T = 0.0;
  double q_tilde = 0.0;  // qT - q0
  double v0 = 0.0;
  double vT = 0.0;
};

/// Adjoint initialization for boundary data (q0, v0) -> (qT, vT) over T.
/// Throws ContractError for T <= 0, OverflowError for T > 700.
CostateInit solve_costates(double q0, double v0, double qT, double vT, double T);

struct AnalyticPoint {
  double q = 0.0;
  double v = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double u = 0.0;  // = -lambda2
};

/// Optimal state, adjoints, and control at time t in [0, T]. Evaluated in
/// a boundary-anchored form (rescaled by e^{-T} for T > 30) that stays
/// accurate where direct transition-matrix propagation loses digits.
AnalyticPoint eval_optimal(const CostateInit& init, double q0, double v0, double t);

/// Uniform sampling of the closed-form solution into a Trajectory with
/// costates attached.
Trajectory sample_optimal(const CostateInit& init, double q0, int nodes);

/// Scale-free peak ratios for rest-to-rest transfers (v0 = vT = 0):
/// velocity: T * max_t |v*(t)| / |q_tilde| (the peak sits at t = T/2);
/// control:  T * max_t |u*(t)| / |q_tilde| (the peak sits at t in {0, T}).
/// Both are evaluated by cancellation-free series below T = 0.05.
double rest_velocity_ratio(double T);
double rest_control_ratio(double T);

struct HorizonCertificate {
  double T = 0.0;
  double max_v = 0.0;
  double max_u = 0.0;
  double velocity_ratio = 0.0;  // T * max_v / |q_tilde|
  double control_ratio = 0.0;   // T * max_u / |q_tilde|
  bool peak_at_midpoint = false;
  bool control_peak_at_ends = false;
  bool velocity_bound_ok = false;  // velocity_ratio <= 3/2
};

struct HyperbolicCertificate {
  double q_tilde = 0.0;
  std::vector<HorizonCertificate> entries;  // in T_grid order
  double velocity_constant = 0.0;           // tightest: max velocity_ratio
  double control_constant = 0.0;            // tightest: max control_ratio
  bool velocity_bound_ok = false;           // all entries pass
};

/// Rest-to-rest sweep over T_grid: per-horizon peak deviations of (v*, u*)
/// from the zero steady state, peak locations verified by sampling, and
/// the 3/2 velocity bound checked with the tightest constants reported.
HyperbolicCertificate hyperbolic_certificate(double q_tilde, const std::vector<double>& T_grid);

}  // namespace turnpike
