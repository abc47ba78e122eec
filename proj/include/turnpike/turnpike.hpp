#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "turnpike/core.hpp"

namespace turnpike {

/// Steady-state reference the deviations are measured against; callers
/// must pass a genuine velocity steady state of the scenario's model.
struct TurnpikeReference {
  Eigen::VectorXd v_bar;
  Eigen::VectorXd u_bar;
};

/// Nodal samples of d(t) = ||(v(t) - v_bar, u(t) - u_bar)||_2.
struct DeviationProfile {
  Eigen::VectorXd times;
  Eigen::VectorXd d;

  double horizon() const { return times(times.size() - 1); }
  double max_deviation() const { return d.maxCoeff(); }
};

DeviationProfile deviation_profile(const Trajectory& traj, const TurnpikeReference& ref);

/// Lebesgue measure of { t : d(t) > eps } on the piecewise-linear profile
/// with exact segment crossings.
double theta_measure(const DeviationProfile& profile, double eps);
double theta_measure(const Trajectory& traj, const TurnpikeReference& ref, double eps);

/// First entry into and last exit from the band d <= delta: tau0 is the
/// first time the profile reaches the band, tauT is the horizon minus the
/// last time inside it. defined == false when the band is never reached.
struct EntryExit {
  bool defined = false;
  double tau0 = 0.0;
  double tauT = 0.0;
};

EntryExit entry_exit_times(const DeviationProfile& profile, double delta);

/// Per-horizon turnpike diagnostics within one sweep.
struct HorizonDiagnostics {
  double T = 0.0;
  double delta = 0.0;           // band threshold used for the window
  EntryExit window;
  double max_deviation = 0.0;   // over [0, T]
  double window_deviation = 0.0;  // m(T) over [tau0, T - tauT]
  double scaled = 0.0;            // T * m(T)
  Eigen::VectorXd theta;          // theta_measure per report epsilon
};

struct HyperbolicFit {
  double C_estimate = 0.0;  // max over horizons of T * m(T)
  /// True when T * m(T) grows strictly across the top half of the sweep,
  /// which argues against 1/T decay.
  bool growth_flag = false;
  std::vector<HorizonDiagnostics> table;  // sorted by T
};

/// Windowed hyperbolic-constant estimate over a sweep of solutions sharing
/// the reference. delta bounds the entry/exit band; pass +infinity to use
/// whole-interval windows. Throws DivergenceError when no horizon admits
/// a window.
HyperbolicFit hyperbolic_constant(const std::vector<std::pair<double, Trajectory>>& sweep,
                                  const TurnpikeReference& ref, double delta);

struct NuEnvelope {
  Eigen::VectorXd eps;
  Eigen::VectorXd nu_hat;   // per-eps max of theta_measure over the sweep
  double C_whole = 0.0;     // whole-interval T * max d, maximized over T
  bool implication_ok = false;  // nu_hat(eps) <= C_whole / eps everywhere
};

NuEnvelope nu_envelope(const std::vector<std::pair<double, Trajectory>>& sweep,
                       const TurnpikeReference& ref, const Eigen::VectorXd& eps_grid);

/// 16 logarithmic points spanning [1e-3, max_deviation].
Eigen::VectorXd default_eps_grid(double max_deviation);

/// Full sweep report: two-pass window thresholds (delta = 2 C_raw / T with
/// a 0.05 max-d fallback), per-horizon diagnostics with theta tables, the
/// windowed C estimate, and the measure envelope.
struct TurnpikeReport {
  TurnpikeReference ref;
  Eigen::VectorXd eps_grid;
  std::vector<HorizonDiagnostics> horizons;  // sorted by T
  double C_estimate = 0.0;
  bool growth_flag = false;
  NuEnvelope envelope;
};

TurnpikeReport analyze_sweep(const std::vector<std::pair<double, Trajectory>>& sweep,
                             const TurnpikeReference& ref);

}  // namespace turnpike
