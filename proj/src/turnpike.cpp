#include "turnpike/turnpike.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "turnpike/kernels.hpp"
#include "turnpike/parallel.hpp"

namespace turnpike {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double lerp_time(const DeviationProfile& p, Eigen::Index k, double target) {
  // Crossing time of the linear segment k at level target.
  const double h = p.times(k + 1) - p.times(k);
  return p.times(k) + h * (target - p.d(k)) / (p.d(k + 1) - p.d(k));
}

// Piecewise-linear evaluation of the profile at time t.
double eval_profile(const DeviationProfile& p, double t) {
  const Eigen::Index n = p.times.size();
  const double* begin = p.times.data();
  const double* it = std::upper_bound(begin, begin + n, t);
  Eigen::Index k = static_cast<Eigen::Index>(it - begin) - 1;
  if (k < 0) k = 0;
  if (k >= n - 1) k = n - 2;
  if (t == p.times(k)) return p.d(k);
  const double a = (t - p.times(k)) / (p.times(k + 1) - p.times(k));
  return (1.0 - a) * p.d(k) + a * p.d(k + 1);
}

// Max of the profile over [a, b] (PWL: interior nodes plus the endpoints).
double window_max(const DeviationProfile& p, double a, double b) {
  double m = std::max(eval_profile(p, a), eval_profile(p, b));
  for (Eigen::Index k = 0; k < p.times.size(); ++k)
    if (p.times(k) > a && p.times(k) < b) m = std::max(m, p.d(k));
  return m;
}

HorizonDiagnostics diagnose(const DeviationProfile& profile, double T, double delta) {
  HorizonDiagnostics h;
  h.T = T;
  h.delta = delta;
  h.max_deviation = profile.max_deviation();
  h.window = std::isinf(delta) ? EntryExit{true, 0.0, 0.0}
                               : entry_exit_times(profile, delta);
  if (h.window.defined) {
    h.window_deviation = window_max(profile, h.window.tau0, T - h.window.tauT);
    h.scaled = T * h.window_deviation;
  }
  return h;
}

}  // namespace

DeviationProfile deviation_profile(const Trajectory& traj, const TurnpikeReference& ref) {
  traj.validate();
  if (ref.v_bar.size() != traj.states.front().dim() ||
      ref.u_bar.size() != traj.controls.front().size())
    throw ContractError("deviation profile: reference dimension mismatch");
  DeviationProfile p;
  p.times = traj.times;
  p.d = kernels::deviation_norms(velocity_matrix(traj), control_matrix(traj), ref.v_bar,
                                 ref.u_bar);
  return p;
}

double theta_measure(const DeviationProfile& profile, double eps) {
  return kernels::exceedance_measure(profile.times, profile.d, eps);
}

double theta_measure(const Trajectory& traj, const TurnpikeReference& ref, double eps) {
  return theta_measure(deviation_profile(traj, ref), eps);
}

EntryExit entry_exit_times(const DeviationProfile& profile, double delta) {
  if (!(delta > 0.0)) throw ContractError("entry/exit: delta must be positive");
  const Eigen::Index n = profile.times.size();
  if (n < 2) throw ContractError("entry/exit: empty profile");

  EntryExit out;
  const double T = profile.horizon();

  // First time the profile is <= delta.
  double entry = kInf;
  if (profile.d(0) <= delta) {
    entry = 0.0;
  } else {
    for (Eigen::Index k = 0; k + 1 < n; ++k)
      if (profile.d(k) > delta && profile.d(k + 1) <= delta) {
        entry = lerp_time(profile, k, delta);
        break;
      }
  }
  if (std::isinf(entry)) return out;  // never reaches the band

  // Last time the profile is <= delta.
  double exit = -kInf;
  if (profile.d(n - 1) <= delta) {
    exit = T;
  } else {
    for (Eigen::Index k = n - 2; k >= 0; --k)
      if (profile.d(k) <= delta && profile.d(k + 1) > delta) {
        exit = lerp_time(profile, k, delta);
        break;
      }
  }

  out.defined = true;
  out.tau0 = entry;
  out.tauT = T - exit;
  return out;
}

HyperbolicFit hyperbolic_constant(const std::vector<std::pair<double, Trajectory>>& sweep,
                                  const TurnpikeReference& ref, double delta) {
  if (sweep.empty()) throw ContractError("hyperbolic constant: empty sweep");
  if (!(delta > 0.0)) throw ContractError("hyperbolic constant: delta must be positive");

  HyperbolicFit fit;
  fit.table.resize(sweep.size());
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    const DeviationProfile profile = deviation_profile(sweep[i].second, ref);
    fit.table[i] = diagnose(profile, sweep[i].first, delta);
  }
  std::sort(fit.table.begin(), fit.table.end(),
            [](const HorizonDiagnostics& a, const HorizonDiagnostics& b) { return a.T < b.T; });

  bool any_window = false;
  for (const HorizonDiagnostics& h : fit.table)
    if (h.window.defined) {
      any_window = true;
      fit.C_estimate = std::max(fit.C_estimate, h.scaled);
    }
  if (!any_window)
    throw DivergenceError("hyperbolic constant: no horizon admits an entry/exit window");

  // Strict growth of T * m(T) across the top half of the sweep argues
  // against 1/T decay.
  const std::size_t half = fit.table.size() / 2;
  fit.growth_flag = fit.table.size() - half >= 2;
  for (std::size_t i = half; i + 1 < fit.table.size(); ++i)
    if (!(fit.table[i].window.defined && fit.table[i + 1].window.defined &&
          fit.table[i + 1].scaled > fit.table[i].scaled))
      fit.growth_flag = false;
  return fit;
}

NuEnvelope nu_envelope(const std::vector<std::pair<double, Trajectory>>& sweep,
                       const TurnpikeReference& ref, const Eigen::VectorXd& eps_grid) {
  if (sweep.empty()) throw ContractError("nu envelope: empty sweep");
  if (eps_grid.size() == 0 || (eps_grid.array() <= 0.0).any())
    throw ContractError("nu envelope: eps grid must be positive");

  NuEnvelope env;
  env.eps = eps_grid;
  env.nu_hat = Eigen::VectorXd::Zero(eps_grid.size());

  std::vector<DeviationProfile> profiles;
  profiles.reserve(sweep.size());
  for (const auto& [T, traj] : sweep) {
    profiles.push_back(deviation_profile(traj, ref));
    env.C_whole = std::max(env.C_whole, T * profiles.back().max_deviation());
  }
  for (Eigen::Index j = 0; j < eps_grid.size(); ++j)
    for (const DeviationProfile& p : profiles)
      env.nu_hat(j) = std::max(env.nu_hat(j), theta_measure(p, eps_grid(j)));

  env.implication_ok = true;
  for (Eigen::Index j = 0; j < eps_grid.size(); ++j)
    if (env.nu_hat(j) > env.C_whole / eps_grid(j) * (1.0 + 1e-12)) env.implication_ok = false;
  return env;
}

Eigen::VectorXd default_eps_grid(double max_deviation) {
  const double lo = 1e-3;
  const double hi = std::max(max_deviation, 2e-3);
  Eigen::VectorXd eps(16);
  for (int i = 0; i < 16; ++i)
    eps(i) = lo * std::pow(hi / lo, static_cast<double>(i) / 15.0);
  return eps;
}

TurnpikeReport analyze_sweep(const std::vector<std::pair<double, Trajectory>>& sweep,
                             const TurnpikeReference& ref) {
  if (sweep.empty()) throw ContractError("analyze_sweep: empty sweep");

  std::vector<std::pair<double, DeviationProfile>> profiles;
  profiles.reserve(sweep.size());
  double max_dev = 0.0;
  double C_raw = 0.0;
  for (const auto& [T, traj] : sweep) {
    profiles.emplace_back(T, deviation_profile(traj, ref));
    max_dev = std::max(max_dev, profiles.back().second.max_deviation());
    C_raw = std::max(C_raw, T * profiles.back().second.max_deviation());
  }
  std::sort(profiles.begin(), profiles.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  TurnpikeReport report;
  report.ref = ref;
  report.eps_grid = default_eps_grid(max_dev);
  report.horizons.resize(profiles.size());

  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const double T = profiles[i].first;
    const DeviationProfile& p = profiles[i].second;
    // Scale-aware band from the whole-interval constant, with a fallback
    // proportional to the profile's own peak.
    double delta = C_raw > 0.0 ? 2.0 * C_raw / T : kInf;
    HorizonDiagnostics h = diagnose(p, T, delta);
    if (!h.window.defined && p.max_deviation() > 0.0) {
      delta = 0.05 * p.max_deviation();
      h = diagnose(p, T, delta);
    }
    h.theta.resize(report.eps_grid.size());
    for (Eigen::Index j = 0; j < report.eps_grid.size(); ++j)
      h.theta(j) = theta_measure(p, report.eps_grid(j));
    report.horizons[i] = std::move(h);
    if (report.horizons[i].window.defined)
      report.C_estimate = std::max(report.C_estimate, report.horizons[i].scaled);
  }

  const std::size_t half = report.horizons.size() / 2;
  report.growth_flag = report.horizons.size() - half >= 2;
  for (std::size_t i = half; i + 1 < report.horizons.size(); ++i)
    if (!(report.horizons[i].window.defined && report.horizons[i + 1].window.defined &&
          report.horizons[i + 1].scaled > report.horizons[i].scaled))
      report.growth_flag = false;

  report.envelope = nu_envelope(sweep, ref, report.eps_grid);
  return report;
}

}  // namespace turnpike
