#include "turnpike/core.hpp"

#include <algorithm>
#include <cmath>

#include "turnpike/kernels.hpp"

namespace turnpike {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw ContractError(msg);
}

bool all_finite(const Eigen::VectorXd& x) { return x.allFinite(); }

}  // namespace

void State::validate() const {
  require(q.size() > 0, "state: empty configuration");
  require(q.size() == v.size(), "state: dim(q) != dim(v)");
  require(all_finite(q) && all_finite(v), "state: non-finite entry");
}

void Trajectory::validate() const {
  const Eigen::Index n = times.size();
  require(n >= 2, "trajectory: need at least two nodes");
  require(times(0) == 0.0, "trajectory: grid must start at t = 0");
  for (Eigen::Index k = 0; k + 1 < n; ++k)
    require(times(k) < times(k + 1), "trajectory: grid not strictly increasing");
  require(static_cast<Eigen::Index>(states.size()) == n, "trajectory: state count != node count");
  require(static_cast<Eigen::Index>(controls.size()) == n,
          "trajectory: control count != node count");
  const Eigen::Index nq = states.front().dim();
  const Eigen::Index nu = controls.front().size();
  require(nu > 0, "trajectory: empty control");
  for (const State& s : states) {
    s.validate();
    require(s.dim() == nq, "trajectory: inconsistent state dimension");
  }
  for (const Eigen::VectorXd& u : controls) {
    require(u.size() == nu, "trajectory: inconsistent control dimension");
    require(all_finite(u), "trajectory: non-finite control");
  }
  if (costates) {
    require(static_cast<Eigen::Index>(costates->size()) == n,
            "trajectory: costate count != node count");
    for (const Eigen::VectorXd& lam : *costates)
      require(lam.size() == 2 * nq, "trajectory: costate dimension != 2 dim(q)");
  }
}

double StageCost::at(const Eigen::VectorXd& v, const Eigen::VectorXd& u) const {
  double s = 0.0;
  for (Eigen::Index i = 0; i < w_v.size(); ++i) {
    const double ref = v_ref.size() > 0 ? v_ref(i) : 0.0;
    const double d = v(i) - ref;
    s += w_v(i) * d * d;
  }
  for (Eigen::Index j = 0; j < w_u.size(); ++j) s += w_u(j) * u(j) * u(j);
  return scale * s;
}

void StageCost::gradient(const Eigen::VectorXd& v, const Eigen::VectorXd& u, Eigen::VectorXd& dv,
                         Eigen::VectorXd& du) const {
  dv.resize(w_v.size());
  du.resize(w_u.size());
  for (Eigen::Index i = 0; i < w_v.size(); ++i) {
    const double ref = v_ref.size() > 0 ? v_ref(i) : 0.0;
    dv(i) = 2.0 * scale * w_v(i) * (v(i) - ref);
  }
  for (Eigen::Index j = 0; j < w_u.size(); ++j) du(j) = 2.0 * scale * w_u(j) * u(j);
}

void StageCost::validate() const {
  require(w_v.size() > 0, "stage cost: empty velocity weights");
  require(w_u.size() > 0, "stage cost: empty control weights");
  require((w_v.array() >= 0.0).all(), "stage cost: negative velocity weight");
  require((w_u.array() > 0.0).all(), "stage cost: control weights must be positive");
  require(scale > 0.0 && std::isfinite(scale), "stage cost: scale must be positive");
  require(v_ref.size() == 0 || v_ref.size() == w_v.size(),
          "stage cost: v_ref dimension != velocity weight dimension");
}

bool Box::contains(const Eigen::VectorXd& x, double tol) const {
  if (lo.size() > 0) {
    if (lo.size() != x.size()) throw ContractError("box: lower bound dimension mismatch");
    if (((x - lo).array() < -tol).any()) return false;
  }
  if (hi.size() > 0) {
    if (hi.size() != x.size()) throw ContractError("box: upper bound dimension mismatch");
    if (((hi - x).array() < -tol).any()) return false;
  }
  return true;
}

void Scenario::validate() const {
  require(!model.empty(), "scenario: missing model id");
  cost.validate();
  x0.validate();
  xT.validate();
  require(x0.dim() == xT.dim(), "scenario: boundary state dimensions differ");
  require(horizon > 0.0 && std::isfinite(horizon), "scenario: horizon must be positive");
}

std::pair<State, Eigen::VectorXd> eval_trajectory(const Trajectory& traj, double t) {
  const Eigen::Index n = traj.times.size();
  if (n < 2) throw ContractError("eval_trajectory: trajectory has fewer than two nodes");
  const double T = traj.times(n - 1);
  if (!(t >= 0.0 && t <= T)) throw RangeError("eval_trajectory: query time outside [0, T]");

  const double* begin = traj.times.data();
  const double* it = std::upper_bound(begin, begin + n, t);
  Eigen::Index k = static_cast<Eigen::Index>(it - begin) - 1;
  if (k >= n - 1) k = n - 2;

  if (t == traj.times(k)) return {traj.states[k], traj.controls[k]};
  if (t == traj.times(k + 1)) return {traj.states[k + 1], traj.controls[k + 1]};

  const double h = traj.times(k + 1) - traj.times(k);
  const double a = (t - traj.times(k)) / h;
  State s;
  s.q = (1.0 - a) * traj.states[k].q + a * traj.states[k + 1].q;
  s.v = (1.0 - a) * traj.states[k].v + a * traj.states[k + 1].v;
  Eigen::VectorXd u = (1.0 - a) * traj.controls[k] + a * traj.controls[k + 1];
  return {s, std::move(u)};
}

Eigen::MatrixXd velocity_matrix(const Trajectory& traj) {
  const Eigen::Index n = traj.times.size();
  const Eigen::Index nq = traj.states.front().dim();
  Eigen::MatrixXd V(nq, n);
  for (Eigen::Index k = 0; k < n; ++k) V.col(k) = traj.states[k].v;
  return V;
}

Eigen::MatrixXd control_matrix(const Trajectory& traj) {
  const Eigen::Index n = traj.times.size();
  const Eigen::Index nu = traj.controls.front().size();
  Eigen::MatrixXd U(nu, n);
  for (Eigen::Index k = 0; k < n; ++k) U.col(k) = traj.controls[k];
  return U;
}

double trajectory_cost(const Trajectory& traj, const StageCost& cost) {
  traj.validate();
  cost.validate();
  if (cost.w_v.size() != traj.states.front().dim() ||
      cost.w_u.size() != traj.controls.front().size())
    throw ContractError("trajectory_cost: weight dimensions do not match the trajectory");
  const Eigen::VectorXd node = kernels::node_costs(cost, velocity_matrix(traj),
                                                   control_matrix(traj));
  return kernels::trapezoid_integral(traj.times, node);
}

}  // namespace turnpike
