#include "turnpike/models.hpp"

#include <cmath>

namespace turnpike {

namespace {

void check_dims(const Model& m, const Eigen::VectorXd& q, const Eigen::VectorXd& v,
                const Eigen::VectorXd& u) {
  if (q.size() != m.config_dim() || v.size() != m.config_dim() || u.size() != m.control_dim())
    throw ContractError("model: argument dimension mismatch");
}

}  // namespace

Eigen::VectorXd Model::dynamics(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
  const Eigen::Index nq = config_dim();
  if (x.size() != 2 * nq) throw ContractError("model: state dimension != 2 dim(q)");
  Eigen::VectorXd dx(2 * nq);
  dx.head(nq) = x.tail(nq);
  dx.tail(nq) = accel(x.head(nq), x.tail(nq), u);
  return dx;
}

const std::string& DoubleIntegrator::name() const {
  static const std::string id = "double_integrator";
  return id;
}

Eigen::VectorXd DoubleIntegrator::accel(const Eigen::VectorXd& q, const Eigen::VectorXd& v,
                                        const Eigen::VectorXd& u) const {
  check_dims(*this, q, v, u);
  return u;
}

void DoubleIntegrator::accel_jacobians(const Eigen::VectorXd& q, const Eigen::VectorXd& v,
                                       const Eigen::VectorXd& u, Eigen::MatrixXd& dq,
                                       Eigen::MatrixXd& dv, Eigen::MatrixXd& du) const {
  check_dims(*this, q, v, u);
  dq = Eigen::MatrixXd::Zero(1, 1);
  dv = Eigen::MatrixXd::Zero(1, 1);
  du = Eigen::MatrixXd::Identity(1, 1);
}

Hovercraft::Hovercraft(double lever_arm) : Model(false), r_(lever_arm) {
  if (!(lever_arm > 0.0) || !std::isfinite(lever_arm))
    throw ContractError("hovercraft: lever arm must be positive");
}

const std::string& Hovercraft::name() const {
  static const std::string id = "hovercraft";
  return id;
}

Eigen::VectorXd Hovercraft::accel(const Eigen::VectorXd& q, const Eigen::VectorXd& v,
                                  const Eigen::VectorXd& u) const {
  check_dims(*this, q, v, u);
  const double c = std::cos(q(2));
  const double s = std::sin(q(2));
  Eigen::VectorXd a(3);
  a(0) = c * u(0) - s * u(1);
  a(1) = s * u(0) + c * u(1);
  a(2) = -r_ * u(1);
  return a;
}

void Hovercraft::accel_jacobians(const Eigen::VectorXd& q, const Eigen::VectorXd& v,
                                 const Eigen::VectorXd& u, Eigen::MatrixXd& dq,
                                 Eigen::MatrixXd& dv, Eigen::MatrixXd& du) const {
  check_dims(*this, q, v, u);
  const double c = std::cos(q(2));
  const double s = std::sin(q(2));
  dq = Eigen::MatrixXd::Zero(3, 3);
  dq(0, 2) = -s * u(0) - c * u(1);
  dq(1, 2) = c * u(0) - s * u(1);
  dv = Eigen::MatrixXd::Zero(3, 3);
  du.resize(3, 2);
  du << c, -s, s, c, 0.0, -r_;
}

std::unique_ptr<Model> make_model(const std::string& id, double lever_arm) {
  if (id == "double_integrator") return std::make_unique<DoubleIntegrator>();
  if (id == "hovercraft") return std::make_unique<Hovercraft>(lever_arm);
  throw ContractError("unknown model id: " + id);
}

Eigen::VectorXd rk4_step(const Model& model, const Eigen::VectorXd& x, const ControlSignal& u,
                         double t, double h) {
  const Eigen::VectorXd u0 = u(t);
  const Eigen::VectorXd um = u(t + 0.5 * h);
  const Eigen::VectorXd u1 = u(t + h);
  const Eigen::VectorXd k1 = model.dynamics(x, u0);
  const Eigen::VectorXd k2 = model.dynamics(x + 0.5 * h * k1, um);
  const Eigen::VectorXd k3 = model.dynamics(x + 0.5 * h * k2, um);
  const Eigen::VectorXd k4 = model.dynamics(x + h * k3, u1);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Trajectory simulate(const Model& model, const State& x0, const ControlSignal& u, double T,
                    int nodes) {
  x0.validate();
  if (x0.dim() != model.config_dim()) throw ContractError("simulate: state dimension mismatch");
  if (!(T > 0.0) || !std::isfinite(T)) throw ContractError("simulate: horizon must be positive");
  if (nodes < 2) throw ContractError("simulate: need at least two nodes");

  const Eigen::Index nq = model.config_dim();
  const int steps = nodes - 1;
  const double h = T / steps;

  Trajectory traj;
  traj.times = Eigen::VectorXd::LinSpaced(steps + 1, 0.0, T);
  traj.times(steps) = T;
  traj.states.reserve(steps + 1);
  traj.controls.reserve(steps + 1);

  Eigen::VectorXd x(2 * nq);
  x << x0.q, x0.v;
  traj.states.push_back(x0);
  traj.controls.push_back(u(0.0));

  for (int k = 0; k < steps; ++k) {
    x = rk4_step(model, x, u, traj.times(k), h);
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > 1e12)
      throw DivergenceError("simulate: state diverged at t = " + std::to_string(traj.times(k) + h));
    traj.states.emplace_back(x.head(nq), x.tail(nq));
    traj.controls.push_back(u(traj.times(k + 1)));
  }
  return traj;
}

}  // namespace turnpike
