#include "turnpike/symmetry.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

namespace turnpike {

namespace {

Eigen::Matrix2d rot(double a) {
  Eigen::Matrix2d R;
  const double c = std::cos(a);
  const double s = std::sin(a);
  R << c, -s, s, c;
  return R;
}

void check_group(const SymmetryAction& action, const Eigen::VectorXd& g) {
  if (g.size() != action.group_dim())
    throw ContractError("symmetry: group element dimension mismatch");
}

}  // namespace

TranslationAction::TranslationAction(Eigen::Index config_dim, Eigen::Index group_dim)
    : nq_(config_dim), m_(group_dim) {
  if (config_dim < 1 || group_dim < 1 || group_dim > config_dim)
    throw ContractError("translation action: need 1 <= dim(group) <= dim(config)");
}

const std::string& TranslationAction::name() const {
  static const std::string id = "translation";
  return id;
}

Eigen::VectorXd TranslationAction::identity() const { return Eigen::VectorXd::Zero(m_); }

Eigen::VectorXd TranslationAction::compose(const Eigen::VectorXd& g,
                                           const Eigen::VectorXd& h) const {
  check_group(*this, g);
  check_group(*this, h);
  return g + h;
}

Eigen::VectorXd TranslationAction::inverse(const Eigen::VectorXd& g) const {
  check_group(*this, g);
  return -g;
}

Eigen::VectorXd TranslationAction::exp(const Eigen::VectorXd& xi, double t) const {
  check_group(*this, xi);
  return t * xi;
}

State TranslationAction::act(const Eigen::VectorXd& g, const State& x) const {
  check_group(*this, g);
  if (x.dim() != nq_) throw ContractError("translation action: state dimension mismatch");
  State y = x;
  y.q.head(m_) += g;
  return y;
}

const std::string& PlanarAction::name() const {
  static const std::string id = "planar";
  return id;
}

Eigen::VectorXd PlanarAction::identity() const { return Eigen::VectorXd::Zero(3); }

Eigen::VectorXd PlanarAction::compose(const Eigen::VectorXd& g, const Eigen::VectorXd& h) const {
  check_group(*this, g);
  check_group(*this, h);
  Eigen::VectorXd out(3);
  out.head<2>() = g.head<2>() + rot(g(2)) * h.head<2>();
  out(2) = g(2) + h(2);
  return out;
}

Eigen::VectorXd PlanarAction::inverse(const Eigen::VectorXd& g) const {
  check_group(*this, g);
  Eigen::VectorXd out(3);
  out.head<2>() = -(rot(-g(2)) * g.head<2>());
  out(2) = -g(2);
  return out;
}

Eigen::VectorXd PlanarAction::exp(const Eigen::VectorXd& xi, double t) const {
  check_group(*this, xi);
  const double alpha = xi(2) * t;
  // A = sin(a)/a and B = (1 - cos(a))/a, series-expanded near a = 0.
  double A, B;
  if (std::abs(alpha) < 1e-4) {
    const double a2 = alpha * alpha;
    A = 1.0 - a2 / 6.0 * (1.0 - a2 / 20.0);
    B = 0.5 * alpha * (1.0 - a2 / 12.0 * (1.0 - a2 / 30.0));
  } else {
    A = std::sin(alpha) / alpha;
    B = (1.0 - std::cos(alpha)) / alpha;
  }
  Eigen::Matrix2d V;
  V << A, -B, B, A;
  Eigen::VectorXd g(3);
  g.head<2>() = V * (t * xi.head<2>());
  g(2) = alpha;
  return g;
}

State PlanarAction::act(const Eigen::VectorXd& g, const State& x) const {
  check_group(*this, g);
  if (x.dim() != 3) throw ContractError("planar action: state dimension mismatch");
  const Eigen::Matrix2d R = rot(g(2));
  State y;
  y.q.resize(3);
  y.v.resize(3);
  y.q.head<2>() = g.head<2>() + R * x.q.head<2>();
  y.q(2) = x.q(2) + g(2);
  y.v.head<2>() = R * x.v.head<2>();
  y.v(2) = x.v(2);
  return y;
}

State act_lifted(const SymmetryAction& action, const Eigen::VectorXd& g, const State& x) {
  return action.act(g, x);
}

State trim_flow(const SymmetryAction& action, const TrimPrimitive& trim, double t) {
  return action.act(action.exp(trim.xi, t), trim.x0);
}

double check_equivariance(const Model& model, const SymmetryAction& action,
                          const Eigen::VectorXd& g, const State& x0, const ControlSignal& u,
                          double T, int nodes) {
  const Trajectory base = simulate(model, x0, u, T, nodes);
  const Trajectory moved = simulate(model, action.act(g, x0), u, T, nodes);
  double worst = 0.0;
  for (Eigen::Index k = 0; k < base.node_count(); ++k) {
    const State mapped = action.act(g, base.states[k]);
    worst = std::max(worst, (mapped.q - moved.states[k].q).cwiseAbs().maxCoeff());
    worst = std::max(worst, (mapped.v - moved.states[k].v).cwiseAbs().maxCoeff());
  }
  return worst;
}

double trim_defect(const Model& model, const SymmetryAction& action, const TrimPrimitive& trim,
                   double T, int nodes) {
  const Eigen::VectorXd u_const = trim.u_bar;
  const Trajectory integrated =
      simulate(model, trim.x0, [&u_const](double) { return u_const; }, T, nodes);
  double worst = 0.0;
  for (Eigen::Index k = 0; k < integrated.node_count(); ++k) {
    const State orbit = trim_flow(action, trim, integrated.times(k));
    worst = std::max(worst, (orbit.q - integrated.states[k].q).cwiseAbs().maxCoeff());
    worst = std::max(worst, (orbit.v - integrated.states[k].v).cwiseAbs().maxCoeff());
  }
  return worst;
}

std::optional<TrimPrimitive> trim_through(const Model& model, const SymmetryAction& action,
                                          const State& x0, double tol) {
  x0.validate();
  if (x0.dim() != model.config_dim() || action.config_dim() != model.config_dim())
    throw ContractError("trim search: dimension mismatch");

  TrimPrimitive trim;
  trim.x0 = x0;
  trim.u_bar = Eigen::VectorXd::Zero(model.control_dim());

  if (action.kind() == SymmetryAction::Kind::Translation) {
    const Eigen::Index m = action.group_dim();
    // Orbit velocity lives in the translated coordinates only.
    if (x0.v.size() > m && x0.v.tail(x0.v.size() - m).cwiseAbs().maxCoeff() > tol)
      return std::nullopt;
    trim.xi = x0.v.head(m);
  } else {
    const double omega = x0.v(2);
    trim.xi.resize(3);
    if (std::abs(omega) <= tol) {
      trim.xi << x0.v(0), x0.v(1), 0.0;
    } else if (x0.v.head<2>().cwiseAbs().maxCoeff() <= tol) {
      // In-place spin: the generator's pole sits at the current position.
      trim.xi << omega * x0.q(1), -omega * x0.q(0), omega;
    } else {
      // Simultaneous spin and drift accelerates, so no zero-acceleration
      // orbit exists through this state.
      return std::nullopt;
    }
  }

  // The orbit holds velocity only if the model coasts here.
  if (model.accel(x0.q, x0.v, trim.u_bar).cwiseAbs().maxCoeff() > std::max(tol, 1e-12))
    return std::nullopt;
  return trim;
}

namespace {

Eigen::VectorXd stack_residual(const Model& model, const std::vector<Eigen::VectorXd>& samples,
                               const Eigen::VectorXd& v, const Eigen::VectorXd& u) {
  const Eigen::Index nq = model.config_dim();
  Eigen::VectorXd r(nq * static_cast<Eigen::Index>(samples.size()));
  for (std::size_t s = 0; s < samples.size(); ++s)
    r.segment(static_cast<Eigen::Index>(s) * nq, nq) = model.accel(samples[s], v, u);
  return r;
}

// Stacked partials of the residual with respect to u only.
Eigen::MatrixXd stack_control_jacobian(const Model& model,
                                       const std::vector<Eigen::VectorXd>& samples,
                                       const Eigen::VectorXd& v, const Eigen::VectorXd& u) {
  const Eigen::Index nq = model.config_dim();
  const Eigen::Index nu = model.control_dim();
  Eigen::MatrixXd J(nq * static_cast<Eigen::Index>(samples.size()), nu);
  Eigen::MatrixXd dq, dv, du;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    model.accel_jacobians(samples[s], v, u, dq, dv, du);
    J.middleRows(static_cast<Eigen::Index>(s) * nq, nq) = du;
  }
  return J;
}

}  // namespace

std::vector<Eigen::VectorXd> default_config_samples(const Model& model) {
  std::vector<Eigen::VectorXd> out;
  if (model.config_dim() == 1) {
    out.push_back(Eigen::VectorXd::Zero(1));
    return out;
  }
  const double thetas[] = {0.0, 1.1, 2.3, -0.7, 3.9};
  for (double th : thetas) {
    Eigen::VectorXd q = Eigen::VectorXd::Zero(model.config_dim());
    q(model.config_dim() - 1) = th;
    q(0) = 0.3 * th;
    out.push_back(std::move(q));
  }
  return out;
}

VelocitySteadyState find_velocity_steady_state(const Model& model, const Eigen::VectorXd& v_bar,
                                               const std::vector<Eigen::VectorXd>& q_samples,
                                               double tol, int max_iter) {
  if (q_samples.empty()) throw ContractError("steady state: no configuration samples");
  if (v_bar.size() != model.config_dim())
    throw ContractError("steady state: velocity dimension mismatch");

  Eigen::VectorXd u = Eigen::VectorXd::Zero(model.control_dim());
  Eigen::VectorXd r = stack_residual(model, q_samples, v_bar, u);
  for (int it = 0; it < max_iter && r.cwiseAbs().maxCoeff() > tol; ++it) {
    const Eigen::MatrixXd J = stack_control_jacobian(model, q_samples, v_bar, u);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd step = svd.solve(-r);
    double alpha = 1.0;
    const double base = r.norm();
    bool accepted = false;
    while (alpha >= 1e-8) {
      Eigen::VectorXd u_try = u + alpha * step;
      Eigen::VectorXd r_try = stack_residual(model, q_samples, v_bar, u_try);
      if (r_try.norm() < base || r_try.cwiseAbs().maxCoeff() <= tol) {
        u = std::move(u_try);
        r = std::move(r_try);
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
  }

  const double res = r.cwiseAbs().maxCoeff();
  if (res > tol)
    throw RootFindError("steady state search stalled, residual " + std::to_string(res));
  return {v_bar, std::move(u), res, false};
}

VelocitySteadyState find_velocity_steady_state(const Model& model, const Eigen::VectorXd& v_bar,
                                               double tol, int max_iter) {
  return find_velocity_steady_state(model, v_bar, default_config_samples(model), tol, max_iter);
}

namespace {

struct SteadyCostEval {
  Eigen::VectorXd u;
  double value;
};

SteadyCostEval steady_cost(const Model& model, const StageCost& cost,
                           const std::vector<Eigen::VectorXd>& samples,
                           const Eigen::VectorXd& v) {
  VelocitySteadyState ss = find_velocity_steady_state(model, v, samples);
  const double value = cost.at(v, ss.u_bar);
  return {std::move(ss.u_bar), value};
}

}  // namespace

VelocitySteadyState optimal_velocity_steady_state(const Model& model, const StageCost& cost,
                                                  const Box& v_box, double tol, int max_iter) {
  cost.validate();
  const Eigen::Index nq = model.config_dim();
  if (cost.w_v.size() != nq || cost.w_u.size() != model.control_dim())
    throw ContractError("optimal steady state: cost dimension mismatch");
  if (v_box.lo.size() != nq || v_box.hi.size() != nq)
    throw ContractError("optimal steady state: search box must bound every velocity component");
  if (!v_box.lo.allFinite() || !v_box.hi.allFinite())
    throw ContractError("optimal steady state: search box must be compact");
  if ((v_box.hi - v_box.lo).minCoeff() < 0.0)
    throw ContractError("optimal steady state: empty search box");

  const std::vector<Eigen::VectorXd> samples = default_config_samples(model);
  const auto clamp_box = [&](Eigen::VectorXd v) {
    return v.cwiseMax(v_box.lo).cwiseMin(v_box.hi);
  };

  // Coarse grid: 21 points per dimension.
  constexpr int kGrid = 21;
  Eigen::VectorXd best_v;
  SteadyCostEval best{Eigen::VectorXd(), std::numeric_limits<double>::infinity()};
  std::vector<int> idx(static_cast<std::size_t>(nq), 0);
  while (true) {
    Eigen::VectorXd v(nq);
    for (Eigen::Index i = 0; i < nq; ++i) {
      const double w = (v_box.hi(i) - v_box.lo(i)) / (kGrid - 1);
      v(i) = v_box.lo(i) + w * idx[static_cast<std::size_t>(i)];
    }
    SteadyCostEval eval = steady_cost(model, cost, samples, v);
    const bool better = eval.value < best.value - 1e-14 ||
                        (eval.value <= best.value + 1e-14 &&
                         (best_v.size() == 0 || v.norm() < best_v.norm()));
    if (better) {
      best = std::move(eval);
      best_v = v;
    }
    Eigen::Index dim = 0;
    for (; dim < nq; ++dim) {
      if (++idx[static_cast<std::size_t>(dim)] < kGrid) break;
      idx[static_cast<std::size_t>(dim)] = 0;
    }
    if (dim == nq) break;
  }

  // Projected damped Newton on v -> cost(v, u(v)); du/dv comes from the
  // implicit function theorem on the steady-state equations.
  Eigen::VectorXd v = best_v;
  Eigen::VectorXd u = best.u;
  double value = best.value;
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::Index nu = model.control_dim();
    Eigen::MatrixXd Jv(nq * static_cast<Eigen::Index>(samples.size()), nq);
    Eigen::MatrixXd Ju(nq * static_cast<Eigen::Index>(samples.size()), nu);
    Eigen::MatrixXd dq, dvj, duj;
    for (std::size_t s = 0; s < samples.size(); ++s) {
      model.accel_jacobians(samples[s], v, u, dq, dvj, duj);
      Jv.middleRows(static_cast<Eigen::Index>(s) * nq, nq) = dvj;
      Ju.middleRows(static_cast<Eigen::Index>(s) * nq, nq) = duj;
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(Ju, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::MatrixXd du_dv = svd.solve(-Jv);

    Eigen::VectorXd gv, gu;
    cost.gradient(v, u, gv, gu);
    const Eigen::VectorXd grad = gv + du_dv.transpose() * gu;

    Eigen::VectorXd pg = grad;
    for (Eigen::Index i = 0; i < nq; ++i) {
      if ((v(i) <= v_box.lo(i) + 1e-14 && grad(i) > 0.0) ||
          (v(i) >= v_box.hi(i) - 1e-14 && grad(i) < 0.0))
        pg(i) = 0.0;
    }
    if (pg.cwiseAbs().maxCoeff() <= tol) break;

    Eigen::MatrixXd H = (2.0 * cost.scale * cost.w_v).asDiagonal();
    H += du_dv.transpose() * (2.0 * cost.scale * cost.w_u).asDiagonal() * du_dv;
    H.diagonal().array() += 1e-12;
    const Eigen::VectorXd dv = H.ldlt().solve(-grad);

    double alpha = 1.0;
    bool accepted = false;
    while (alpha >= 1e-10) {
      const Eigen::VectorXd v_try = clamp_box(v + alpha * dv);
      SteadyCostEval trial = steady_cost(model, cost, samples, v_try);
      if (trial.value < value) {
        v = v_try;
        u = std::move(trial.u);
        value = trial.value;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
  }

  // A singular reduced Hessian means the minimizer is non-unique along some
  // velocity direction.
  bool degenerate = false;
  {
    const Eigen::Index nu = model.control_dim();
    Eigen::MatrixXd Jv(nq * static_cast<Eigen::Index>(samples.size()), nq);
    Eigen::MatrixXd Ju(nq * static_cast<Eigen::Index>(samples.size()), nu);
    Eigen::MatrixXd dq, dvj, duj;
    for (std::size_t s = 0; s < samples.size(); ++s) {
      model.accel_jacobians(samples[s], v, u, dq, dvj, duj);
      Jv.middleRows(static_cast<Eigen::Index>(s) * nq, nq) = dvj;
      Ju.middleRows(static_cast<Eigen::Index>(s) * nq, nq) = duj;
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(Ju, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::MatrixXd du_dv = svd.solve(-Jv);
    Eigen::MatrixXd H = (2.0 * cost.scale * cost.w_v).asDiagonal();
    H += du_dv.transpose() * (2.0 * cost.scale * cost.w_u).asDiagonal() * du_dv;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
    degenerate = eig.eigenvalues().minCoeff() <=
                 1e-10 * std::max(1.0, eig.eigenvalues().maxCoeff());
  }

  // Minimum-norm tie-break: move each coordinate toward zero when the cost
  // does not care.
  for (Eigen::Index i = 0; i < nq; ++i) {
    Eigen::VectorXd v_try = v;
    v_try(i) = std::min(std::max(0.0, v_box.lo(i)), v_box.hi(i));
    if (v_try(i) == v(i)) continue;
    SteadyCostEval trial = steady_cost(model, cost, samples, v_try);
    if (trial.value <= value + 1e-12 * std::max(1.0, std::abs(value))) {
      v = std::move(v_try);
      u = std::move(trial.u);
      value = trial.value;
    }
  }

  VelocitySteadyState out;
  out.v_bar = std::move(v);
  out.u_bar = std::move(u);
  out.residual = stack_residual(model, samples, out.v_bar, out.u_bar).cwiseAbs().maxCoeff();
  out.degenerate = degenerate;
  return out;
}

std::unique_ptr<SymmetryAction> default_action(const Model& model) {
  if (model.name() == "hovercraft") return std::make_unique<PlanarAction>();
  return std::make_unique<TranslationAction>(model.config_dim(), model.config_dim());
}

}  // namespace turnpike
