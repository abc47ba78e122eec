#include "turnpike/nlp.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <deque>
#include <limits>

namespace turnpike {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd project(const NlpProblem& p, Eigen::VectorXd z) {
  if (!p.variable_bounds.empty())
    z = z.cwiseMax(p.variable_bounds.lo).cwiseMin(p.variable_bounds.hi);
  return z;
}

void check_dims(const NlpProblem& p, const Eigen::VectorXd& z) {
  if (z.size() != p.dim_z) throw ContractError("nlp: decision vector size mismatch");
}

// One sparse factorization of the saddle-point system
//   [H J^T; J 0] [z; mu] = [-g0; -c0]
// valid when the objective is quadratic (constant diagonal Hessian H) and
// the constraints are affine (constant Jacobian).
SolveReport solve_kkt(const NlpProblem& p, const Eigen::VectorXd& z0,
                      const SolverOptions& opts) {
  const Eigen::Index n = p.dim_z;
  const Eigen::Index m = p.constraint_count;
  const Eigen::VectorXd zref = Eigen::VectorXd::Zero(n);
  const Eigen::VectorXd g0 = p.objective_gradient(zref);
  const Eigen::VectorXd c0 = p.constraints(zref);
  const SpMat J = p.constraint_jacobian(z0);
  if (!g0.allFinite() || !c0.allFinite())
    throw CallbackError("nlp: non-finite callback values at the reference point");

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(n + 2 * J.nonZeros()));
  for (Eigen::Index i = 0; i < n; ++i)
    if (p.objective_hessian_diag(i) != 0.0)
      trips.emplace_back(static_cast<int>(i), static_cast<int>(i),
                         p.objective_hessian_diag(i));
  for (int k = 0; k < J.outerSize(); ++k)
    for (SpMat::InnerIterator it(J, k); it; ++it) {
      trips.emplace_back(static_cast<int>(n + it.row()), static_cast<int>(it.col()), it.value());
      trips.emplace_back(static_cast<int>(it.col()), static_cast<int>(n + it.row()), it.value());
    }
  SpMat K(n + m, n + m);
  K.setFromTriplets(trips.begin(), trips.end());

  Eigen::VectorXd rhs(n + m);
  rhs << -g0, -c0;

  Eigen::SparseLU<SpMat> lu;
  lu.compute(K);

  SolveReport rep;
  if (lu.info() != Eigen::Success) {
    rep.z_star = z0;
    rep.multipliers = Eigen::VectorXd::Zero(m);
    rep.kkt_residual = kkt_residual(p, z0, rep.multipliers);
    rep.feasibility = p.constraints(z0).cwiseAbs().maxCoeff();
    rep.converged = false;
    return rep;
  }
  const Eigen::VectorXd sol = lu.solve(rhs);
  rep.z_star = sol.head(n);
  rep.multipliers = sol.tail(m);
  rep.feasibility = p.constraints(rep.z_star).cwiseAbs().maxCoeff();
  rep.kkt_residual = kkt_residual(p, rep.z_star, rep.multipliers);
  rep.outer_iterations = 1;
  rep.converged = rep.z_star.allFinite() && rep.kkt_residual <= opts.tol_kkt &&
                  rep.feasibility <= opts.tol_kkt;
  return rep;
}

struct LbfgsMemory {
  std::deque<Eigen::VectorXd> s;
  std::deque<Eigen::VectorXd> y;
  std::deque<double> rho;

  void push(const Eigen::VectorXd& si, const Eigen::VectorXd& yi) {
    const double sy = si.dot(yi);
    if (sy <= 1e-12 * si.norm() * yi.norm()) return;  // curvature too weak
    s.push_back(si);
    y.push_back(yi);
    rho.push_back(1.0 / sy);
    if (s.size() > 20) {
      s.pop_front();
      y.pop_front();
      rho.pop_front();
    }
  }

  void clear() {
    s.clear();
    y.clear();
    rho.clear();
  }

  // Two-loop recursion mapping the gradient to a descent direction.
  Eigen::VectorXd direction(const Eigen::VectorXd& g) const {
    Eigen::VectorXd q = -g;
    if (s.empty()) return q;
    const std::size_t k = s.size();
    std::vector<double> alpha(k);
    for (std::size_t i = k; i-- > 0;) {
      alpha[i] = rho[i] * s[i].dot(q);
      q -= alpha[i] * y[i];
    }
    q *= s.back().dot(y.back()) / y.back().squaredNorm();
    for (std::size_t i = 0; i < k; ++i) {
      const double beta = rho[i] * y[i].dot(q);
      q += (alpha[i] - beta) * s[i];
    }
    return q;
  }
};

SolveReport solve_augmented(const NlpProblem& p, const Eigen::VectorXd& z0,
                            const SolverOptions& opts) {
  const Eigen::Index m = p.constraint_count;

  Eigen::VectorXd z = project(p, z0);
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(m);
  double rho = opts.penalty_init;
  // Inner stationarity and feasibility targets follow the classic
  // augmented-Lagrangian schedule, floored at the final tolerance.
  double omega = 1.0 / rho;
  double eta = std::pow(rho, -0.1);

  const auto lagrangian = [&](const Eigen::VectorXd& zz, Eigen::VectorXd& c) {
    c = p.constraints(zz);
    return p.objective(zz) + mu.dot(c) + 0.5 * rho * c.squaredNorm();
  };
  const auto lagrangian_gradient = [&](const Eigen::VectorXd& zz, const Eigen::VectorXd& c) {
    const SpMat J = p.constraint_jacobian(zz);
    return Eigen::VectorXd(p.objective_gradient(zz) + J.transpose() * (mu + rho * c));
  };
  // At an active bound the raw gradient stays finite, so stationarity is
  // measured through the projected gradient step.
  const auto stationarity = [&](const Eigen::VectorXd& zz, const Eigen::VectorXd& gg) {
    if (p.variable_bounds.empty()) return gg.cwiseAbs().maxCoeff();
    return (zz - project(p, zz - gg)).cwiseAbs().maxCoeff();
  };
  // Components pressed against a bound with the gradient pushing outward are
  // frozen, so the quasi-Newton model lives on the current face.
  const auto active_set = [&](const Eigen::VectorXd& zz, const Eigen::VectorXd& gg) {
    Eigen::Array<bool, Eigen::Dynamic, 1> a(zz.size());
    a.setConstant(false);
    if (p.variable_bounds.empty()) return a;
    const Eigen::VectorXd& lo = p.variable_bounds.lo;
    const Eigen::VectorXd& hi = p.variable_bounds.hi;
    for (Eigen::Index i = 0; i < zz.size(); ++i) {
      const double edge = 1e-10 * std::max(1.0, std::abs(zz[i]));
      a[i] = (zz[i] - lo[i] <= edge && gg[i] > 0.0) || (hi[i] - zz[i] <= edge && gg[i] < 0.0);
    }
    return a;
  };
  const auto mask = [](Eigen::VectorXd v, const Eigen::Array<bool, Eigen::Dynamic, 1>& a) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
      if (a[i]) v[i] = 0.0;
    return v;
  };

  SolveReport rep;
  rep.converged = false;

  Eigen::VectorXd c;
  double L = lagrangian(z, c);
  if (!std::isfinite(L) || !c.allFinite())
    throw CallbackError("nlp: non-finite callback values at the starting point");

  int total_inner = 0;
  // Curvature pairs stay valid across multiplier updates (same rho, same
  // Hessian up to the small constraint-curvature term), so the memory is
  // only dropped when the penalty changes.
  LbfgsMemory mem;
  Eigen::Array<bool, Eigen::Dynamic, 1> face(z.size());
  face.setConstant(false);
  for (int outer = 0; outer < opts.max_outer; ++outer) {
    Eigen::VectorXd g = lagrangian_gradient(z, c);
    const double inner_tol = std::max(omega, 0.1 * opts.tol_kkt);

    for (int inner = 0; inner < opts.max_inner; ++inner) {
      if (stationarity(z, g) <= inner_tol) break;
      ++total_inner;

      const auto act = active_set(z, g);
      if ((act != face).any()) {
        mem.clear();  // curvature pairs from another face are stale
        face = act;
      }
      const Eigen::VectorXd gm = mask(g, act);
      Eigen::VectorXd d = mask(mem.direction(gm), act);
      if (d.dot(gm) >= 0.0) {
        mem.clear();
        d = -gm;
      }

      // Armijo backtracking on the projected step.
      const double gd = gm.dot(d);
      double alpha = 1.0;
      bool accepted = false;
      Eigen::VectorXd z_new, c_new;
      double L_new = 0.0;
      for (int bt = 0; bt < 60; ++bt) {
        z_new = project(p, z + alpha * d);
        L_new = lagrangian(z_new, c_new);
        if (std::isfinite(L_new) && L_new <= L + 1e-4 * alpha * gd) {
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) break;

      const Eigen::VectorXd g_new = lagrangian_gradient(z_new, c_new);
      mem.push(mask(z_new - z, act), mask(g_new - g, act));
      z = std::move(z_new);
      c = std::move(c_new);
      g = g_new;
      L = L_new;
    }

    const double feas = c.cwiseAbs().maxCoeff();
    rep.outer_feasibility.push_back(feas);
    rep.outer_penalty.push_back(rho);
    rep.outer_iterations = outer + 1;

    if (feas <= std::max(eta, opts.tol_kkt)) {
      // First-order multiplier update; the updated stationarity equals the
      // inner gradient, so convergence can be declared here.
      mu += rho * c;
      const Eigen::VectorXd g_updated = lagrangian_gradient(z, Eigen::VectorXd::Zero(m));
      if (feas <= opts.tol_kkt && stationarity(z, g_updated) <= opts.tol_kkt) {
        rep.converged = true;
        break;
      }
      omega = std::max(omega / rho, 0.1 * opts.tol_kkt);
      eta = std::max(eta / std::pow(rho, 0.9), opts.tol_kkt);
    } else {
      rho *= opts.penalty_growth;
      omega = 1.0 / rho;
      eta = std::pow(rho, -0.1);
      mem.clear();
    }
    L = lagrangian(z, c);  // refresh with the new mu / rho
  }

  rep.z_star = std::move(z);
  rep.multipliers = std::move(mu);
  rep.inner_iterations = total_inner;
  const Eigen::VectorXd c_final = p.constraints(rep.z_star);
  rep.feasibility = c_final.cwiseAbs().maxCoeff();
  if (p.variable_bounds.empty()) {
    rep.kkt_residual = kkt_residual(p, rep.z_star, rep.multipliers);
  } else {
    const SpMat J = p.constraint_jacobian(rep.z_star);
    const Eigen::VectorXd stat_grad =
        p.objective_gradient(rep.z_star) + J.transpose() * rep.multipliers;
    rep.kkt_residual = std::max(stationarity(rep.z_star, stat_grad), rep.feasibility);
  }
  return rep;
}

}  // namespace

void SolverOptions::validate() const {
  if (!(tol_kkt > 0.0 && tol_kkt < 1.0)) throw ContractError("solver options: tol in (0, 1)");
  if (max_outer < 1 || max_inner < 1) throw ContractError("solver options: iteration counts");
  if (!(penalty_init > 0.0) || !(penalty_growth > 1.0))
    throw ContractError("solver options: penalties");
}

SolveReport solve(const NlpProblem& problem, const Eigen::VectorXd& z0,
                  const SolverOptions& opts) {
  opts.validate();
  check_dims(problem, z0);
  if (problem.linear_quadratic && problem.variable_bounds.empty())
    return solve_kkt(problem, z0, opts);
  return solve_augmented(problem, z0, opts);
}

double kkt_residual(const NlpProblem& problem, const Eigen::VectorXd& z,
                    const Eigen::VectorXd& mu) {
  check_dims(problem, z);
  if (mu.size() != problem.constraint_count)
    throw ContractError("nlp: multiplier dimension mismatch");
  const SpMat J = problem.constraint_jacobian(z);
  const Eigen::VectorXd stat = problem.objective_gradient(z) + J.transpose() * mu;
  const Eigen::VectorXd c = problem.constraints(z);
  return std::max(stat.cwiseAbs().maxCoeff(), c.cwiseAbs().maxCoeff());
}

double gradient_check(const NlpProblem& problem, const Eigen::VectorXd& z, double step) {
  check_dims(problem, z);
  if (!(step > 0.0)) throw ContractError("gradient_check: step must be positive");

  const auto rel = [](double got, double want) {
    return std::abs(got - want) / std::max({1.0, std::abs(got), std::abs(want)});
  };

  double worst = 0.0;
  const Eigen::VectorXd g = problem.objective_gradient(z);
  const Eigen::MatrixXd J = Eigen::MatrixXd(problem.constraint_jacobian(z));
  Eigen::VectorXd zp = z;
  for (Eigen::Index i = 0; i < problem.dim_z; ++i) {
    zp(i) = z(i) + step;
    const double f_hi = problem.objective(zp);
    const Eigen::VectorXd c_hi = problem.constraints(zp);
    zp(i) = z(i) - step;
    const double f_lo = problem.objective(zp);
    const Eigen::VectorXd c_lo = problem.constraints(zp);
    zp(i) = z(i);

    worst = std::max(worst, rel(g(i), (f_hi - f_lo) / (2.0 * step)));
    const Eigen::VectorXd col = (c_hi - c_lo) / (2.0 * step);
    for (Eigen::Index r = 0; r < problem.constraint_count; ++r)
      worst = std::max(worst, rel(J(r, i), col(r)));
  }
  return worst;
}

Trajectory solution_trajectory(const SolveReport& report, std::shared_ptr<const Model> model,
                               const Scenario& scenario, const TranscriptionConfig& cfg) {
  Trajectory traj = extract_trajectory(report.z_star, scenario, cfg);
  if (!scenario.control_bounds.empty() || !scenario.state_bounds.empty()) return traj;

  NlpLayout layout;
  layout.nq = scenario.x0.dim();
  layout.nu = model->control_dim();
  layout.N = cfg.N;
  if (report.multipliers.size() != layout.constraint_count()) return traj;

  const Eigen::Index nx = layout.nx();
  const Eigen::VectorXd nu_0 = report.multipliers.segment(layout.N * nx, nx);
  const Eigen::VectorXd nu_T = report.multipliers.segment((layout.N + 1) * nx, nx);

  // Stationarity in u: 2 scale w_u . u + B(q)^T lambda_v = 0, where B is
  // the control block of the acceleration Jacobian. The boundary equality
  // multipliers satisfy nu_0 = -lambda(0) and nu_T = +lambda(T).
  const Eigen::VectorXd weights = 2.0 * scenario.cost.scale * scenario.cost.w_u;
  auto pontryagin_control = [&](const State& x, const Eigen::VectorXd& u_node,
                                const Eigen::VectorXd& lambda) -> Eigen::VectorXd {
    Eigen::MatrixXd dq, dv, du;
    model->accel_jacobians(x.q, x.v, u_node, dq, dv, du);
    Eigen::VectorXd rhs = du.transpose() * lambda.tail(layout.nq);
    return (-rhs.array() / weights.array()).matrix();
  };

  traj.controls.front() =
      pontryagin_control(traj.states.front(), traj.controls.front(), (-nu_0).eval());
  traj.controls.back() =
      pontryagin_control(traj.states.back(), traj.controls.back(), nu_T);
  return traj;
}

}  // namespace turnpike
