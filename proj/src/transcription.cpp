#include "turnpike/transcription.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "turnpike/kernels.hpp"
#include "turnpike/parallel.hpp"

namespace turnpike {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

Eigen::VectorXd uniform_times(double T, Eigen::Index N) {
  Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(N + 1, 0.0, T);
  t(N) = T;
  return t;
}

// First-order-form partials: fx = d(v, a)/d(q, v), fu = d(v, a)/du.
void full_jacobians(const Model& model, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                    Eigen::MatrixXd& fx, Eigen::MatrixXd& fu) {
  const Eigen::Index nq = model.config_dim();
  Eigen::MatrixXd dq, dv, du;
  model.accel_jacobians(x.head(nq), x.tail(nq), u, dq, dv, du);
  fx.setZero(2 * nq, 2 * nq);
  fx.topRightCorner(nq, nq).setIdentity();
  fx.bottomLeftCorner(nq, nq) = dq;
  fx.bottomRightCorner(nq, nq) = dv;
  fu.setZero(2 * nq, model.control_dim());
  fu.bottomRows(nq) = du;
}

struct PackedView {
  Eigen::Map<const Eigen::MatrixXd> X;
  Eigen::Map<const Eigen::MatrixXd> U;
};

PackedView view_z(const Eigen::VectorXd& z, const NlpLayout& L) {
  if (z.size() != L.dim_z()) throw ContractError("nlp problem: decision vector size mismatch");
  return {Eigen::Map<const Eigen::MatrixXd>(z.data(), L.nx(), L.N + 1),
          Eigen::Map<const Eigen::MatrixXd>(z.data() + (L.N + 1) * L.nx(), L.nu, L.N + 1)};
}

Eigen::VectorXd trapezoid_weights(const Eigen::VectorXd& times) {
  const Eigen::Index n = times.size();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    const double h2 = 0.5 * (times(k + 1) - times(k));
    w(k) += h2;
    w(k + 1) += h2;
  }
  return w;
}

// Hermite-Simpson defects in compressed form; controls at the midpoint are
// the average of the adjacent nodes (piecewise-linear control).
Eigen::VectorXd hs_defects(const Model& model, const Eigen::VectorXd& times,
                           const Eigen::MatrixXd& X, const Eigen::MatrixXd& U) {
  const Eigen::Index nx = X.rows();
  const Eigen::Index n = times.size();
  Eigen::MatrixXd F(nx, n);
  par::parallel_for(n, [&](std::int64_t k) { F.col(k) = model.dynamics(X.col(k), U.col(k)); },
                    512);
  Eigen::VectorXd defects(nx * (n - 1));
  par::parallel_for(
      n - 1,
      [&](std::int64_t k) {
        const double h = times(k + 1) - times(k);
        const Eigen::VectorXd xm =
            0.5 * (X.col(k) + X.col(k + 1)) + (h / 8.0) * (F.col(k) - F.col(k + 1));
        const Eigen::VectorXd um = 0.5 * (U.col(k) + U.col(k + 1));
        const Eigen::VectorXd fm = model.dynamics(xm, um);
        defects.segment(k * nx, nx) =
            X.col(k + 1) - X.col(k) - (h / 6.0) * (F.col(k) + 4.0 * fm + F.col(k + 1));
      },
      256);
  return defects;
}

void emit_block(std::vector<Triplet>& out, std::size_t& pos, Eigen::Index row0,
                Eigen::Index col0, const Eigen::MatrixXd& B) {
  for (Eigen::Index c = 0; c < B.cols(); ++c)
    for (Eigen::Index r = 0; r < B.rows(); ++r)
      out[pos++] = Triplet(static_cast<int>(row0 + r), static_cast<int>(col0 + c), B(r, c));
}

SpMat assemble_jacobian(const Model& model, const NlpLayout& L, const Eigen::VectorXd& times,
                        Scheme scheme, const Eigen::VectorXd& z) {
  const PackedView P = view_z(z, L);
  const Eigen::Index nx = L.nx();
  const Eigen::Index nu = L.nu;
  const Eigen::Index N = L.N;

  // Dense per-interval blocks (including structural zeros) keep the
  // sparsity pattern fixed across evaluations.
  const std::size_t per_interval = static_cast<std::size_t>(2 * nx * nx + 2 * nx * nu);
  std::vector<Triplet> trips(static_cast<std::size_t>(N) * per_interval +
                             static_cast<std::size_t>(2 * nx));

  par::parallel_for(
      N,
      [&](std::int64_t k) {
        std::size_t pos = static_cast<std::size_t>(k) * per_interval;
        const double h = times(k + 1) - times(k);
        Eigen::MatrixXd fx0, fu0, fx1, fu1;
        full_jacobians(model, P.X.col(k), P.U.col(k), fx0, fu0);
        full_jacobians(model, P.X.col(k + 1), P.U.col(k + 1), fx1, fu1);
        const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(nx, nx);
        const Eigen::Index row = k * nx;
        if (scheme == Scheme::Trapezoidal) {
          emit_block(trips, pos, row, L.state_offset(k), -I - 0.5 * h * fx0);
          emit_block(trips, pos, row, L.state_offset(k + 1), I - 0.5 * h * fx1);
          emit_block(trips, pos, row, L.control_offset(k), -0.5 * h * fu0);
          emit_block(trips, pos, row, L.control_offset(k + 1), -0.5 * h * fu1);
        } else {
          const Eigen::VectorXd xm =
              0.5 * (P.X.col(k) + P.X.col(k + 1)) +
              (h / 8.0) * (model.dynamics(P.X.col(k), P.U.col(k)) -
                           model.dynamics(P.X.col(k + 1), P.U.col(k + 1)));
          const Eigen::VectorXd um = 0.5 * (P.U.col(k) + P.U.col(k + 1));
          Eigen::MatrixXd fxm, fum;
          full_jacobians(model, xm, um, fxm, fum);
          const Eigen::MatrixXd dxm_dxk = 0.5 * I + (h / 8.0) * fx0;
          const Eigen::MatrixXd dxm_dxk1 = 0.5 * I - (h / 8.0) * fx1;
          emit_block(trips, pos, row, L.state_offset(k),
                     -I - (h / 6.0) * (fx0 + 4.0 * fxm * dxm_dxk));
          emit_block(trips, pos, row, L.state_offset(k + 1),
                     I - (h / 6.0) * (fx1 + 4.0 * fxm * dxm_dxk1));
          emit_block(trips, pos, row, L.control_offset(k),
                     -(h / 6.0) * (fu0 + 4.0 * (fxm * ((h / 8.0) * fu0) + 0.5 * fum)));
          emit_block(trips, pos, row, L.control_offset(k + 1),
                     -(h / 6.0) * (fu1 + 4.0 * (fxm * ((-h / 8.0) * fu1) + 0.5 * fum)));
        }
      },
      64);

  // Boundary identity blocks.
  std::size_t pos = static_cast<std::size_t>(N) * per_interval;
  for (Eigen::Index r = 0; r < nx; ++r)
    trips[pos++] = Triplet(static_cast<int>(N * nx + r), static_cast<int>(L.state_offset(0) + r),
                           1.0);
  for (Eigen::Index r = 0; r < nx; ++r)
    trips[pos++] = Triplet(static_cast<int>((N + 1) * nx + r),
                           static_cast<int>(L.state_offset(N) + r), 1.0);

  SpMat J(L.constraint_count(), L.dim_z());
  J.setFromTriplets(trips.begin(), trips.end());
  return J;
}

Eigen::VectorXd build_bound(const Eigen::VectorXd& box_side, Eigen::Index expected,
                            const char* what, double fill) {
  if (box_side.size() == 0) return Eigen::VectorXd::Constant(expected, fill);
  if (box_side.size() != expected) throw ContractError(std::string("transcribe: ") + what);
  return box_side;
}

}  // namespace

NlpProblem transcribe(std::shared_ptr<const Model> model, const Scenario& scenario,
                      const TranscriptionConfig& cfg) {
  if (!model) throw ContractError("transcribe: null model");
  scenario.validate();
  if (cfg.N < 2) throw ContractError("transcribe: need at least two intervals");
  if (scenario.model != model->name())
    throw ContractError("transcribe: scenario names a different model");
  const Eigen::Index nq = model->config_dim();
  const Eigen::Index nu = model->control_dim();
  if (scenario.x0.dim() != nq) throw ContractError("transcribe: boundary state dimension");
  if (scenario.cost.w_v.size() != nq || scenario.cost.w_u.size() != nu)
    throw ContractError("transcribe: cost weight dimensions");

  NlpLayout L{nq, nu, cfg.N};
  const Eigen::VectorXd times = uniform_times(scenario.horizon, cfg.N);
  const Eigen::VectorXd weights = trapezoid_weights(times);
  const StageCost cost = scenario.cost;
  const Scheme scheme = cfg.scheme;

  Eigen::VectorXd x0(2 * nq), xT(2 * nq);
  x0 << scenario.x0.q, scenario.x0.v;
  xT << scenario.xT.q, scenario.xT.v;

  const double inf = std::numeric_limits<double>::infinity();
  Box zbox;
  if (!scenario.state_bounds.empty() || !scenario.control_bounds.empty()) {
    const Eigen::VectorXd xlo =
        build_bound(scenario.state_bounds.lo, 2 * nq, "state bound dimension", -inf);
    const Eigen::VectorXd xhi =
        build_bound(scenario.state_bounds.hi, 2 * nq, "state bound dimension", inf);
    const Eigen::VectorXd ulo =
        build_bound(scenario.control_bounds.lo, nu, "control bound dimension", -inf);
    const Eigen::VectorXd uhi =
        build_bound(scenario.control_bounds.hi, nu, "control bound dimension", inf);
    if (((x0.array() < xlo.array()) || (x0.array() > xhi.array()) ||
         (xT.array() < xlo.array()) || (xT.array() > xhi.array()))
            .any())
      throw ContractError("transcribe: boundary states violate the state box");
    zbox.lo.resize(L.dim_z());
    zbox.hi.resize(L.dim_z());
    for (Eigen::Index k = 0; k <= L.N; ++k) {
      zbox.lo.segment(L.state_offset(k), 2 * nq) = xlo;
      zbox.hi.segment(L.state_offset(k), 2 * nq) = xhi;
      zbox.lo.segment(L.control_offset(k), nu) = ulo;
      zbox.hi.segment(L.control_offset(k), nu) = uhi;
    }
  }

  NlpProblem p;
  p.dim_z = L.dim_z();
  p.constraint_count = L.constraint_count();
  p.layout = L;
  p.linear_quadratic = model->linear();
  p.variable_bounds = std::move(zbox);

  p.objective_hessian_diag = Eigen::VectorXd::Zero(L.dim_z());
  for (Eigen::Index k = 0; k <= L.N; ++k) {
    p.objective_hessian_diag.segment(L.velocity_offset(k), nq) =
        2.0 * cost.scale * weights(k) * cost.w_v;
    p.objective_hessian_diag.segment(L.control_offset(k), nu) =
        2.0 * cost.scale * weights(k) * cost.w_u;
  }

  p.objective = [model, L, times, cost](const Eigen::VectorXd& z) {
    const PackedView P = view_z(z, L);
    const Eigen::MatrixXd V = P.X.bottomRows(L.nq);
    const Eigen::VectorXd node = kernels::node_costs(cost, V, P.U);
    return kernels::trapezoid_integral(times, node);
  };

  p.objective_gradient = [L, weights, cost](const Eigen::VectorXd& z) {
    const PackedView P = view_z(z, L);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(L.dim_z());
    par::parallel_for(
        L.N + 1,
        [&](std::int64_t k) {
          Eigen::VectorXd dv, du;
          cost.gradient(P.X.col(k).tail(L.nq), P.U.col(k), dv, du);
          g.segment(L.velocity_offset(k), L.nq) = weights(k) * dv;
          g.segment(L.control_offset(k), L.nu) = weights(k) * du;
        },
        2048);
    return g;
  };

  p.constraints = [model, L, times, scheme, x0, xT](const Eigen::VectorXd& z) {
    const PackedView P = view_z(z, L);
    Eigen::VectorXd c(L.constraint_count());
    c.head(L.N * L.nx()) = scheme == Scheme::Trapezoidal
                               ? kernels::collocation_defects(*model, times, P.X, P.U)
                               : hs_defects(*model, times, P.X, P.U);
    c.segment(L.N * L.nx(), L.nx()) = P.X.col(0) - x0;
    c.tail(L.nx()) = P.X.col(L.N) - xT;
    return c;
  };

  p.constraint_jacobian = [model, L, times, scheme](const Eigen::VectorXd& z) {
    return assemble_jacobian(*model, L, times, scheme, z);
  };

  return p;
}

NlpProblem transcribe(const Scenario& scenario, const TranscriptionConfig& cfg) {
  scenario.validate();
  std::shared_ptr<const Model> model = make_model(scenario.model);
  return transcribe(std::move(model), scenario, cfg);
}

Eigen::VectorXd initial_guess(const Scenario& scenario, const TranscriptionConfig& cfg) {
  scenario.validate();
  if (cfg.N < 2) throw ContractError("initial_guess: need at least two intervals");
  const Eigen::Index nq = scenario.x0.dim();
  const Eigen::Index nu = scenario.cost.w_u.size();
  NlpLayout L{nq, nu, cfg.N};
  Eigen::VectorXd z = Eigen::VectorXd::Zero(L.dim_z());
  for (Eigen::Index k = 0; k <= L.N; ++k) {
    const double a = static_cast<double>(k) / static_cast<double>(L.N);
    z.segment(L.state_offset(k), nq) = (1.0 - a) * scenario.x0.q + a * scenario.xT.q;
    z.segment(L.velocity_offset(k), nq) = (1.0 - a) * scenario.x0.v + a * scenario.xT.v;
  }
  return z;
}

Trajectory extract_trajectory(const Eigen::VectorXd& z, const Scenario& scenario,
                              const TranscriptionConfig& cfg) {
  const Eigen::Index nq = scenario.x0.dim();
  const Eigen::Index nu = scenario.cost.w_u.size();
  NlpLayout L{nq, nu, cfg.N};
  if (z.size() != L.dim_z()) throw ContractError("extract_trajectory: size mismatch");

  Trajectory traj;
  traj.times = uniform_times(scenario.horizon, L.N);
  traj.states.resize(L.N + 1);
  traj.controls.resize(L.N + 1);
  for (Eigen::Index k = 0; k <= L.N; ++k) {
    traj.states[k].q = z.segment(L.state_offset(k), nq);
    traj.states[k].v = z.segment(L.velocity_offset(k), nq);
    traj.controls[k] = z.segment(L.control_offset(k), nu);
  }
  return traj;
}

Eigen::VectorXd pack_trajectory(const Trajectory& traj, const NlpLayout& layout) {
  if (traj.node_count() != layout.N + 1)
    throw ContractError("pack_trajectory: node count mismatch");
  Eigen::VectorXd z(layout.dim_z());
  for (Eigen::Index k = 0; k <= layout.N; ++k) {
    if (traj.states[k].dim() != layout.nq || traj.controls[k].size() != layout.nu)
      throw ContractError("pack_trajectory: dimension mismatch");
    z.segment(layout.state_offset(k), layout.nq) = traj.states[k].q;
    z.segment(layout.velocity_offset(k), layout.nq) = traj.states[k].v;
    z.segment(layout.control_offset(k), layout.nu) = traj.controls[k];
  }
  return z;
}

}  // namespace turnpike
