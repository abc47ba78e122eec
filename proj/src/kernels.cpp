#include "turnpike/kernels.hpp"

#include <cmath>

#include "turnpike/parallel.hpp"

namespace turnpike::kernels {

namespace {

void check_grid(const Eigen::VectorXd& times, Eigen::Index values) {
  if (times.size() < 2) throw ContractError("kernel: grid needs at least two nodes");
  if (times.size() != values) throw ContractError("kernel: nodal array length != grid length");
  for (Eigen::Index k = 0; k + 1 < times.size(); ++k)
    if (!(times(k) < times(k + 1))) throw ContractError("kernel: grid not strictly increasing");
}

double trapezoid_term(const Eigen::VectorXd& times, const Eigen::VectorXd& values,
                      Eigen::Index k) {
  return 0.5 * (times(k + 1) - times(k)) * (values(k) + values(k + 1));
}

// Length of { d > eps } within segment k of the piecewise-linear profile.
double segment_exceedance(const Eigen::VectorXd& times, const Eigen::VectorXd& d, double eps,
                          Eigen::Index k) {
  const double h = times(k + 1) - times(k);
  const double d0 = d(k);
  const double d1 = d(k + 1);
  const bool above0 = d0 > eps;
  const bool above1 = d1 > eps;
  if (above0 && above1) return h;
  if (!above0 && !above1) return 0.0;
  const double a = (eps - d0) / (d1 - d0);  // crossing point as a fraction
  return above0 ? a * h : (1.0 - a) * h;
}

void check_node_matrices(const Eigen::MatrixXd& V, const Eigen::MatrixXd& U) {
  if (V.cols() != U.cols()) throw ContractError("kernel: node count mismatch between V and U");
  if (V.rows() == 0 || U.rows() == 0) throw ContractError("kernel: empty nodal matrix");
}

}  // namespace

double trapezoid_integral(const Eigen::VectorXd& times, const Eigen::VectorXd& values) {
  check_grid(times, values.size());
  return par::blocked_sum(times.size() - 1,
                          [&](std::int64_t k) { return trapezoid_term(times, values, k); });
}

Eigen::VectorXd node_costs(const StageCost& cost, const Eigen::MatrixXd& V,
                           const Eigen::MatrixXd& U) {
  check_node_matrices(V, U);
  Eigen::VectorXd out(V.cols());
  par::parallel_for(V.cols(), [&](std::int64_t k) { out(k) = cost.at(V.col(k), U.col(k)); },
                    4096);
  return out;
}

Eigen::VectorXd deviation_norms(const Eigen::MatrixXd& V, const Eigen::MatrixXd& U,
                                const Eigen::VectorXd& v_ref, const Eigen::VectorXd& u_ref) {
  check_node_matrices(V, U);
  if (V.rows() != v_ref.size() || U.rows() != u_ref.size())
    throw ContractError("kernel: reference dimension mismatch");
  Eigen::VectorXd out(V.cols());
  par::parallel_for(
      V.cols(),
      [&](std::int64_t k) {
        const double sv = (V.col(k) - v_ref).squaredNorm();
        const double su = (U.col(k) - u_ref).squaredNorm();
        out(k) = std::sqrt(sv + su);
      },
      4096);
  return out;
}

Eigen::VectorXd collocation_defects(const Model& model, const Eigen::VectorXd& times,
                                    const Eigen::MatrixXd& X, const Eigen::MatrixXd& U) {
  check_grid(times, X.cols());
  check_node_matrices(X, U);
  const Eigen::Index nx = 2 * model.config_dim();
  if (X.rows() != nx || U.rows() != model.control_dim())
    throw ContractError("kernel: state/control rows do not match the model");

  const Eigen::Index n = times.size();
  Eigen::MatrixXd F(nx, n);
  par::parallel_for(n, [&](std::int64_t k) { F.col(k) = model.dynamics(X.col(k), U.col(k)); },
                    512);

  Eigen::VectorXd defects(nx * (n - 1));
  par::parallel_for(
      n - 1,
      [&](std::int64_t k) {
        const double h = times(k + 1) - times(k);
        defects.segment(k * nx, nx) =
            X.col(k + 1) - X.col(k) - 0.5 * h * (F.col(k) + F.col(k + 1));
      },
      512);
  return defects;
}

double exceedance_measure(const Eigen::VectorXd& times, const Eigen::VectorXd& d, double eps) {
  check_grid(times, d.size());
  if (!(eps > 0.0)) throw ContractError("kernel: eps must be positive");
  return par::blocked_sum(times.size() - 1,
                          [&](std::int64_t k) { return segment_exceedance(times, d, eps, k); });
}

namespace reference {

double trapezoid_integral(const Eigen::VectorXd& times, const Eigen::VectorXd& values) {
  check_grid(times, values.size());
  double s = 0.0;
  for (Eigen::Index k = 0; k + 1 < times.size(); ++k) s += trapezoid_term(times, values, k);
  return s;
}

Eigen::VectorXd node_costs(const StageCost& cost, const Eigen::MatrixXd& V,
                           const Eigen::MatrixXd& U) {
  check_node_matrices(V, U);
  Eigen::VectorXd out(V.cols());
  for (Eigen::Index k = 0; k < V.cols(); ++k) out(k) = cost.at(V.col(k), U.col(k));
  return out;
}

Eigen::VectorXd deviation_norms(const Eigen::MatrixXd& V, const Eigen::MatrixXd& U,
                                const Eigen::VectorXd& v_ref, const Eigen::VectorXd& u_ref) {
  check_node_matrices(V, U);
  if (V.rows() != v_ref.size() || U.rows() != u_ref.size())
    throw ContractError("kernel: reference dimension mismatch");
  Eigen::VectorXd out(V.cols());
  for (Eigen::Index k = 0; k < V.cols(); ++k)
    out(k) = std::sqrt((V.col(k) - v_ref).squaredNorm() + (U.col(k) - u_ref).squaredNorm());
  return out;
}

Eigen::VectorXd collocation_defects(const Model& model, const Eigen::VectorXd& times,
                                    const Eigen::MatrixXd& X, const Eigen::MatrixXd& U) {
  check_grid(times, X.cols());
  check_node_matrices(X, U);
  const Eigen::Index nx = 2 * model.config_dim();
  if (X.rows() != nx || U.rows() != model.control_dim())
    throw ContractError("kernel: state/control rows do not match the model");
  const Eigen::Index n = times.size();
  Eigen::MatrixXd F(nx, n);
  for (Eigen::Index k = 0; k < n; ++k) F.col(k) = model.dynamics(X.col(k), U.col(k));
  Eigen::VectorXd defects(nx * (n - 1));
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    const double h = times(k + 1) - times(k);
    defects.segment(k * nx, nx) = X.col(k + 1) - X.col(k) - 0.5 * h * (F.col(k) + F.col(k + 1));
  }
  return defects;
}

double exceedance_measure(const Eigen::VectorXd& times, const Eigen::VectorXd& d, double eps) {
  check_grid(times, d.size());
  if (!(eps > 0.0)) throw ContractError("kernel: eps must be positive");
  double s = 0.0;
  for (Eigen::Index k = 0; k + 1 < times.size(); ++k) s += segment_exceedance(times, d, eps, k);
  return s;
}

}  // namespace reference
}  // namespace turnpike::kernels
