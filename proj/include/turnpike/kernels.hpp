#pragma once

#include <Eigen/Core>

#include "turnpike/core.hpp"
#include "turnpike/models.hpp"

// Hot loops shared by transcription and the turnpike diagnostics. Each
// kernel has an OpenMP-parallel production version here and a plain serial
// twin in kernels::reference used by tests and the benchmark tool. The
// production reductions accumulate in fixed-size blocks merged in index
// order, so results do not depend on the thread count.
namespace turnpike::kernels {

/// Trapezoidal integral of nodal values f over the (strictly increasing)
/// grid: sum of 0.5*(t_{k+1}-t_k)*(f_k + f_{k+1}).
double trapezoid_integral(const Eigen::VectorXd& times, const Eigen::VectorXd& values);

/// Stage cost evaluated at every node. V is dim(q) x (N+1), U is
/// dim(u) x (N+1); column k is node k.
Eigen::VectorXd node_costs(const StageCost& cost, const Eigen::MatrixXd& V,
                           const Eigen::MatrixXd& U);

/// Euclidean norm of the stacked offset (v_k - v_ref, u_k - u_ref) per node.
Eigen::VectorXd deviation_norms(const Eigen::MatrixXd& V, const Eigen::MatrixXd& U,
                                const Eigen::VectorXd& v_ref, const Eigen::VectorXd& u_ref);

/// Trapezoidal collocation defects x_{k+1} - x_k - h/2 (f_k + f_{k+1}) for
/// every interval, stacked in interval order. X is 2 dim(q) x (N+1) with
/// columns [q; v], U is dim(u) x (N+1).
Eigen::VectorXd collocation_defects(const Model& model, const Eigen::VectorXd& times,
                                    const Eigen::MatrixXd& X, const Eigen::MatrixXd& U);

/// Lebesgue measure of { t : d(t) > eps } for the piecewise-linear
/// interpolant of nodal values d, using exact segment crossing points.
double exceedance_measure(const Eigen::VectorXd& times, const Eigen::VectorXd& d, double eps);

namespace reference {

double trapezoid_integral(const Eigen::VectorXd& times, const Eigen::VectorXd& values);
Eigen::VectorXd node_costs(const StageCost& cost, const Eigen::MatrixXd& V,
                           const Eigen::MatrixXd& U);
Eigen::VectorXd deviation_norms(const Eigen::MatrixXd& V, const Eigen::MatrixXd& U,
                                const Eigen::VectorXd& v_ref, const Eigen::VectorXd& u_ref);
Eigen::VectorXd collocation_defects(const Model& model, const Eigen::VectorXd& times,
                                    const Eigen::MatrixXd& X, const Eigen::MatrixXd& U);
double exceedance_measure(const Eigen::VectorXd& times, const Eigen::VectorXd& d, double eps);

}  // namespace reference
}  // namespace turnpike::kernels
