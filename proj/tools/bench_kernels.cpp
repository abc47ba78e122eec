// Times the OpenMP kernels against their serial reference twins and checks
// that both produce the same numbers. Usage: bench_kernels [nodes] [reps].
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <string>

#include "turnpike/kernels.hpp"
#include "turnpike/models.hpp"
#include "turnpike/parallel.hpp"
#include "turnpike/scenario_io.hpp"

namespace {

double best_of(int reps, const std::function<double()>& fn, double& sink) {
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < reps; ++r) {
    auto t0 = std::chrono::steady_clock::now();
    sink += fn();
    auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

void report(const std::string& name, Eigen::Index n, double par_ms, double ser_ms,
            double max_diff) {
  std::cout << name << ',' << n << ',' << turnpike::par::max_threads() << ','
            << turnpike::format_double(par_ms) << ',' << turnpike::format_double(ser_ms) << ','
            << turnpike::format_double(ser_ms / par_ms) << ','
            << turnpike::format_double(max_diff) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  using namespace turnpike;

  const Eigen::Index n = argc > 1 ? std::atol(argv[1]) : 1000000;
  const int reps = argc > 2 ? std::atoi(argv[2]) : 5;

  Eigen::VectorXd times = Eigen::VectorXd::LinSpaced(n, 0.0, 100.0);
  Eigen::VectorXd values(n);
  for (Eigen::Index k = 0; k < n; ++k) values(k) = std::sin(0.01 * static_cast<double>(k));

  auto model = make_model("double_integrator");
  Eigen::MatrixXd X(2, n);
  Eigen::MatrixXd U(1, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    double t = times(k);
    X(0, k) = std::sin(t);
    X(1, k) = std::cos(t);
    U(0, k) = std::sin(0.5 * t);
  }
  StageCost cost;
  cost.w_v = Eigen::VectorXd::Ones(1);
  cost.w_u = Eigen::VectorXd::Ones(1);
  Eigen::VectorXd v_ref = Eigen::VectorXd::Zero(1);
  Eigen::VectorXd u_ref = Eigen::VectorXd::Zero(1);
  Eigen::VectorXd d = values.cwiseAbs();

  double sink = 0.0;
  std::cout << "kernel,nodes,threads,parallel_ms,serial_ms,speedup,max_diff\n";

  {
    double a = kernels::trapezoid_integral(times, values);
    double b = kernels::reference::trapezoid_integral(times, values);
    double par_ms =
        best_of(reps, [&] { return kernels::trapezoid_integral(times, values); }, sink);
    double ser_ms =
        best_of(reps, [&] { return kernels::reference::trapezoid_integral(times, values); }, sink);
    report("trapezoid_integral", n, par_ms, ser_ms, std::abs(a - b));
  }
  {
    Eigen::VectorXd a = kernels::node_costs(cost, X.bottomRows(1), U);
    Eigen::VectorXd b = kernels::reference::node_costs(cost, X.bottomRows(1), U);
    double par_ms = best_of(
        reps, [&] { return kernels::node_costs(cost, X.bottomRows(1), U).sum(); }, sink);
    double ser_ms = best_of(
        reps, [&] { return kernels::reference::node_costs(cost, X.bottomRows(1), U).sum(); },
        sink);
    report("node_costs", n, par_ms, ser_ms, (a - b).cwiseAbs().maxCoeff());
  }
  {
    Eigen::VectorXd a = kernels::deviation_norms(X.bottomRows(1), U, v_ref, u_ref);
    Eigen::VectorXd b = kernels::reference::deviation_norms(X.bottomRows(1), U, v_ref, u_ref);
    double par_ms = best_of(
        reps, [&] { return kernels::deviation_norms(X.bottomRows(1), U, v_ref, u_ref).sum(); },
        sink);
    double ser_ms = best_of(
        reps,
        [&] { return kernels::reference::deviation_norms(X.bottomRows(1), U, v_ref, u_ref).sum(); },
        sink);
    report("deviation_norms", n, par_ms, ser_ms, (a - b).cwiseAbs().maxCoeff());
  }
  {
    Eigen::VectorXd a = kernels::collocation_defects(*model, times, X, U);
    Eigen::VectorXd b = kernels::reference::collocation_defects(*model, times, X, U);
    double par_ms = best_of(
        reps, [&] { return kernels::collocation_defects(*model, times, X, U).sum(); }, sink);
    double ser_ms = best_of(
        reps, [&] { return kernels::reference::collocation_defects(*model, times, X, U).sum(); },
        sink);
    report("collocation_defects", n, par_ms, ser_ms, (a - b).cwiseAbs().maxCoeff());
  }
  {
    double eps = 0.5;
    double a = kernels::exceedance_measure(times, d, eps);
    double b = kernels::reference::exceedance_measure(times, d, eps);
    double par_ms =
        best_of(reps, [&] { return kernels::exceedance_measure(times, d, eps); }, sink);
    double ser_ms = best_of(
        reps, [&] { return kernels::reference::exceedance_measure(times, d, eps); }, sink);
    report("exceedance_measure", n, par_ms, ser_ms, std::abs(a - b));
  }

  return sink == 12345.6789 ? 1 : 0;
}
