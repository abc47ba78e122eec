#include <Eigen/Core>
#include <cmath>

#include "doctest.h"
#include "turnpike/models.hpp"

using namespace turnpike;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

// Largest relative error between analytic Jacobians and central differences.
double jacobian_fd_error(const Model& m, const Eigen::VectorXd& q, const Eigen::VectorXd& v,
                         const Eigen::VectorXd& u) {
  Eigen::MatrixXd dq, dv, du;
  m.accel_jacobians(q, v, u, dq, dv, du);
  const double h = 1e-6;
  double worst = 0.0;
  auto column = [&](Eigen::VectorXd qq, Eigen::VectorXd vv, Eigen::VectorXd uu, int which,
                    Eigen::Index j) {
    auto bump = [&](double s) {
      Eigen::VectorXd q2 = qq, v2 = vv, u2 = uu;
      (which == 0 ? q2(j) : which == 1 ? v2(j) : u2(j)) += s;
      return m.accel(q2, v2, u2);
    };
    return Eigen::VectorXd((bump(h) - bump(-h)) / (2.0 * h));
  };
  for (Eigen::Index j = 0; j < q.size(); ++j)
    worst = std::max(worst, (column(q, v, u, 0, j) - dq.col(j)).cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < v.size(); ++j)
    worst = std::max(worst, (column(q, v, u, 1, j) - dv.col(j)).cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < u.size(); ++j)
    worst = std::max(worst, (column(q, v, u, 2, j) - du.col(j)).cwiseAbs().maxCoeff());
  return worst;
}

}  // namespace

TEST_CASE("double integrator acceleration equals the control") {
  DoubleIntegrator di;
  CHECK(di.linear());
  CHECK(di.config_dim() == 1);
  CHECK(di.control_dim() == 1);
  const Eigen::VectorXd a = di.accel(vec({3.0}), vec({-1.0}), vec({0.7}));
  CHECK(a(0) == 0.7);
  CHECK(jacobian_fd_error(di, vec({0.4}), vec({-2.0}), vec({1.3})) < 1e-8);
}

TEST_CASE("hovercraft acceleration rotates thrust into the world frame") {
  Hovercraft hc(0.5);
  CHECK_FALSE(hc.linear());
  CHECK(hc.lever_arm() == 0.5);

  // theta = pi/2: body x maps to world y.
  const Eigen::VectorXd q = vec({1.0, 2.0, M_PI / 2.0});
  const Eigen::VectorXd a = hc.accel(q, vec({0.0, 0.0, 0.0}), vec({2.0, 3.0}));
  CHECK(a(0) == doctest::Approx(-3.0).epsilon(1e-14));
  CHECK(a(1) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(a(2) == doctest::Approx(-1.5).epsilon(1e-14));

  SUBCASE("jacobians match finite differences") {
    const double err = jacobian_fd_error(hc, vec({0.3, -1.2, 0.8}), vec({0.1, 0.2, -0.4}),
                                         vec({1.5, -0.6}));
    CHECK(err < 1e-8);
  }
  SUBCASE("lever arm must be positive") {
    CHECK_THROWS_AS(Hovercraft(0.0), ContractError);
    CHECK_THROWS_AS(Hovercraft(-1.0), ContractError);
  }
  SUBCASE("argument dimensions checked") {
    CHECK_THROWS_AS(hc.accel(vec({0.0}), vec({0.0}), vec({0.0})), ContractError);
  }
}

TEST_CASE("model factory") {
  CHECK(make_model("double_integrator")->name() == "double_integrator");
  CHECK(make_model("hovercraft", 0.7)->control_dim() == 2);
  auto hc = make_model("hovercraft", 0.7);
  CHECK(dynamic_cast<const Hovercraft&>(*hc).lever_arm() == 0.7);
  CHECK_THROWS_AS(make_model("pendulum"), ContractError);
}

TEST_CASE("first-order form stacks velocity above acceleration") {
  DoubleIntegrator di;
  const Eigen::VectorXd dx = di.dynamics(vec({1.0, 3.0}), vec({-2.0}));
  CHECK(dx(0) == 3.0);
  CHECK(dx(1) == -2.0);
  CHECK_THROWS_AS(di.dynamics(vec({1.0}), vec({0.0})), ContractError);
}

TEST_CASE("rk4 integrates constant-control double integrator exactly") {
  DoubleIntegrator di;
  const auto u = [](double) { return Eigen::VectorXd::Constant(1, 0.8); };
  // q(t) = q0 + v0 t + 0.4 t^2 is cubic-free, so one RK4 step is exact.
  const Eigen::VectorXd x1 = rk4_step(di, vec({1.0, 2.0}), u, 0.0, 0.5);
  CHECK(x1(0) == doctest::Approx(1.0 + 2.0 * 0.5 + 0.4 * 0.25).epsilon(1e-15));
  CHECK(x1(1) == doctest::Approx(2.0 + 0.8 * 0.5).epsilon(1e-15));
}

TEST_CASE("hovercraft integration matches the circular-thrust closed form") {
  // Unit forward thrust with unit spin rate: theta = t and
  //   v_x = sin t, v_y = 1 - cos t, x = 1 - cos t, y = t - sin t.
  Hovercraft hc(0.5);
  const State x0(vec({0.0, 0.0, 0.0}), vec({0.0, 0.0, 1.0}));
  const auto u = [](double) { return Eigen::VectorXd(vec({1.0, 0.0})); };
  const double T = 2.0;

  auto max_error = [&](int nodes) {
    const Trajectory traj = simulate(hc, x0, u, T, nodes);
    double worst = 0.0;
    for (Eigen::Index k = 0; k < traj.node_count(); ++k) {
      const double t = traj.times(k);
      const Eigen::VectorXd q_exact = vec({1.0 - std::cos(t), t - std::sin(t), t});
      const Eigen::VectorXd v_exact = vec({std::sin(t), 1.0 - std::cos(t), 1.0});
      worst = std::max(worst, (traj.states[k].q - q_exact).cwiseAbs().maxCoeff());
      worst = std::max(worst, (traj.states[k].v - v_exact).cwiseAbs().maxCoeff());
    }
    return worst;
  };

  const double e1 = max_error(21);
  const double e2 = max_error(41);
  CHECK(e1 < 1e-6);
  // Fourth-order method: halving h divides the error by about 16.
  CHECK(e1 / e2 > 12.0);
  CHECK(e1 / e2 < 20.0);
}

TEST_CASE("simulate grid and control sampling semantics") {
  DoubleIntegrator di;
  const State x0(vec({0.0}), vec({1.0}));
  const auto u = [](double t) { return Eigen::VectorXd::Constant(1, t); };
  const Trajectory traj = simulate(di, x0, u, 3.0, 4);

  CHECK(traj.node_count() == 4);
  CHECK(traj.times(0) == 0.0);
  CHECK(traj.times(3) == 3.0);
  CHECK(traj.times(1) == doctest::Approx(1.0).epsilon(1e-15));
  // Stored controls are the signal at the nodes, not interval averages.
  CHECK(traj.controls[2](0) == doctest::Approx(2.0).epsilon(1e-15));

  SUBCASE("validation of the inputs") {
    CHECK_THROWS_AS(simulate(di, x0, u, -1.0, 4), ContractError);
    CHECK_THROWS_AS(simulate(di, x0, u, 1.0, 1), ContractError);
    const State bad(vec({0.0, 0.0}), vec({0.0, 0.0}));
    CHECK_THROWS_AS(simulate(di, bad, u, 1.0, 4), ContractError);
  }
  SUBCASE("divergence is detected") {
    const auto huge = [](double) { return Eigen::VectorXd::Constant(1, 1e13); };
    CHECK_THROWS_AS(simulate(di, x0, huge, 10.0, 11), DivergenceError);
    const auto nan = [](double) { return Eigen::VectorXd::Constant(1, std::nan("")); };
    CHECK_THROWS_AS(simulate(di, x0, nan, 1.0, 3), DivergenceError);
  }
}
