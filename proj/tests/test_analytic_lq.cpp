#include <Eigen/Core>
#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "doctest.h"
#include "turnpike/analytic_lq.hpp"

using namespace turnpike;

namespace {

double entrywise_rel(const Eigen::Matrix4d& a, const Eigen::Matrix4d& b) {
  double worst = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      worst = std::max(worst, std::abs(a(i, j) - b(i, j)) / std::max(1.0, std::abs(b(i, j))));
  return worst;
}

}  // namespace

TEST_CASE("state-adjoint coefficient matrix") {
  const Eigen::Matrix4d H = hamiltonian_matrix();
  Eigen::Matrix4d expected;
  expected << 0, 1, 0, 0,  //
      0, 0, 0, -1,         //
      0, 0, 0, 0,          //
      0, -1, -1, 0;
  CHECK((H - expected).cwiseAbs().maxCoeff() == 0.0);

  SUBCASE("characteristic polynomial is s^4 - s^2") {
    // Faddeev-LeVerrier recursion; exact in floating point for this matrix.
    Eigen::Matrix4d M = Eigen::Matrix4d::Identity();
    double coeff[5];
    coeff[0] = 1.0;
    for (int k = 1; k <= 4; ++k) {
      M = H * M;
      coeff[k] = -M.trace() / k;
      M += coeff[k] * Eigen::Matrix4d::Identity();
    }
    CHECK(coeff[0] == 1.0);
    CHECK(coeff[1] == 0.0);
    CHECK(coeff[2] == -1.0);
    CHECK(coeff[3] == 0.0);
    CHECK(coeff[4] == 0.0);
  }
}

TEST_CASE("transition matrix") {
  SUBCASE("identity at t = 0") {
    CHECK((transition_matrix(0.0) - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("matches the matrix exponential entrywise") {
    for (double t : {0.1, 1.0, 5.0, 20.0, -3.0}) {
      const Eigen::Matrix4d oracle = (hamiltonian_matrix() * t).exp();
      CHECK(entrywise_rel(transition_matrix(t), oracle) < 1e-12);
    }
  }
  SUBCASE("semigroup property") {
    const Eigen::Matrix4d whole = transition_matrix(7.3);
    const Eigen::Matrix4d split = transition_matrix(4.1) * transition_matrix(3.2);
    CHECK(entrywise_rel(whole, split) < 1e-12);
  }
  SUBCASE("time derivative equals H * Phi") {
    const double t = 2.4, h = 1e-6;
    const Eigen::Matrix4d fd = (transition_matrix(t + h) - transition_matrix(t - h)) / (2.0 * h);
    const Eigen::Matrix4d exact = hamiltonian_matrix() * transition_matrix(t);
    CHECK(entrywise_rel(fd, exact) < 1e-6);
  }
  SUBCASE("overflow guard") {
    CHECK_NOTHROW(transition_matrix(700.0));
    CHECK_THROWS_AS(transition_matrix(700.5), OverflowError);
    CHECK_THROWS_AS(transition_matrix(-701.0), OverflowError);
    CHECK_THROWS_AS(transition_matrix(std::nan("")), ContractError);
  }
}

TEST_CASE("adjoint initialization for the rest-to-rest transfer") {
  // 5 units in 20 seconds starting and ending at rest.
  const CostateInit init = solve_costates(0.0, 0.0, 5.0, 0.0, 20.0);
  CHECK(init.lambda1_0 == doctest::Approx(-0.277777777650546073009).epsilon(1e-13));
  CHECK(init.lambda2_0 == doctest::Approx(-0.277777776505460730095).epsilon(1e-13));
  CHECK(init.q_tilde == 5.0);

  SUBCASE("optimal velocity at the midpoint") {
    const AnalyticPoint p = eval_optimal(init, 0.0, 0.0, 10.0);
    CHECK(p.v == doctest::Approx(0.277752555467408231951).epsilon(1e-13));
    CHECK(p.q == doctest::Approx(2.5).epsilon(1e-13));  // symmetric transfer
  }
  SUBCASE("boundary states are reproduced to machine precision") {
    const AnalyticPoint a = eval_optimal(init, 0.0, 0.0, 0.0);
    CHECK(a.q == 0.0);
    CHECK(a.v == 0.0);
    const AnalyticPoint b = eval_optimal(init, 0.0, 0.0, 20.0);
    CHECK(std::abs(b.q - 5.0) < 1e-12);
    CHECK(std::abs(b.v) < 1e-12);
  }
  SUBCASE("control is the negated second adjoint") {
    for (double t : {0.0, 3.7, 10.0, 20.0}) {
      const AnalyticPoint p = eval_optimal(init, 0.0, 0.0, t);
      CHECK(p.u == -p.lambda2);
    }
  }
}

TEST_CASE("adjoint initialization with moving boundary velocities") {
  const CostateInit init = solve_costates(0.0, 3.0, 5.0, 6.0, 20.0);
  CHECK(init.lambda1_0 == doctest::Approx(0.222222220059283241161).epsilon(1e-13));
  CHECK(init.lambda2_0 == doctest::Approx(3.22222219440937153155).epsilon(1e-13));

  const AnalyticPoint mid = eval_optimal(init, 0.0, 3.0, 10.0);
  CHECK(mid.v == doctest::Approx(-0.221793442945939943175).epsilon(1e-12));
  const AnalyticPoint early = eval_optimal(init, 0.0, 3.0, 0.5);
  CHECK(early.v == doctest::Approx(1.73215436218002867267).epsilon(1e-13));
  CHECK(early.q == doctest::Approx(1.15673454442997302436).epsilon(1e-13));

  SUBCASE("first adjoint is constant and the second obeys its ODE") {
    const double h = 1e-5;
    for (double t : {0.5, 7.0, 16.0}) {
      const AnalyticPoint p = eval_optimal(init, 0.0, 3.0, t);
      CHECK(p.lambda1 == init.lambda1_0);
      const AnalyticPoint plus = eval_optimal(init, 0.0, 3.0, t + h);
      const AnalyticPoint minus = eval_optimal(init, 0.0, 3.0, t - h);
      const double lam2_dot = (plus.lambda2 - minus.lambda2) / (2.0 * h);
      CHECK(lam2_dot == doctest::Approx(-p.v - p.lambda1).epsilon(1e-6));
    }
  }
  SUBCASE("final adjoint collects the transfer distance") {
    // Integrating the adjoint ODE gives
    //   lambda2(T) = lambda2(0) - q_tilde - T lambda1(0).
    const AnalyticPoint end = eval_optimal(init, 0.0, 3.0, 20.0);
    const double predicted = init.lambda2_0 - init.q_tilde - init.T * init.lambda1_0;
    CHECK(end.lambda2 == doctest::Approx(predicted).epsilon(1e-12));
    CHECK(end.lambda2 == doctest::Approx(-6.22222220677629329168).epsilon(1e-13));
  }
}

TEST_CASE("boundary reproduction across the horizon range") {
  // Large horizons exercise the rescaled hyperbolic forms (shift kicks in
  // above T = 30); boundaries must hold without any loss of digits.
  for (double T : {0.3, 2.7, 13.9, 47.5, 120.0, 300.0, 650.0}) {
    const CostateInit init = solve_costates(-2.0, 1.5, 7.0, -0.5, T);
    const AnalyticPoint start = eval_optimal(init, -2.0, 1.5, 0.0);
    const AnalyticPoint end = eval_optimal(init, -2.0, 1.5, T);
    CHECK(std::abs(start.q + 2.0) < 1e-10);
    CHECK(std::abs(start.v - 1.5) < 1e-10);
    CHECK(std::abs(end.q - 7.0) < 1e-10);
    CHECK(std::abs(end.v + 0.5) < 1e-10);
  }
}

TEST_CASE("analytic domain errors") {
  CHECK_THROWS_AS(solve_costates(0, 0, 5, 0, 0.0), ContractError);
  CHECK_THROWS_AS(solve_costates(0, 0, 5, 0, -1.0), ContractError);
  CHECK_THROWS_AS(solve_costates(0, 0, 5, 0, 701.0), OverflowError);
  CHECK_THROWS_AS(solve_costates(0, std::nan(""), 5, 0, 1.0), ContractError);

  const CostateInit init = solve_costates(0.0, 0.0, 5.0, 0.0, 20.0);
  CHECK_THROWS_AS(eval_optimal(init, 0.0, 0.0, -0.1), RangeError);
  CHECK_THROWS_AS(eval_optimal(init, 0.0, 0.0, 20.1), RangeError);
  CHECK_THROWS_AS(eval_optimal(init, 0.0, 1.0, 5.0), ContractError);  // v0 mismatch
  CHECK_THROWS_AS(sample_optimal(init, 0.0, 1), ContractError);
}

TEST_CASE("sampled optimal trajectory") {
  const CostateInit init = solve_costates(0.0, 0.0, 5.0, 0.0, 20.0);
  const Trajectory traj = sample_optimal(init, 0.0, 201);
  CHECK_NOTHROW(traj.validate());
  CHECK(traj.node_count() == 201);
  CHECK(traj.times(0) == 0.0);
  CHECK(traj.times(200) == 20.0);
  REQUIRE(traj.costates.has_value());
  CHECK((*traj.costates)[0].size() == 2);

  // Nodes agree with pointwise evaluation.
  for (Eigen::Index k : {Eigen::Index(0), Eigen::Index(57), Eigen::Index(200)}) {
    const AnalyticPoint p = eval_optimal(init, 0.0, 0.0, traj.times(k));
    CHECK(traj.states[k].q(0) == p.q);
    CHECK(traj.states[k].v(0) == p.v);
    CHECK(traj.controls[k](0) == p.u);
    CHECK((*traj.costates)[k](1) == p.lambda2);
  }
}

TEST_CASE("rest-to-rest peak ratios match high-precision references") {
  struct Row {
    double T, rv, ru;
  };
  // Reference values computed at 50-digit precision from the hyperbolic
  // closed form. Rows cover the series branch of the reduced denominator
  // (T < 0.3), the direct branch, and points straddling the switch.
  const Row rows[] = {
      {0.02, 1.49999750001309517163, 300.001999994285739682},
      {0.04, 1.49999000020951955564, 150.003999954286526969},
      {0.0499, 1.49998443794493670327, 120.245470873175232364},
      {0.0501, 1.49998431295312087037, 119.765488952096171935},
      {0.2999, 1.49943853624568825237, 20.0366396424276906048},
      {0.3001, 1.49943778801052166619, 20.0233262691056341866},
      {0.5, 1.4984425991503243266, 12.0499109615590115213},
      {1.0, 1.49383081949191712697, 6.09929355660768976445},
      {2.0, 1.47624622100627987825, 3.19452804946532511362},
      {5.0, 1.38254373463375989528, 1.6298130360064540778},
      {10.0, 1.23312790653397223484, 1.24985813488049192696},
      {20.0, 1.11101022186963292781, 1.11111110602184292038},
      {40.0, 1.0526315746080976365, 1.05263157894736841164},
      {80.0, 1.02564102564102563231, 1.02564102564102566095},
  };
  for (const Row& r : rows) {
    CHECK(rest_velocity_ratio(r.T) == doctest::Approx(r.rv).epsilon(5e-13));
    CHECK(rest_control_ratio(r.T) == doctest::Approx(r.ru).epsilon(5e-13));
  }

  SUBCASE("short-horizon limits") {
    CHECK(rest_velocity_ratio(1e-6) == doctest::Approx(1.5).epsilon(1e-9));
    // u peaks like 6 q_tilde / T^2, so the scale-free ratio grows as 6/T.
    CHECK(rest_control_ratio(1e-4) == doctest::Approx(6e4).epsilon(1e-6));
  }
  SUBCASE("velocity ratio decays monotonically toward 1") {
    double prev = rest_velocity_ratio(0.25);
    for (double T : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 64.0, 256.0, 640.0}) {
      const double cur = rest_velocity_ratio(T);
      CHECK(cur < prev);
      CHECK(cur > 1.0);
      prev = cur;
    }
  }
  SUBCASE("domain") {
    CHECK_THROWS_AS(rest_velocity_ratio(0.0), ContractError);
    CHECK_THROWS_AS(rest_control_ratio(-2.0), ContractError);
    CHECK_THROWS_AS(rest_velocity_ratio(701.0), OverflowError);
  }
}

TEST_CASE("horizon sweep certificate") {
  const std::vector<double> grid = {0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 40.0, 80.0};
  const HyperbolicCertificate cert = hyperbolic_certificate(5.0, grid);
  REQUIRE(cert.entries.size() == grid.size());
  CHECK(cert.q_tilde == 5.0);
  CHECK(cert.velocity_bound_ok);
  // Constants are tightest at the shortest horizon.
  CHECK(cert.velocity_constant == doctest::Approx(1.4984425991503243266).epsilon(1e-12));
  CHECK(cert.control_constant == doctest::Approx(12.0499109615590115213).epsilon(1e-12));

  for (std::size_t i = 0; i < grid.size(); ++i) {
    const HorizonCertificate& e = cert.entries[i];
    CHECK(e.T == grid[i]);
    CHECK(e.velocity_ratio == doctest::Approx(rest_velocity_ratio(grid[i])).epsilon(1e-14));
    CHECK(e.control_ratio == doctest::Approx(rest_control_ratio(grid[i])).epsilon(1e-14));
    CHECK(e.max_v == doctest::Approx(5.0 * e.velocity_ratio / e.T).epsilon(1e-14));
    CHECK(e.peak_at_midpoint);
    CHECK(e.control_peak_at_ends);
    CHECK(e.velocity_ratio <= 1.5);
  }

  SUBCASE("zero transfer distance degenerates cleanly") {
    const HyperbolicCertificate zero = hyperbolic_certificate(0.0, {1.0, 10.0});
    CHECK(zero.velocity_bound_ok);
    CHECK(zero.velocity_constant == 0.0);
    CHECK(zero.control_constant == 0.0);
    for (const HorizonCertificate& e : zero.entries) {
      CHECK(e.max_v == 0.0);
      CHECK(e.max_u == 0.0);
    }
  }
  SUBCASE("negative transfers share the magnitudes") {
    const HyperbolicCertificate neg = hyperbolic_certificate(-5.0, {2.0});
    CHECK(neg.entries[0].max_v == doctest::Approx(cert.entries[2].max_v).epsilon(1e-14));
  }
  SUBCASE("grid validation") {
    CHECK_THROWS_AS(hyperbolic_certificate(5.0, {}), ContractError);
    CHECK_THROWS_AS(hyperbolic_certificate(5.0, {1.0, -1.0}), ContractError);
    CHECK_THROWS_AS(hyperbolic_certificate(5.0, {1.0, 800.0}), OverflowError);
  }
}
