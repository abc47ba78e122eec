#include <Eigen/Core>
#include <cmath>

#include "doctest.h"
#include "turnpike/symmetry.hpp"

using namespace turnpike;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

double max_abs(const Eigen::VectorXd& x) { return x.cwiseAbs().maxCoeff(); }

// 1-d system whose acceleration u^2 + 1 never vanishes; no steady state.
class NoRest final : public Model {
 public:
  NoRest() : Model(false) {}
  const std::string& name() const override {
    static const std::string id = "no_rest";
    return id;
  }
  Eigen::Index config_dim() const override { return 1; }
  Eigen::Index control_dim() const override { return 1; }
  Eigen::VectorXd accel(const Eigen::VectorXd&, const Eigen::VectorXd&,
                        const Eigen::VectorXd& u) const override {
    return Eigen::VectorXd::Constant(1, u(0) * u(0) + 1.0);
  }
  void accel_jacobians(const Eigen::VectorXd&, const Eigen::VectorXd&, const Eigen::VectorXd& u,
                       Eigen::MatrixXd& dq, Eigen::MatrixXd& dv,
                       Eigen::MatrixXd& du) const override {
    dq = Eigen::MatrixXd::Zero(1, 1);
    dv = Eigen::MatrixXd::Zero(1, 1);
    du = Eigen::MatrixXd::Constant(1, 1, 2.0 * u(0));
  }
};

}  // namespace

TEST_CASE("translation group laws") {
  TranslationAction act(3, 2);
  const Eigen::VectorXd g = vec({1.5, -0.5});
  const Eigen::VectorXd h = vec({0.25, 2.0});

  CHECK(max_abs(act.compose(g, act.inverse(g)) - act.identity()) < 1e-15);
  CHECK(max_abs(act.compose(act.identity(), g) - g) < 1e-15);
  CHECK(max_abs(act.compose(g, h) - act.compose(h, g)) < 1e-15);  // abelian
  CHECK_THROWS_AS(act.compose(g, vec({1.0})), ContractError);
  CHECK_THROWS_AS(TranslationAction(2, 3), ContractError);

  SUBCASE("action shifts only the translated configuration block") {
    const State x(vec({1.0, 2.0, 3.0}), vec({4.0, 5.0, 6.0}));
    const State y = act.act(g, x);
    CHECK(y.q(0) == 2.5);
    CHECK(y.q(1) == 1.5);
    CHECK(y.q(2) == 3.0);
    CHECK(max_abs(y.v - x.v) == 0.0);
  }
}

TEST_CASE("planar group laws") {
  PlanarAction act;
  const Eigen::VectorXd g = vec({1.0, -2.0, 0.7});
  const Eigen::VectorXd h = vec({0.3, 0.4, -1.2});
  const Eigen::VectorXd k = vec({-0.8, 0.1, 2.5});

  CHECK(max_abs(act.compose(g, act.inverse(g)) - act.identity()) < 1e-15);
  CHECK(max_abs(act.compose(act.inverse(g), g) - act.identity()) < 1e-15);
  const Eigen::VectorXd left = act.compose(act.compose(g, h), k);
  const Eigen::VectorXd right = act.compose(g, act.compose(h, k));
  CHECK(max_abs(left - right) < 1e-12);

  SUBCASE("quarter turn maps body x to world y") {
    const Eigen::VectorXd q = vec({1.0, 2.0, M_PI / 2.0});
    const State x(vec({1.0, 0.0, 0.3}), vec({0.5, 0.0, 0.9}));
    const State y = act.act(q, x);
    CHECK(y.q(0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(y.q(1) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(y.q(2) == doctest::Approx(0.3 + M_PI / 2.0).epsilon(1e-14));
    CHECK(y.v(0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
    CHECK(y.v(1) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(y.v(2) == 0.9);
  }
}

TEST_CASE("group exponential generates a one-parameter subgroup") {
  PlanarAction planar;
  const Eigen::VectorXd xi = vec({0.8, -0.3, 1.7});
  for (double s : {0.2, 1.0, -0.6}) {
    for (double t : {0.5, 2.0}) {
      const Eigen::VectorXd whole = planar.exp(xi, s + t);
      const Eigen::VectorXd split = planar.compose(planar.exp(xi, s), planar.exp(xi, t));
      CHECK(max_abs(whole - split) < 1e-12);
    }
  }

  SUBCASE("half turn at unit speed lands at diameter 2/pi") {
    const Eigen::VectorXd g = planar.exp(vec({1.0, 0.0, M_PI}), 1.0);
    CHECK(g(0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
    CHECK(g(1) == doctest::Approx(2.0 / M_PI).epsilon(1e-14));
    CHECK(g(2) == doctest::Approx(M_PI).epsilon(1e-15));
  }
  SUBCASE("small rotation matches the direct formula") {
    // Straddles the series/trig switch at |alpha| = 1e-4.
    for (double w : {1e-5, 5e-5, 2e-4, 1e-3}) {
      const Eigen::VectorXd a = planar.exp(vec({1.0, 1.0, w}), 1.0);
      const Eigen::VectorXd b = planar.exp(vec({1.0, 1.0, w}), 0.5);
      CHECK(max_abs(a - planar.compose(b, b)) < 1e-13);
    }
  }
  SUBCASE("translation exponential is linear in time") {
    TranslationAction trans(2, 2);
    CHECK(max_abs(trans.exp(vec({3.0, -1.0}), 0.25) - vec({0.75, -0.25})) == 0.0);
  }
}

TEST_CASE("built-in models are equivariant under their default actions") {
  SUBCASE("point mass under translation") {
    auto model = make_model("double_integrator");
    auto action = default_action(*model);
    CHECK(action->kind() == SymmetryAction::Kind::Translation);
    const State x0(vec({0.4}), vec({-0.2}));
    const auto u = [](double t) { return Eigen::VectorXd::Constant(1, std::sin(t)); };
    const double gap = check_equivariance(*model, *action, vec({7.5}), x0, u, 3.0, 61);
    CHECK(gap < 1e-8);
  }
  SUBCASE("hovercraft under planar motions") {
    auto model = make_model("hovercraft", 0.5);
    auto action = default_action(*model);
    CHECK(action->kind() == SymmetryAction::Kind::Planar);
    const State x0(vec({0.2, -0.1, 0.4}), vec({0.1, 0.3, -0.2}));
    const auto u = [](double t) {
      return Eigen::VectorXd(vec({std::cos(t), 0.5 * std::sin(2.0 * t)}));
    };
    const Eigen::VectorXd g = vec({1.2, -0.7, 2.1});
    const double gap = check_equivariance(*model, *action, g, x0, u, 3.0, 61);
    CHECK(gap < 1e-8);
  }
}

TEST_CASE("trim orbits through a state") {
  auto di = make_model("double_integrator");
  auto hc = make_model("hovercraft", 0.5);
  TranslationAction di_act(1, 1);
  PlanarAction planar;

  SUBCASE("pure drift for the point mass") {
    const State x0(vec({2.0}), vec({0.7}));
    const auto trim = trim_through(*di, di_act, x0);
    REQUIRE(trim.has_value());
    CHECK(trim->xi(0) == 0.7);
    CHECK(max_abs(trim->u_bar) == 0.0);
    const State later = trim_flow(di_act, *trim, 3.0);
    CHECK(later.q(0) == doctest::Approx(2.0 + 0.7 * 3.0).epsilon(1e-15));
    CHECK(later.v(0) == 0.7);
    CHECK(trim_defect(*di, di_act, *trim, 5.0, 51) < 1e-11);
  }
  SUBCASE("hovercraft drift") {
    const State x0(vec({1.0, -2.0, 0.6}), vec({0.4, -0.3, 0.0}));
    const auto trim = trim_through(*hc, planar, x0);
    REQUIRE(trim.has_value());
    CHECK(max_abs(trim->xi - vec({0.4, -0.3, 0.0})) == 0.0);
    CHECK(trim_defect(*hc, planar, *trim, 4.0, 81) < 1e-11);
  }
  SUBCASE("hovercraft in-place spin pivots about its own position") {
    const State x0(vec({2.0, 1.0, 0.5}), vec({0.0, 0.0, 0.7}));
    const auto trim = trim_through(*hc, planar, x0);
    REQUIRE(trim.has_value());
    const State later = trim_flow(planar, *trim, 1.3);
    CHECK(later.q(0) == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(later.q(1) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(later.q(2) == doctest::Approx(0.5 + 0.7 * 1.3).epsilon(1e-14));
    CHECK(trim_defect(*hc, planar, *trim, 4.0, 81) < 1e-11);
  }
  SUBCASE("simultaneous spin and drift admits no coasting orbit") {
    const State x0(vec({0.0, 0.0, 0.0}), vec({0.5, 0.0, 0.7}));
    CHECK_FALSE(trim_through(*hc, planar, x0).has_value());
  }
  SUBCASE("velocity outside the translated block admits no orbit") {
    TranslationAction partial(3, 2);
    const State moving(vec({0.0, 0.0, 0.0}), vec({0.4, -0.3, 0.1}));
    CHECK_FALSE(trim_through(*hc, partial, moving).has_value());
    const State flat(vec({0.0, 0.0, 0.0}), vec({0.4, -0.3, 0.0}));
    CHECK(trim_through(*hc, partial, flat).has_value());
  }
  SUBCASE("dimension mismatch is rejected") {
    const State x0(vec({0.0}), vec({0.0}));
    CHECK_THROWS_AS(trim_through(*hc, planar, x0), ContractError);
  }
}

TEST_CASE("velocity steady states") {
  auto di = make_model("double_integrator");
  auto hc = make_model("hovercraft", 0.5);

  SUBCASE("both built-in models coast with zero control") {
    const auto a = find_velocity_steady_state(*di, vec({0.25}));
    CHECK(max_abs(a.u_bar) == 0.0);
    CHECK(a.residual == 0.0);
    const auto b = find_velocity_steady_state(*hc, vec({0.3, -0.2, 0.0}));
    CHECK(max_abs(b.u_bar) == 0.0);
    CHECK(b.residual == 0.0);
  }
  SUBCASE("input validation") {
    CHECK_THROWS_AS(find_velocity_steady_state(*di, vec({0.1, 0.2})), ContractError);
    CHECK_THROWS_AS(find_velocity_steady_state(*di, vec({0.1}), std::vector<Eigen::VectorXd>{}),
                    ContractError);
  }
  SUBCASE("unreachable steady state reports a root-find failure") {
    NoRest model;
    CHECK_THROWS_AS(find_velocity_steady_state(model, vec({0.0})), RootFindError);
  }
}

TEST_CASE("optimal velocity steady state") {
  auto di = make_model("double_integrator");
  StageCost cost;
  cost.w_v = vec({1.0});
  cost.w_u = vec({1.0});
  Box box;
  box.lo = vec({-1.0});
  box.hi = vec({1.0});

  SUBCASE("interior optimum sits at the reference velocity") {
    cost.v_ref = vec({0.3});
    const auto ss = optimal_velocity_steady_state(*di, cost, box);
    CHECK(std::abs(ss.v_bar(0) - 0.3) < 1e-9);
    CHECK(max_abs(ss.u_bar) == 0.0);
    CHECK(ss.residual < 1e-12);
    CHECK_FALSE(ss.degenerate);
  }
  SUBCASE("optimum clamps to the box") {
    cost.v_ref = vec({0.3});
    box.hi = vec({0.2});
    const auto ss = optimal_velocity_steady_state(*di, cost, box);
    CHECK(std::abs(ss.v_bar(0) - 0.2) < 1e-12);
    CHECK_FALSE(ss.degenerate);
  }
  SUBCASE("flat velocity cost is flagged degenerate with minimum norm") {
    cost.w_v = vec({0.0});
    const auto ss = optimal_velocity_steady_state(*di, cost, box);
    CHECK(ss.degenerate);
    CHECK(std::abs(ss.v_bar(0)) < 1e-12);

    box.lo = vec({0.1});
    box.hi = vec({0.5});
    const auto shifted = optimal_velocity_steady_state(*di, cost, box);
    CHECK(shifted.degenerate);
    CHECK(shifted.v_bar(0) == doctest::Approx(0.1).epsilon(1e-12));
  }
  SUBCASE("hovercraft optimum with a velocity reference") {
    auto hc = make_model("hovercraft", 0.5);
    StageCost c3;
    c3.w_v = vec({1.0, 2.0, 1.0});
    c3.w_u = vec({1.0, 1.0});
    c3.v_ref = vec({0.25, -0.1, 0.0});
    Box b3;
    b3.lo = vec({-1.0, -1.0, -1.0});
    b3.hi = vec({1.0, 1.0, 1.0});
    const auto ss = optimal_velocity_steady_state(*hc, c3, b3);
    CHECK(max_abs(ss.v_bar - c3.v_ref) < 1e-9);
    CHECK(ss.residual < 1e-12);
    CHECK_FALSE(ss.degenerate);
  }
  SUBCASE("search box must be compact and well formed") {
    Box open_box;
    open_box.lo = vec({-1.0});
    open_box.hi = vec({std::numeric_limits<double>::infinity()});
    CHECK_THROWS_AS(optimal_velocity_steady_state(*di, cost, open_box), ContractError);
    Box empty_box;
    empty_box.lo = vec({1.0});
    empty_box.hi = vec({-1.0});
    CHECK_THROWS_AS(optimal_velocity_steady_state(*di, cost, empty_box), ContractError);
  }
}

TEST_CASE("configuration samples cover model dependence") {
  auto di = make_model("double_integrator");
  auto hc = make_model("hovercraft", 0.5);
  CHECK(default_config_samples(*di).size() == 1);
  const auto samples = default_config_samples(*hc);
  CHECK(samples.size() >= 3);
  // Heading varies across samples; that is the only coordinate accel sees.
  CHECK(samples.front()(2) != samples.back()(2));
}

TEST_CASE("lifted action free function forwards to the action") {
  PlanarAction planar;
  const State x(vec({1.0, 0.0, 0.0}), vec({0.0, 0.0, 0.0}));
  const Eigen::VectorXd g = vec({0.0, 0.0, M_PI});
  const State via_method = planar.act(g, x);
  const State via_free = act_lifted(planar, g, x);
  CHECK(max_abs(via_method.q - via_free.q) == 0.0);
  CHECK(max_abs(via_method.v - via_free.v) == 0.0);
}
