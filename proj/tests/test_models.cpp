#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "resilex/engine.hpp"
#include "resilex/error.hpp"
#include "resilex/models.hpp"

using namespace resilex;

namespace {

State vec(std::initializer_list<double> v) {
  State x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double e : v) x(i++) = e;
  return x;
}

}  // namespace

TEST_CASE("third-order derivative at the origin vanishes") {
  const auto plant = third_order_model({});
  CHECK(plant->derivative(State::Zero(3), 0.0, 0.0, 0.0) == State::Zero(3));
  CHECK(plant->equilibrium() == State::Zero(3));
}

TEST_CASE("third-order derivative at the initial state under the nominal law") {
  const auto plant = third_order_model({});
  const State x0 = plant->initial_state();
  CHECK(x0 == vec({5, 2, 2}));
  const double u = plant->nominal_control(x0);
  CHECK(u == -187.0);
  const State dx = plant->derivative(x0, u, 0.0, 0.0);
  CHECK(dx(0) == 2.0);
  CHECK(dx(1) == 0.0);
  CHECK(dx(2) == -189.0);
}

TEST_CASE("third-order disturbance enters the second state through sin(0.1 x1)") {
  const auto plant = third_order_model({});
  const State x = vec({3, -1, 0.5});
  const State dx = plant->derivative(x, 0.0, 0.7, 0.0);
  CHECK(dx(1) == doctest::Approx(1 + std::sin(0.3) * 0.7 + 0.5).epsilon(1e-15));
  CHECK(plant->disturbance(2.0) == doctest::Approx(std::sin(0.4)).epsilon(1e-15));
  CHECK(plant->u_max() == 10.0);
}

TEST_CASE("nominal gains place the closed-loop characteristic polynomial at (s+3)^3") {
  const auto plant = third_order_model({});
  const auto ls = plant->linear_structure();
  REQUIRE(ls);
  const Eigen::MatrixXd Ac = ls->A + ls->B * ls->K;
  // s^3 + c2 s^2 + c1 s + c0 by Faddeev-LeVerrier.
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(3, 3);
  const double c2 = -Ac.trace();
  const Eigen::MatrixXd M2 = Ac + c2 * I;
  const double c1 = -(Ac * M2).trace() / 2.0;
  const Eigen::MatrixXd M1 = Ac * M2 + c1 * I;
  const double c0 = -(Ac * M1).trace() / 3.0;
  CHECK(std::abs(c2 - 9.0) <= 1e-8);
  CHECK(std::abs(c1 - 27.0) <= 1e-8);
  CHECK(std::abs(c0 - 27.0) <= 1e-8);
  // A triple root is ill-conditioned; the computed eigenvalues only agree to ~eps^(1/3).
  const Eigen::VectorXcd ev = Ac.eigenvalues();
  for (Eigen::Index i = 0; i < 3; ++i) CHECK(std::abs(ev(i) + 3.0) <= 1e-4);
}

TEST_CASE("derivative is side-effect free") {
  const auto plant = third_order_model({});
  const State x = vec({0.3, -2, 4});
  CHECK(plant->derivative(x, 1.5, 0.2, 3.0) == plant->derivative(x, 1.5, 0.2, 3.0));
  const auto smib = smib_model({});
  const State y = vec({1.1, 0.2, 0.9});
  CHECK(smib->derivative(y, 1.5, 0.01, 3.0) == smib->derivative(y, 1.5, 0.01, 3.0));
}

TEST_CASE("non-Hurwitz gains are rejected") {
  LinearThirdOrder p;
  p.K = {0, 0, 0};
  CHECK_THROWS_AS(third_order_model(p), Error);
  LinearThirdOrder q;
  q.u_max = 0.0;
  CHECK_THROWS_AS(third_order_model(q), Error);
}

TEST_CASE("SMIB operating point is an equilibrium of the swing equation") {
  const SmibParams p;
  const auto plant = smib_model(p);
  const double eq1 = smib::operating_point_emf(p, p.delta0);
  CHECK(smib::electrical_power(p, p.delta0, eq1) == doctest::Approx(p.P_m0).epsilon(1e-14));
  const State dx = plant->derivative(vec({p.delta0, 0.0, eq1}), 2.0, 0.0, 0.0);
  CHECK(dx(0) == 0.0);
  CHECK(std::abs(dx(1)) <= 1e-12);
  CHECK(plant->equilibrium()(2) == eq1);
}

TEST_CASE("SMIB algebraic relations are recomputed consistently") {
  const SmibParams p;
  for (double delta : {0.3, 1.0, 1.309, 2.5}) {
    for (double e : {0.5, 1.0, 1.4}) {
      const double pe1 = smib::electrical_power(p, delta, e);
      const double pe2 = smib::electrical_power(p, delta, e);
      CHECK(pe1 == pe2);
      const double eq = p.x_ds / p.x_ds1 * e - (p.x_d - p.x_d1) / p.x_ds1 * p.V_s * std::cos(delta);
      CHECK(smib::quadrature_emf(p, delta, e) == doctest::Approx(eq).epsilon(1e-14));
      CHECK(pe1 == doctest::Approx(p.V_s * eq * std::sin(delta) / p.x_ds).epsilon(1e-14));
    }
  }
}

TEST_CASE("SMIB feedback law matches the linearising expression") {
  const SmibParams p;
  const auto plant = smib_model(p);
  const State x = vec({1.0, 1.0, 1.0});
  const double d = x(0), w = x(1), e = x(2);
  const double eq = p.x_ds / p.x_ds1 * e - (p.x_d - p.x_d1) / p.x_ds1 * p.V_s * std::cos(d);
  const double pe = p.V_s * eq * std::sin(d) / p.x_ds;
  const double iq = p.V_s * std::sin(d) / p.x_ds;
  const double td01 = p.x_ds1 / p.x_ds * p.T_d0;
  const double vf = p.K[0] * (d - p.delta0) + p.K[1] * w + p.K[2] * (pe - p.P_m0) + p.P_m0;
  const double ef = (vf - (p.x_d - p.x_d1) / p.x_ds1 * td01 * iq * p.V_s * w * std::sin(d) -
                     p.V_s * td01 / p.x_ds * eq * w * std::cos(d)) /
                    iq;
  CHECK(plant->nominal_control(x) == doctest::Approx(ef).epsilon(1e-12));
  CHECK(plant->disturbance(1.0) == doctest::Approx(0.01 * std::cos(M_PI / 2)).scale(1.0));
  CHECK(plant->disturbance(0.0) == doctest::Approx(0.01));
}

TEST_CASE("SMIB law is undefined where sin(delta) vanishes") {
  const auto plant = smib_model({});
  try {
    plant->nominal_control(vec({0.0, 0.1, 1.0}));
    FAIL("expected DegenerateAngle");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DegenerateAngle);
  }
}

TEST_CASE("SMIB parameter invariants") {
  SmibParams bad;
  bad.x_ds1 = bad.x_ds + 0.1;
  CHECK_THROWS_AS(smib_model(bad), Error);
  SmibParams no_inertia;
  no_inertia.H = 0.0;
  CHECK_THROWS_AS(smib_model(no_inertia), Error);
  SmibParams no_tc;
  no_tc.T_d0 = -1.0;
  CHECK_THROWS_AS(smib_model(no_tc), Error);
}

TEST_CASE("one SMIB RK4 step agrees with a fine-grid integration") {
  const auto plant = smib_model({});
  const State x0 = plant->initial_state();
  const double u = std::clamp(plant->nominal_control(x0), -plant->u_max(), plant->u_max());
  const double w = plant->disturbance(0.0);
  const double dt = 1e-4;
  const State x1 = rk4_step(*plant, x0, u, w, 0.0, dt);
  const auto f = [&](double t, const Eigen::VectorXd& x) { return plant->derivative(x, u, w, t); };
  const Eigen::VectorXd ref = oracle::integrate(f, x0, 0.0, dt, 1000);
  CHECK((x1 - ref).cwiseAbs().maxCoeff() <= 1e-6);
}
