#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "rsf/model.hpp"

using namespace rsf;

TEST_CASE("slip rate inverts the friction law") {
  RsfParams p;
  CHECK(slip_rate(0.6, 20.0, p) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(slip_rate(0.6 + 0.011 * std::log(2.0), 20.0, p) == doctest::Approx(2.0).epsilon(1e-14));

  // extended-precision oracle for the generic case
  long double mu = 0.61L, mu0 = 0.6L, A = 0.011L;
  long double expected = expl((mu - mu0) / A);
  CHECK(slip_rate(0.61, 20.0, p) ==
        doctest::Approx(double(expected)).epsilon(1e-14));
  CHECK(slip_rate(0.61, 20.0, p) == doctest::Approx(2.482).epsilon(1e-3));
}

TEST_CASE("slip rate domain errors") {
  RsfParams p;
  CHECK_THROWS_AS(slip_rate(0.6, 0.0, p), ModelDomainError);
  CHECK_THROWS_AS(slip_rate(0.6, -1.0, p), ModelDomainError);
  // exp overflow: mu - mu0 = 20 with A = 0.011 gives exp(1818)
  CHECK_THROWS_AS(slip_rate(20.6, 20.0, p), ModelDomainError);
}

TEST_CASE("state rates") {
  StateRates r = state_rates(20.0, 1.0, 20.0);
  CHECK(r.dtheta == 0.0);
  CHECK(r.ddtheta == 0.0);

  r = state_rates(10.0, 1.0, 20.0);
  CHECK(r.dtheta == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(r.ddtheta == doctest::Approx(-0.025).epsilon(1e-15));

  r = state_rates(40.0, 2.0, 20.0);
  CHECK(r.dtheta == doctest::Approx(-3.0).epsilon(1e-15));
  CHECK(r.ddtheta == doctest::Approx(0.3).epsilon(1e-15));
}

TEST_CASE("friction rates") {
  RsfParams p;
  FrictionRates r = friction_rates(1.5, 0.2, 1.5, 0.2, 0.2, p);
  // v_l = v and dv_l = dv: spring term vanishes, damping survives
  CHECK(r.dmu == doctest::Approx(-p.k_dprime * 0.2).epsilon(1e-15));

  p.k_dprime = 0.0;
  r = friction_rates(2.0, 0.0, 1.0, 0.0, 0.0, p);
  CHECK(r.dmu == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(r.ddmu == 0.0);

  p.k_dprime = 1e-7;
  r = friction_rates(1.0, 0.0, 1.0, 100.0, 0.0, p);
  CHECK(r.dmu == doctest::Approx(-1e-5).epsilon(1e-15));
}

TEST_CASE("slip acceleration rates") {
  RsfParams p;
  AccelRates r = slip_accel_rates(1.0, 0.0, 20.0, 0.0, 0.0, 0.0, 0.0, p);
  CHECK(r.dv == 0.0);
  CHECK(r.da == 0.0);

  r = slip_accel_rates(1.0, 0.0, 20.0, 0.0, 0.0, 0.011, 0.0, p);
  CHECK(r.dv == doctest::Approx(1.0).epsilon(1e-15));

  r = slip_accel_rates(1.0, 0.0, 20.0, 0.5, 0.0, 0.0, 0.0, p);
  CHECK(r.dv == doctest::Approx(-(1.0 / 0.011) * (0.014 / 20.0) * 0.5).epsilon(1e-14));
  CHECK(r.dv == doctest::Approx(-0.031818).epsilon(1e-4));
}

TEST_CASE("slip acceleration full form") {
  RsfParams p;
  double v = 1.0, dv = 2.0, theta = 20.0, dtheta = 0.5, ddtheta = -0.025;
  double dmu = 0.003, ddmu = 0.01;
  AccelRates r = slip_accel_rates(v, dv, theta, dtheta, ddtheta, dmu, ddmu, p);
  double A = p.a_coef, B = p.b_coef;
  double dv_out = (v / A) * (dmu - (B / theta) * dtheta);
  double da = (dv / A) * (dmu - (B / theta) * dtheta) +
              (v / A) * (ddmu - (B / theta) * ddtheta + (B / (theta * theta)) * dtheta);
  CHECK(r.dv == doctest::Approx(dv_out).epsilon(1e-14));
  CHECK(r.da == doctest::Approx(da).epsilon(1e-14));
}

TEST_CASE("load point forcing") {
  ForcingConfig f;
  LoadPoint lp = load_point(0.0, f);
  CHECK(lp.v_l == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(lp.dv_l == doctest::Approx(f.amplitude / f.oscillation_time).epsilon(1e-15));

  // sine zero crossing at t = pi * oscillation_time
  lp = load_point(M_PI * f.oscillation_time, f);
  CHECK(lp.v_l == doctest::Approx(1.0).epsilon(1e-12));

  ForcingConfig st = ForcingConfig::step(1.0, 10.0, 5.0);
  CHECK(load_point(4.999, st).v_l == 1.0);
  CHECK(load_point(4.999, st).dv_l == 0.0);
  CHECK(load_point(5.001, st).v_l == 10.0);
  CHECK(load_point(5.001, st).dv_l == 0.0);

  ForcingConfig cv = ForcingConfig::constant(2.5);
  CHECK(load_point(17.3, cv).v_l == 2.5);
  CHECK(load_point(17.3, cv).dv_l == 0.0);
}

TEST_CASE("load point derivative matches finite differences") {
  ForcingConfig f;
  double h = 1e-6;
  for (double t : {0.5, 3.0, 12.7, 40.0}) {
    double fd = (load_point(t + h, f).v_l - load_point(t - h, f).v_l) / (2 * h);
    CHECK(load_point(t, f).dv_l == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("rhs vanishes at the steady state") {
  RsfParams p;
  SliderState y = default_initial_state(p);
  SliderRates r = rhs(0.0, y, p, ForcingConfig::constant(1.0));
  CHECK(r.dmu == 0.0);
  CHECK(r.dtheta == 0.0);
  CHECK(r.dv == 0.0);
  CHECK(r.da == 0.0);
}

TEST_CASE("rhs at t=0 matches a hand evaluation") {
  RsfParams p;
  ForcingConfig f;
  SliderState y{0.6, 20.0, 1.0, 0.0};
  SliderRates r = rhs(0.0, y, p, f);

  // replay the documented evaluation order by hand
  double v = slip_rate(y.mu, y.theta, p);
  double dv_l = f.amplitude / f.oscillation_time;  // V_l(0) = 1, dV_l(0) = amp/osc
  double dtheta = 1.0 - y.theta * v / p.d_c;
  double ddtheta = -dtheta * v / p.d_c;
  double dmu = p.k_prime * (1.0 - v);
  double dv = (v / p.a_coef) * (dmu - (p.b_coef / y.theta) * dtheta);
  double ddmu = p.k_prime * (dv_l - dv);
  double da = (dv / p.a_coef) * (dmu - (p.b_coef / y.theta) * dtheta) +
              (v / p.a_coef) * (ddmu - (p.b_coef / y.theta) * ddtheta +
                                (p.b_coef / (y.theta * y.theta)) * dtheta);
  dmu -= p.k_dprime * dv;
  dv = (v / p.a_coef) * (dmu - (p.b_coef / y.theta) * dtheta);
  ddmu -= p.k_dprime * da;
  da = (dv / p.a_coef) * (dmu - (p.b_coef / y.theta) * dtheta) +
       (v / p.a_coef) * (ddmu - (p.b_coef / y.theta) * ddtheta +
                         (p.b_coef / (y.theta * y.theta)) * dtheta);

  CHECK(r.dmu == doctest::Approx(dmu).epsilon(1e-14));
  CHECK(r.dtheta == doctest::Approx(dtheta).epsilon(1e-14));
  CHECK(r.dv == doctest::Approx(dv).epsilon(1e-14));
  CHECK(r.da == doctest::Approx(da).epsilon(1e-14));
  // at this state the spring term is zero, so dmu reduces to -k'' * dv
  CHECK(r.dmu == doctest::Approx(-p.k_dprime * r.dv).epsilon(1e-14));
}

TEST_CASE("damping schemes coincide when k'' is zero") {
  RsfParams p;
  p.k_dprime = 0.0;
  ForcingConfig f;
  SliderState y{0.605, 14.0, 1.8, 0.3};
  SliderRates two = rhs(1.3, y, p, f, DampingScheme::TwoPass);
  SliderRates imp = rhs(1.3, y, p, f, DampingScheme::ImplicitExact);
  CHECK(two.dmu == imp.dmu);
  CHECK(two.dtheta == imp.dtheta);
  CHECK(two.dv == imp.dv);
  CHECK(two.da == imp.da);
}

TEST_CASE("damping schemes agree closely at the default k''") {
  RsfParams p;
  ForcingConfig f;
  SliderState y{0.605, 14.0, 1.8, 0.3};
  SliderRates two = rhs(1.3, y, p, f, DampingScheme::TwoPass);
  SliderRates imp = rhs(1.3, y, p, f, DampingScheme::ImplicitExact);
  // dv re-converges after the correction pass; da keeps an O(k'')
  // residual because its damping uses the provisional jerk
  CHECK(two.dv == doctest::Approx(imp.dv).epsilon(1e-8));
  CHECK(two.da == doctest::Approx(imp.da).epsilon(1e-4));
}

TEST_CASE("steady state friction") {
  RsfParams p;
  CHECK(steady_state_friction(1.0, p) == 0.6);
  CHECK(steady_state_friction(10.0, p) ==
        doctest::Approx(0.6 - 0.003 * std::log(10.0)).epsilon(1e-15));
  CHECK(steady_state_friction(10.0, p) == doctest::Approx(0.6 - 0.0069078).epsilon(1e-5));

  p.b_coef = p.a_coef;
  CHECK(steady_state_friction(0.3, p) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(steady_state_friction(7.0, p) == doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("steady states are rhs fixed points") {
  RsfParams p;
  for (double v : {0.5, 1.0, 2.0}) {
    SliderState y = steady_state(p, v);
    CHECK(y.theta == doctest::Approx(p.d_c / v).epsilon(1e-15));
    CHECK(y.a == 0.0);
    // the friction law inverts back to v
    CHECK(slip_rate(y.mu, y.theta, p) == doctest::Approx(v).epsilon(1e-12));
    SliderRates r = rhs(0.0, y, p, ForcingConfig::constant(v));
    CHECK(std::abs(r.dmu) < 1e-15);
    CHECK(std::abs(r.dtheta) < 1e-15);
    CHECK(std::abs(r.dv) < 1e-13);
    CHECK(std::abs(r.da) < 1e-13);
  }
  SliderState d = default_initial_state(p);
  CHECK(d.mu == 0.6);
  CHECK(d.theta == 20.0);
  CHECK(d.v == 1.0);
  CHECK(d.a == 0.0);
}

TEST_CASE("physical constants derive the couplings") {
  PhysicalConstants pc;
  // k' = E/(l*sigma) in 1/m, times 1e-6 for 1/um
  double k_prime = pc.elastic_modulus / (pc.fault_length * pc.normal_stress) * 1e-6;
  CHECK(pc.derive_k_prime() == doctest::Approx(k_prime).epsilon(1e-15));
  // k'' = eta/sigma in s/m, times 1e-6 for s/um; defaults give exactly 1e-7
  CHECK(pc.derive_k_dprime() == doctest::Approx(2e7 / 2e8 * 1e-6).epsilon(1e-15));
  CHECK(pc.derive_k_dprime() == doctest::Approx(1e-7).epsilon(1e-12));

  RsfParams p;
  p.k_prime = pc.derive_k_prime();
  p.k_dprime = pc.derive_k_dprime();
  CHECK(pc.consistent_with(p));
  p.k_prime *= 1.5;
  CHECK_FALSE(pc.consistent_with(p));
}

TEST_CASE("parameter validation") {
  RsfParams p;
  CHECK_NOTHROW(p.validate());
  p.d_c = -1.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = RsfParams{};
  p.a_coef = 0.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = RsfParams{};
  p.v0 = -2.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = RsfParams{};
  p.k_prime = -1e-3;
  CHECK_THROWS_AS(p.validate(), ValidationError);

  PhysicalConstants pc;
  CHECK_NOTHROW(pc.validate());
  pc.normal_stress = 0.0;
  CHECK_THROWS_AS(pc.validate(), ValidationError);
}

TEST_CASE("state validation") {
  SliderState y{0.6, 20.0, 1.0, 0.0};
  CHECK_NOTHROW(y.validate());
  y.theta = 0.0;
  CHECK_THROWS_AS(y.validate(), ModelDomainError);
  y = SliderState{0.6, 20.0, -1.0, 0.0};
  CHECK_THROWS_AS(y.validate(), ModelDomainError);
  y = SliderState{0.6, 20.0, std::nan(""), 0.0};
  CHECK_THROWS_AS(y.validate(), ModelDomainError);
}

TEST_CASE("forcing validation") {
  ForcingConfig f;
  CHECK_NOTHROW(f.validate());
  f.oscillation_time = 0.0;
  CHECK_THROWS_AS(f.validate(), ValidationError);
  f = ForcingConfig{};
  f.decay_time = -3.0;
  CHECK_THROWS_AS(f.validate(), ValidationError);
  ForcingConfig st = ForcingConfig::step(1.0, -10.0, 5.0);
  CHECK_THROWS_AS(st.validate(), ValidationError);
  st = ForcingConfig::step(0.0, 10.0, 5.0);
  CHECK_THROWS_AS(st.validate(), ValidationError);
}
