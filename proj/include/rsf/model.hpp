#ifndef RSF_MODEL_HPP
#define RSF_MODEL_HPP

#include <array>

#include "rsf/errors.hpp"

// Rate-and-state friction on a spring-slider-damper patch.
//
// All quantities use a single internal unit convention:
//   length um, time s, slip rate um/s, slip acceleration um/s^2.
// SI inputs (Pa, m) are converted at the boundary, see PhysicalConstants.

namespace rsf {

/// Friction-law constants plus the effective spring/damper couplings.
struct RsfParams {
  double mu0 = 0.6;        // reference friction coefficient
  double v0 = 1.0;         // reference slip rate [um/s]
  double a_coef = 0.011;   // direct-effect constant A
  double b_coef = 0.014;   // evolution-effect constant B
  double d_c = 20.0;       // critical slip distance [um]
  double k_prime = 1e-2;   // effective stiffness k' = E/(l*sigma) [1/um]
  double k_dprime = 1e-7;  // radiation damping k'' = eta/sigma [s/um]

  /// Throws ValidationError unless a_coef, b_coef, d_c, v0 > 0 and
  /// k_prime, k_dprime >= 0.
  void validate() const;

  RsfParams with_d_c(double dc) const {
    RsfParams p = *this;
    p.d_c = dc;
    return p;
  }
};

/// SI-unit fault constants from which k' and k'' derive.
struct PhysicalConstants {
  double elastic_modulus = 5e10;  // E [Pa]
  double fault_length = 3e-2;     // l [m]
  double normal_stress = 2e8;     // sigma [Pa]
  double damping_coef = 2e7;      // eta [Pa/(m/s)]

  void validate() const;

  /// k' = E/(l*sigma), converted from 1/m to 1/um.
  double derive_k_prime() const;
  /// k'' = eta/sigma, converted from s/m to s/um.
  double derive_k_dprime() const;

  /// True when params' k', k'' match the derived values within rel_tol.
  bool consistent_with(const RsfParams& p, double rel_tol = 1e-9) const;
};

/// The 4-component ODE state.
struct SliderState {
  double mu = 0.0;     // friction coefficient
  double theta = 0.0;  // state variable [s]
  double v = 0.0;      // slip rate [um/s]
  double a = 0.0;      // slip acceleration [um/s^2]

  /// Throws ModelDomainError unless theta > 0, v > 0 and all finite.
  void validate(double t = 0.0) const;

  std::array<double, 4> to_array() const { return {mu, theta, v, a}; }
  static SliderState from_array(const std::array<double, 4>& y) {
    return {y[0], y[1], y[2], y[3]};
  }
};

/// Time derivative of SliderState.
struct SliderRates {
  double dmu = 0.0;
  double dtheta = 0.0;
  double dv = 0.0;
  double da = 0.0;
};

/// Load-point velocity history V_l(t). Two shapes: a decaying sinusoid
/// perturbation around a baseline, and a velocity step.
struct ForcingConfig {
  enum class Shape { DecayingSinusoid, VelocityStep };

  Shape shape = Shape::DecayingSinusoid;

  // decaying sinusoid: V_l = baseline + amplitude * exp(-t/decay_time) * sin(t/oscillation_time)
  double baseline = 1.0;          // [um/s]
  double amplitude = 1.0;
  double decay_time = 20.0;       // [s]
  double oscillation_time = 0.1;  // [s]

  // velocity step: V_l = v_before for t < step_time, v_after afterwards
  double v_before = 1.0;   // [um/s]
  double v_after = 10.0;   // [um/s]
  double step_time = 5.0;  // [s]

  void validate() const;

  static ForcingConfig constant(double v) {
    ForcingConfig f;
    f.shape = Shape::DecayingSinusoid;
    f.baseline = v;
    f.amplitude = 0.0;
    return f;
  }

  static ForcingConfig step(double v_before, double v_after, double step_time) {
    ForcingConfig f;
    f.shape = Shape::VelocityStep;
    f.v_before = v_before;
    f.v_after = v_after;
    f.step_time = step_time;
    return f;
  }
};

/// V_l(t) and its analytic time derivative.
struct LoadPoint {
  double v_l;   // [um/s]
  double dv_l;  // [um/s^2]
};

/// How the rhs resolves the implicit radiation-damping coupling between
/// mu_dot and V_dot. TwoPass applies the damping term to provisional
/// undamped rates and recomputes once; ImplicitExact solves the linear
/// relation exactly. They coincide when k'' = 0.
enum class DampingScheme { TwoPass, ImplicitExact };

/// Slip rate from the friction law solved for V:
///   V = V0 * exp((1/A) * (mu - mu0 - B*ln(V0*theta/d_c))).
/// Throws ModelDomainError if theta <= 0 or the exponential overflows.
double slip_rate(double mu, double theta, const RsfParams& p);

/// Aging-law state rates: dtheta = 1 - theta*v/d_c, ddtheta = -dtheta*v/d_c.
struct StateRates {
  double dtheta;
  double ddtheta;
};
StateRates state_rates(double theta, double v, double d_c);

/// Spring/damper friction rates:
///   dmu  = k'*(v_l - v)  - k''*dv
///   ddmu = k'*(dv_l - dv) - k''*ddv
struct FrictionRates {
  double dmu;
  double ddmu;
};
FrictionRates friction_rates(double v_l, double dv_l, double v, double dv, double ddv,
                             const RsfParams& p);

/// Slip-rate and slip-acceleration rates:
///   dv = (v/A) * (dmu - (B/theta)*dtheta)
///   da = (dv/A)*(dmu - (B/theta)*dtheta)
///      + (v/A)*(ddmu - (B/theta)*ddtheta + (B/theta^2)*dtheta)
struct AccelRates {
  double dv;
  double da;
};
AccelRates slip_accel_rates(double v, double dv, double theta, double dtheta, double ddtheta,
                            double dmu, double ddmu, const RsfParams& p);

/// Evaluate the configured forcing at time t.
LoadPoint load_point(double t, const ForcingConfig& f);

/// Full right-hand side of the 4-state system, reproducing the reference
/// evaluation order: slip rate, state rates, undamped friction rate,
/// provisional dv, undamped ddmu, provisional da, then the damping
/// correction pass (or the exact implicit solve).
SliderRates rhs(double t, const SliderState& y, const RsfParams& p, const ForcingConfig& f,
                DampingScheme scheme = DampingScheme::TwoPass);

/// Steady-state friction mu_ss = mu0 + (A - B) * ln(v/V0).
double steady_state_friction(double v, const RsfParams& p);

/// Steady-sliding state at slip rate v: mu = mu_ss(v), theta = d_c/v, a = 0.
SliderState steady_state(const RsfParams& p, double v);

/// Default initial condition: steady sliding at the reference rate V0
/// (mu = mu0, theta = d_c/V0, v = V0, a = 0).
SliderState default_initial_state(const RsfParams& p);

} // namespace rsf

#endif
