#include "rsf/model.hpp"

#include <cmath>
#include <sstream>

namespace rsf {

namespace {

constexpr double kPerMetreToPerMicron = 1e-6;  // 1/m -> 1/um
constexpr double kSecPerMetreToSecPerMicron = 1e-6;  // s/m -> s/um

// exp() overflows past ~709.78; anything close is already unphysical here.
constexpr double kMaxLogSlipRate = 700.0;

bool close_rel(double x, double y, double rel_tol) {
  double scale = std::max(std::abs(x), std::abs(y));
  return std::abs(x - y) <= rel_tol * std::max(scale, 1e-300);
}

} // namespace

void RsfParams::validate() const {
  std::ostringstream bad;
  if (!(a_coef > 0.0)) bad << "a_coef must be > 0 (got " << a_coef << "); ";
  if (!(b_coef > 0.0)) bad << "b_coef must be > 0 (got " << b_coef << "); ";
  if (!(d_c > 0.0)) bad << "d_c must be > 0 (got " << d_c << "); ";
  if (!(v0 > 0.0)) bad << "v0 must be > 0 (got " << v0 << "); ";
  if (!(k_prime >= 0.0)) bad << "k_prime must be >= 0 (got " << k_prime << "); ";
  if (!(k_dprime >= 0.0)) bad << "k_dprime must be >= 0 (got " << k_dprime << "); ";
  if (!std::isfinite(mu0)) bad << "mu0 must be finite; ";
  std::string msg = bad.str();
  if (!msg.empty()) throw ValidationError("invalid RsfParams: " + msg);
}

void PhysicalConstants::validate() const {
  if (!(elastic_modulus > 0.0 && fault_length > 0.0 && normal_stress > 0.0 &&
        damping_coef > 0.0)) {
    throw ValidationError("invalid PhysicalConstants: all fields must be strictly positive");
  }
}

double PhysicalConstants::derive_k_prime() const {
  return elastic_modulus / (fault_length * normal_stress) * kPerMetreToPerMicron;
}

double PhysicalConstants::derive_k_dprime() const {
  return damping_coef / normal_stress * kSecPerMetreToSecPerMicron;
}

bool PhysicalConstants::consistent_with(const RsfParams& p, double rel_tol) const {
  return close_rel(derive_k_prime(), p.k_prime, rel_tol) &&
         close_rel(derive_k_dprime(), p.k_dprime, rel_tol);
}

void SliderState::validate(double t) const {
  auto fail = [t](const std::string& what) {
    std::ostringstream msg;
    msg << what << " at t=" << t;
    throw ModelDomainError(msg.str(), t);
  };
  if (!(theta > 0.0)) fail("state variable theta must stay positive");
  if (!(v > 0.0)) fail("slip rate v must stay positive");
  if (!std::isfinite(mu) || !std::isfinite(theta) || !std::isfinite(v) || !std::isfinite(a))
    fail("non-finite slider state");
}

void ForcingConfig::validate() const {
  if (shape == Shape::DecayingSinusoid) {
    if (!(decay_time > 0.0)) throw ValidationError("forcing decay_time must be > 0");
    if (!(oscillation_time > 0.0))
      throw ValidationError("forcing oscillation_time must be > 0");
    if (!std::isfinite(baseline) || !std::isfinite(amplitude))
      throw ValidationError("forcing baseline/amplitude must be finite");
  } else {
    if (!(v_before > 0.0) || !(v_after > 0.0))
      throw ValidationError("forcing step velocities must be > 0");
    if (!std::isfinite(step_time)) throw ValidationError("forcing step_time must be finite");
  }
}

double slip_rate(double mu, double theta, const RsfParams& p) {
  if (!(theta > 0.0)) {
    std::ostringstream msg;
    msg << "slip_rate: theta must be > 0 (mu=" << mu << ", theta=" << theta << ")";
    throw ModelDomainError(msg.str());
  }
  double log_arg = p.v0 * theta / p.d_c;
  double expo = (mu - p.mu0 - p.b_coef * std::log(log_arg)) / p.a_coef;
  if (!(expo < kMaxLogSlipRate) || !std::isfinite(expo)) {
    std::ostringstream msg;
    msg << "slip_rate overflow: exp argument " << expo << " at mu=" << mu
        << ", theta=" << theta;
    throw ModelDomainError(msg.str());
  }
  return p.v0 * std::exp(expo);
}

StateRates state_rates(double theta, double v, double d_c) {
  StateRates r;
  r.dtheta = 1.0 - theta * v / d_c;
  r.ddtheta = -r.dtheta * v / d_c;
  return r;
}

FrictionRates friction_rates(double v_l, double dv_l, double v, double dv, double ddv,
                             const RsfParams& p) {
  FrictionRates r;
  r.dmu = p.k_prime * (v_l - v) - p.k_dprime * dv;
  r.ddmu = p.k_prime * (dv_l - dv) - p.k_dprime * ddv;
  return r;
}

AccelRates slip_accel_rates(double v, double dv, double theta, double dtheta, double ddtheta,
                            double dmu, double ddmu, const RsfParams& p) {
  double drive = dmu - p.b_coef / theta * dtheta;
  AccelRates r;
  r.dv = v / p.a_coef * drive;
  r.da = dv / p.a_coef * drive +
         v / p.a_coef * (ddmu - p.b_coef / theta * ddtheta + p.b_coef / theta * dtheta / theta);
  return r;
}

LoadPoint load_point(double t, const ForcingConfig& f) {
  if (f.shape == ForcingConfig::Shape::VelocityStep) {
    return {t < f.step_time ? f.v_before : f.v_after, 0.0};
  }
  double env = std::exp(-t / f.decay_time);
  double phase = t / f.oscillation_time;
  double s = std::sin(phase);
  double c = std::cos(phase);
  LoadPoint lp;
  lp.v_l = f.baseline + f.amplitude * env * s;
  lp.dv_l = -f.amplitude / f.decay_time * env * s + f.amplitude / f.oscillation_time * env * c;
  return lp;
}

SliderRates rhs(double t, const SliderState& y, const RsfParams& p, const ForcingConfig& f,
                DampingScheme scheme) {
  LoadPoint lp = load_point(t, f);

  double v = slip_rate(y.mu, y.theta, p);
  StateRates st = state_rates(y.theta, v, p.d_c);

  double over_theta = p.b_coef / y.theta;
  double drive_state = over_theta * st.dtheta;              // (B/theta)*theta_dot
  double curv_state = over_theta * st.ddtheta - over_theta * st.dtheta / y.theta;
  // curv_state = (B/theta)*theta_ddot - (B/theta^2)*theta_dot; enters ddmu - ... below

  SliderRates out;
  out.dtheta = st.dtheta;

  if (scheme == DampingScheme::TwoPass) {
    // Reference realization: damping is applied to provisional undamped
    // rates and the dependent rates recomputed once. theta_ddot is not
    // revisited.
    double dmu = p.k_prime * (lp.v_l - v);
    double dv = v / p.a_coef * (dmu - drive_state);
    double ddmu = p.k_prime * (lp.dv_l - dv);
    double da = dv / p.a_coef * (dmu - drive_state) + v / p.a_coef * (ddmu - curv_state);

    dmu -= p.k_dprime * dv;
    dv = v / p.a_coef * (dmu - drive_state);
    ddmu -= p.k_dprime * da;
    da = dv / p.a_coef * (dmu - drive_state) + v / p.a_coef * (ddmu - curv_state);

    out.dmu = dmu;
    out.dv = dv;
    out.da = da;
  } else {
    // Exact solve of mu_dot = k'(V_l - V) - k'' * V_dot with
    // V_dot = (V/A)(mu_dot - (B/theta)theta_dot), linear in mu_dot;
    // same structure one derivative up.
    double gain = v / p.a_coef;
    double denom = 1.0 + p.k_dprime * gain;
    double dmu = (p.k_prime * (lp.v_l - v) + p.k_dprime * gain * drive_state) / denom;
    double dv = gain * (dmu - drive_state);
    double s1 = dv / p.a_coef * (dmu - drive_state);
    double ddmu_undamped = p.k_prime * (lp.dv_l - dv);
    double da = (s1 + gain * (ddmu_undamped - curv_state)) / denom;
    out.dmu = dmu;
    out.dv = dv;
    out.da = da;
  }
  return out;
}

double steady_state_friction(double v, const RsfParams& p) {
  if (!(v > 0.0)) throw ValidationError("steady_state_friction: v must be > 0");
  return p.mu0 + (p.a_coef - p.b_coef) * std::log(v / p.v0);
}

SliderState steady_state(const RsfParams& p, double v) {
  SliderState y;
  y.mu = steady_state_friction(v, p);
  y.theta = p.d_c / v;
  y.v = v;
  y.a = 0.0;
  return y;
}

SliderState default_initial_state(const RsfParams& p) {
  return {p.mu0, p.d_c / p.v0, p.v0, 0.0};
}

} // namespace rsf
