#include "rsf/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace rsf {

namespace {

using Vec4 = std::array<double, 4>;

Vec4 operator+(const Vec4& a, const Vec4& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]};
}
Vec4 operator*(double s, const Vec4& a) { return {s * a[0], s * a[1], s * a[2], s * a[3]}; }

Vec4 rates_to_vec(const SliderRates& r) { return {r.dmu, r.dtheta, r.dv, r.da}; }

// Dormand-Prince 5(4) tableau. The 7th stage is FSAL: it evaluates the
// rhs at the accepted endpoint and becomes stage 1 of the next step.
constexpr double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9;
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561,
                 A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247,
                 A64 = 49.0 / 176, A65 = -5103.0 / 18656;
constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784,
                 B6 = 11.0 / 84;
// error coefficients: b5 - b4 rows
constexpr double E1 = B1 - 5179.0 / 57600, E3 = B3 - 7571.0 / 16695, E4 = B4 - 393.0 / 640,
                 E5 = B5 + 92097.0 / 339200, E6 = B6 - 187.0 / 2100, E7 = -1.0 / 40;

struct StepFailure {
  std::string message;
  double time;
};

class Dopri5 {
public:
  Dopri5(const RsfParams& p, const ForcingConfig& f, DampingScheme damping, SolverStats& stats)
      : p_(p), f_(f), damping_(damping), stats_(stats) {}

  Vec4 eval(double t, const Vec4& y) {
    ++stats_.n_rhs_evals;
    SliderState s = SliderState::from_array(y);
    if (!(s.theta > 0.0) || !(s.v > 0.0) || !std::isfinite(s.mu) || !std::isfinite(s.a)) {
      std::ostringstream msg;
      msg << "state left its domain at t=" << t << " (theta=" << s.theta << ", v=" << s.v
          << ")";
      throw ModelDomainError(msg.str(), t);
    }
    return rates_to_vec(rhs(t, s, p_, f_, damping_));
  }

  /// One trial step from (t, y) with derivative f0 already known.
  /// Returns the scaled error norm; fills y_new and f_new (FSAL stage).
  double try_step(double t, const Vec4& y, const Vec4& f0, double h, double atol, double rtol,
                  Vec4& y_new, Vec4& f_new) {
    Vec4 k1 = f0;
    Vec4 k2 = eval(t + C2 * h, y + (h * A21) * k1);
    Vec4 k3 = eval(t + C3 * h, y + (h * A31) * k1 + (h * A32) * k2);
    Vec4 k4 = eval(t + C4 * h, y + (h * A41) * k1 + (h * A42) * k2 + (h * A43) * k3);
    Vec4 k5 = eval(t + C5 * h,
                   y + (h * A51) * k1 + (h * A52) * k2 + (h * A53) * k3 + (h * A54) * k4);
    Vec4 k6 = eval(t + h, y + (h * A61) * k1 + (h * A62) * k2 + (h * A63) * k3 +
                              (h * A64) * k4 + (h * A65) * k5);
    y_new = y + (h * B1) * k1 + (h * B3) * k3 + (h * B4) * k4 + (h * B5) * k5 + (h * B6) * k6;
    f_new = eval(t + h, y_new);

    double err_sq = 0.0;
    for (int i = 0; i < 4; ++i) {
      double e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] +
                      E7 * f_new[i]);
      double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
      double r = e / sc;
      err_sq += r * r;
    }
    return std::sqrt(err_sq / 4.0);
  }

private:
  const RsfParams& p_;
  const ForcingConfig& f_;
  DampingScheme damping_;
  SolverStats& stats_;
};

// Cubic Hermite interpolation over one accepted step.
Vec4 hermite(double theta, double h, const Vec4& y0, const Vec4& f0, const Vec4& y1,
             const Vec4& f1) {
  double t2 = theta * theta;
  double t3 = t2 * theta;
  double h00 = 2 * t3 - 3 * t2 + 1;
  double h10 = t3 - 2 * t2 + theta;
  double h01 = -2 * t3 + 3 * t2;
  double h11 = t3 - t2;
  Vec4 out;
  for (int i = 0; i < 4; ++i)
    out[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
  return out;
}

std::vector<double> output_times(const SolverConfig& cfg) {
  double span = cfg.t_end - cfg.t_start;
  if (span <= 0.0) return {cfg.t_start};
  auto n = static_cast<std::size_t>(std::floor(span / cfg.output_dt + 1e-9));
  std::vector<double> times(n + 1);
  for (std::size_t k = 0; k <= n; ++k) times[k] = cfg.t_start + double(k) * cfg.output_dt;
  return times;
}

} // namespace

void SolverConfig::validate() const {
  if (!(t_end >= t_start)) throw ValidationError("solver: t_end must be >= t_start");
  if (!(output_dt > 0.0)) throw ValidationError("solver: output_dt must be > 0");
  if (!(max_step > 0.0)) throw ValidationError("solver: max_step must be > 0");
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
    throw ValidationError("solver: tolerances must be > 0");
  if (!(rk4_dt > 0.0)) throw ValidationError("solver: rk4_dt must be > 0");
}

std::vector<double> Trajectory::column_mu() const {
  std::vector<double> c(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) c[i] = states[i].mu;
  return c;
}
std::vector<double> Trajectory::column_theta() const {
  std::vector<double> c(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) c[i] = states[i].theta;
  return c;
}
std::vector<double> Trajectory::column_v() const {
  std::vector<double> c(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) c[i] = states[i].v;
  return c;
}
std::vector<double> Trajectory::column_a() const {
  std::vector<double> c(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) c[i] = states[i].a;
  return c;
}

Trajectory integrate(const RsfParams& p, const ForcingConfig& f, const SliderState& y0,
                     const SolverConfig& cfg) {
  p.validate();
  f.validate();
  cfg.validate();
  y0.validate(cfg.t_start);

  if (cfg.method == SolverMethod::FixedRk4)
    return integrate_fixed_rk4(p, f, y0, cfg.rk4_dt, cfg.t_start, cfg.t_end, cfg.damping);

  Trajectory traj;
  traj.times = output_times(cfg);
  traj.states.reserve(traj.times.size());
  traj.states.push_back(y0);

  double span = cfg.t_end - cfg.t_start;
  if (span <= 0.0) return traj;

  Dopri5 stepper(p, f, cfg.damping, traj.stats);

  Vec4 y = y0.to_array();
  double t = cfg.t_start;
  Vec4 fcur = stepper.eval(t, y);

  // start at the step cap; an oversized first step is simply rejected
  // and shrunk by the controller
  double h = std::min(cfg.max_step, span);

  const double safety = 0.9, beta = 0.04;
  const double expo1 = 0.2 - beta * 0.75;
  double facold = 1e-4;
  bool just_rejected = false;

  std::size_t next_out = 1;  // traj.times[0] already emitted
  const double t_eps = 1e-9 * std::max(1.0, std::abs(cfg.t_end));
  const double h_floor = 16.0 * std::numeric_limits<double>::epsilon() *
                         std::max({1.0, std::abs(cfg.t_start), std::abs(cfg.t_end)});

  while (t < cfg.t_end - t_eps) {
    h = std::min({h, cfg.max_step, cfg.t_end - t});
    if (h < h_floor) {
      std::ostringstream msg;
      msg << "step size underflow (h=" << h << ") at t=" << t;
      throw SolverError(msg.str(), t);
    }

    Vec4 y_new, f_new;
    double err;
    bool domain_failure = false;
    std::string domain_msg;
    try {
      err = stepper.try_step(t, y, fcur, h, cfg.abs_tol, cfg.rel_tol, y_new, f_new);
      if (!std::isfinite(err)) {
        domain_failure = true;
        domain_msg = "non-finite error estimate";
      } else if (err <= 1.0 && (!(y_new[1] > 0.0) || !(y_new[2] > 0.0))) {
        domain_failure = true;
        domain_msg = "accepted state violates theta/v positivity";
      }
    } catch (const ModelDomainError& e) {
      domain_failure = true;
      domain_msg = e.what();
    }

    if (domain_failure) {
      // shrink hard; if h underflows the domain violation is genuine
      ++traj.stats.n_rejected;
      h *= 0.25;
      just_rejected = true;
      if (h < h_floor) {
        std::ostringstream msg;
        msg << "forward model failed near t=" << t << ": " << domain_msg;
        throw ModelDomainError(msg.str(), t);
      }
      continue;
    }

    if (err <= 1.0) {
      double t1 = t + h;
      while (next_out < traj.times.size() && traj.times[next_out] <= t1 + t_eps) {
        double to = traj.times[next_out];
        Vec4 val = (std::abs(to - t1) <= t_eps)
                       ? y_new
                       : hermite((to - t) / h, h, y, fcur, y_new, f_new);
        traj.states.push_back(SliderState::from_array(val));
        ++next_out;
      }
      t = t1;
      y = y_new;
      fcur = f_new;
      ++traj.stats.n_steps;

      double fac11 = std::pow(std::max(err, 1e-16), expo1);
      double fac = fac11 / std::pow(facold, beta);
      fac = std::clamp(fac / safety, 0.1, 5.0);
      double h_next = h / fac;
      if (just_rejected) h_next = std::min(h_next, h);
      h = h_next;
      facold = std::max(err, 1e-4);
      just_rejected = false;
    } else {
      ++traj.stats.n_rejected;
      double fac11 = std::pow(err, expo1);
      h = h / std::min(5.0, fac11 / safety);
      just_rejected = true;
    }
  }

  // fp slack can leave the final grid point unemitted
  while (next_out < traj.times.size()) {
    traj.states.push_back(SliderState::from_array(y));
    ++next_out;
  }
  return traj;
}

Trajectory integrate_fixed_rk4(const RsfParams& p, const ForcingConfig& f,
                               const SliderState& y0, double dt, double t_start, double t_end,
                               DampingScheme damping) {
  p.validate();
  f.validate();
  if (!(dt > 0.0)) throw ValidationError("integrate_fixed_rk4: dt must be > 0");
  if (!(t_end >= t_start)) throw ValidationError("integrate_fixed_rk4: t_end must be >= t_start");
  y0.validate(t_start);

  Trajectory traj;
  auto n_steps = static_cast<std::size_t>(std::ceil((t_end - t_start) / dt - 1e-9));
  traj.times.reserve(n_steps + 1);
  traj.states.reserve(n_steps + 1);
  traj.times.push_back(t_start);
  traj.states.push_back(y0);
  if (n_steps == 0) return traj;

  Dopri5 evaluator(p, f, damping, traj.stats);  // reused for rhs + domain checks

  Vec4 y = y0.to_array();
  for (std::size_t k = 0; k < n_steps; ++k) {
    double t = t_start + double(k) * dt;
    double t_next = (k + 1 == n_steps) ? t_end : t_start + double(k + 1) * dt;
    double h = t_next - t;

    Vec4 k1 = evaluator.eval(t, y);
    Vec4 k2 = evaluator.eval(t + 0.5 * h, y + (0.5 * h) * k1);
    Vec4 k3 = evaluator.eval(t + 0.5 * h, y + (0.5 * h) * k2);
    Vec4 k4 = evaluator.eval(t + h, y + h * k3);
    y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    if (!(y[1] > 0.0) || !(y[2] > 0.0) || !std::isfinite(y[0]) || !std::isfinite(y[3])) {
      std::ostringstream msg;
      msg << "fixed-step state left its domain at t=" << t_next;
      throw ModelDomainError(msg.str(), t_next);
    }
    traj.times.push_back(t_next);
    traj.states.push_back(SliderState::from_array(y));
    ++traj.stats.n_steps;
  }
  return traj;
}

namespace {

/// Not-a-knot cubic spline through (xs, ys); returns per-node slopes.
std::vector<double> spline_slopes(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  std::vector<double> h(n - 1), delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = xs[i + 1] - xs[i];
    delta[i] = (ys[i + 1] - ys[i]) / h[i];
  }

  std::vector<double> lower(n, 0.0), diag(n, 0.0), upper(n, 0.0), b(n, 0.0);

  {
    double d = xs[2] - xs[0];
    diag[0] = h[1];
    upper[0] = d;
    b[0] = ((h[0] + 2.0 * d) * h[1] * delta[0] + h[0] * h[0] * delta[1]) / d;
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    lower[i] = h[i];
    diag[i] = 2.0 * (h[i - 1] + h[i]);
    upper[i] = h[i - 1];
    b[i] = 3.0 * (h[i] * delta[i - 1] + h[i - 1] * delta[i]);
  }
  {
    double d = xs[n - 1] - xs[n - 3];
    lower[n - 1] = d;
    diag[n - 1] = h[n - 2];
    b[n - 1] = (h[n - 2] * h[n - 2] * delta[n - 3] +
                (2.0 * d + h[n - 2]) * h[n - 3] * delta[n - 2]) /
               d;
  }

  // Thomas solve
  std::vector<double> s(n);
  for (std::size_t i = 1; i < n; ++i) {
    double w = lower[i] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    b[i] -= w * b[i - 1];
  }
  s[n - 1] = b[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) s[i] = (b[i] - upper[i] * s[i + 1]) / diag[i];
  return s;
}

double hermite_scalar(double theta, double h, double y0, double s0, double y1, double s1) {
  double t2 = theta * theta;
  double t3 = t2 * theta;
  return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + theta) * h * s0 +
         (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * s1;
}

} // namespace

std::vector<double> spline_sample(const std::vector<double>& xs, const std::vector<double>& ys,
                                  const std::vector<double>& at) {
  const std::size_t n = xs.size();
  if (n == 0 || n != ys.size())
    throw ValidationError("spline_sample: empty or mismatched input arrays");

  double span = xs.back() - xs.front();
  double tol = 1e-9 * std::max(1.0, std::abs(span));
  for (double t : at) {
    if (t < xs.front() - tol || t > xs.back() + tol) {
      std::ostringstream msg;
      msg << "sample time " << t << " outside trajectory range [" << xs.front() << ", "
          << xs.back() << "]";
      throw ValidationError(msg.str());
    }
  }

  std::vector<double> out(at.size());
  if (n == 1) {
    std::fill(out.begin(), out.end(), ys[0]);
    return out;
  }

  std::vector<double> slopes;
  if (n == 2) {
    slopes = {(ys[1] - ys[0]) / (xs[1] - xs[0]), (ys[1] - ys[0]) / (xs[1] - xs[0])};
  } else if (n == 3) {
    // single quadratic through the three points
    double d01 = (ys[1] - ys[0]) / (xs[1] - xs[0]);
    double d12 = (ys[2] - ys[1]) / (xs[2] - xs[1]);
    double c2 = (d12 - d01) / (xs[2] - xs[0]);  // second divided difference
    auto qslope = [&](double x) { return d01 + c2 * (2.0 * x - xs[0] - xs[1]); };
    slopes = {qslope(xs[0]), qslope(xs[1]), qslope(xs[2])};
  } else {
    slopes = spline_slopes(xs, ys);
  }

  for (std::size_t j = 0; j < at.size(); ++j) {
    double t = std::clamp(at[j], xs.front(), xs.back());
    auto it = std::upper_bound(xs.begin(), xs.end(), t);
    std::size_t i = (it == xs.begin()) ? 0 : std::size_t(it - xs.begin()) - 1;
    if (i >= n - 1) i = n - 2;
    double h = xs[i + 1] - xs[i];
    out[j] = hermite_scalar((t - xs[i]) / h, h, ys[i], slopes[i], ys[i + 1], slopes[i + 1]);
  }
  return out;
}

std::vector<SliderState> sample_at(const Trajectory& traj, const std::vector<double>& times) {
  if (traj.size() == 0) throw ValidationError("sample_at: empty trajectory");
  auto mu = spline_sample(traj.times, traj.column_mu(), times);
  auto theta = spline_sample(traj.times, traj.column_theta(), times);
  auto v = spline_sample(traj.times, traj.column_v(), times);
  auto a = spline_sample(traj.times, traj.column_a(), times);
  std::vector<SliderState> out(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) out[i] = {mu[i], theta[i], v[i], a[i]};
  return out;
}

} // namespace rsf
