#ifndef RSF_SOLVER_HPP
#define RSF_SOLVER_HPP

#include <cstdint>
#include <vector>

#include "rsf/model.hpp"

namespace rsf {

enum class SolverMethod { Adaptive, FixedRk4 };

struct SolverConfig {
  double t_start = 0.0;
  double t_end = 50.0;
  double output_dt = 1e-2;  // reporting grid spacing [s]
  double abs_tol = 1e-10;
  double rel_tol = 1e-6;
  double max_step = 1e-3;   // adaptive step cap [s]
  double rk4_dt = 1e-4;     // step for the fixed RK4 method [s]
  SolverMethod method = SolverMethod::Adaptive;
  DampingScheme damping = DampingScheme::TwoPass;

  void validate() const;
};

struct SolverStats {
  std::uint64_t n_steps = 0;     // accepted steps
  std::uint64_t n_rejected = 0;  // rejected trial steps
  std::uint64_t n_rhs_evals = 0;
};

/// Time-ordered states on the reporting grid, immutable after construction.
struct Trajectory {
  std::vector<double> times;
  std::vector<SliderState> states;
  SolverStats stats;

  std::size_t size() const { return times.size(); }

  std::vector<double> column_mu() const;
  std::vector<double> column_theta() const;
  std::vector<double> column_v() const;
  std::vector<double> column_a() const;
};

/// Integrate the slider system with an embedded Dormand-Prince 5(4) pair,
/// PI step control and cubic Hermite dense output on the reporting grid
/// t_start + k*output_dt. Local error is held to (abs_tol, rel_tol) and
/// the step never exceeds max_step.
///
/// Throws SolverError on step-size underflow and ModelDomainError if the
/// state leaves its domain (theta <= 0, slip-rate overflow), tagged with
/// the failing time.
Trajectory integrate(const RsfParams& p, const ForcingConfig& f, const SliderState& y0,
                     const SolverConfig& cfg);

/// Classical fixed-step RK4, reporting every step. Deterministic and
/// bit-reproducible; serves as an independent cross-check for the
/// adaptive path.
Trajectory integrate_fixed_rk4(const RsfParams& p, const ForcingConfig& f, const SliderState& y0,
                               double dt, double t_start, double t_end,
                               DampingScheme damping = DampingScheme::TwoPass);

/// Interpolate each state component at the requested times with a
/// not-a-knot cubic spline over the trajectory grid (exact at grid
/// points, linear for 2-point trajectories). Times outside the grid
/// throw ValidationError.
std::vector<SliderState> sample_at(const Trajectory& traj, const std::vector<double>& times);

/// Scalar cubic-spline interpolation used by sample_at; exposed for the
/// inversion's acceleration-only sampling path.
std::vector<double> spline_sample(const std::vector<double>& xs, const std::vector<double>& ys,
                                  const std::vector<double>& at);

} // namespace rsf

#endif
