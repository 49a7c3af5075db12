#ifndef RSF_INVERSION_HPP
#define RSF_INVERSION_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rsf/solver.hpp"

namespace rsf {

/// Observed accelerations a(t_i) the inversion conditions on.
struct ObservationSet {
  std::vector<double> times;   // [s], strictly increasing
  std::vector<double> accels;  // [um/s^2]

  std::size_t size() const { return times.size(); }
  void validate() const;
};

struct NoiseModel {
  enum class Mode { Fixed, Estimated };
  Mode mode = Mode::Estimated;
  double sigma = 0.0;  // noise std [um/s^2], required when Fixed

  void validate() const;
};

/// Uniform prior support for d_c.
struct PriorConfig {
  double lower = 5.0;   // [um]
  double upper = 50.0;  // [um]

  double width() const { return upper - lower; }
  double density() const { return 1.0 / width(); }
  bool contains(double d_c) const { return d_c >= lower && d_c <= upper; }
  void validate() const;
};

/// Initial state policy for forward evaluations.
///
/// SteadyState re-derives the equilibrium state from each candidate's own
/// parameters, so under constant forcing every candidate produces a flat
/// (zero-acceleration) response and d_c is unidentifiable. Inversion setups
/// should instead pin Mode::Explicit with one concrete state shared by all
/// candidates; a candidate whose d_c disagrees with that state then relaxes
/// toward its own equilibrium, and that transient is what identifies d_c.
struct InitialCondition {
  enum class Mode { SteadyState, Explicit };
  Mode mode = Mode::SteadyState;
  SliderState y0{};

  SliderState resolve(const RsfParams& p) const;
};

/// Everything the forward map f(d_c) needs besides d_c itself.
struct ForwardSetup {
  RsfParams fixed;         // d_c field replaced per evaluation
  ForcingConfig forcing;
  InitialCondition init;
  SolverConfig solver;
  std::vector<double> times;  // observation grid [s]

  void validate() const;
};

/// Acceleration response of the model at the setup's observation times.
std::vector<double> forward_response(double d_c, const ForwardSetup& setup);

/// Sum of squared residuals between observations and a model response.
double sse(const ObservationSet& obs, const std::vector<double>& response);
double sse_at(const ObservationSet& obs, double d_c, const ForwardSetup& setup);

/// Gaussian log-likelihood: -n*ln(sigma*sqrt(2*pi)) - sse/(2*sigma^2).
double log_likelihood(const ObservationSet& obs, const std::vector<double>& response,
                      double sigma_noise);
double log_likelihood_at(const ObservationSet& obs, double d_c, const ForwardSetup& setup,
                         double sigma_noise);

/// Residual-based noise estimate sigma_hat = sqrt(sse(d_c_ref)/(n-1)).
/// Throws InversionError when the residuals are identically zero.
double estimate_noise_std(const ObservationSet& obs, double d_c_ref, const ForwardSetup& setup);

enum class GridSpacing { Log, Linear };

/// n values spanning [lo, hi] inclusive, log- or linearly spaced.
std::vector<double> make_grid(double lo, double hi, std::size_t n, GridSpacing spacing);

/// Forward responses evaluated over a d_c grid. Grid points whose forward
/// run failed are dropped; the count and first messages are kept.
struct ResponseTable {
  std::vector<double> dc_grid;
  std::vector<std::vector<double>> responses;
  std::size_t n_failed = 0;
  std::vector<std::string> failure_messages;
};

/// Evaluate the forward map over a grid, optionally in parallel
/// (n_threads = 0 picks hardware concurrency). Results are assembled in
/// grid order and independent of the thread count.
ResponseTable build_response_table(const std::vector<double>& grid, const ForwardSetup& setup,
                                   unsigned n_threads = 0);

struct FitOptions {
  std::size_t n_scan = 64;                  // coarse grid size
  GridSpacing spacing = GridSpacing::Log;
  double rel_width = 1e-4;                  // golden-section stop criterion
  unsigned n_threads = 0;
};

struct FitResult {
  double d_c_hat = 0.0;
  double sse = 0.0;
  double bracket_lo = 0.0;   // interval known to contain the minimizer
  double bracket_hi = 0.0;
  bool boundary = false;     // minimum at a prior bound
  bool multimodal = false;   // several coarse-grid cells tied for the minimum
  bool degenerate = false;   // objective flat across the whole scan
  std::size_t n_evals = 0;
};

/// Least-squares point estimate of d_c over [bounds.lower, bounds.upper]:
/// coarse scan followed by golden-section refinement.
FitResult least_squares_fit(const ObservationSet& obs, const PriorConfig& bounds,
                            const ForwardSetup& setup, const FitOptions& opts = {});

/// Grid-quadrature posterior over d_c. Normalized by trapezoid rule; the
/// uniform prior cancels in the normalization and enters the evidence
/// only.
struct PosteriorGrid {
  std::vector<double> grid;             // d_c [um], ascending
  std::vector<double> log_likelihoods;
  std::vector<double> density;          // normalized [1/um]
  double log_evidence = 0.0;
  PriorConfig prior;
  double sigma_noise = 0.0;
  std::size_t n_failed = 0;

  void validate() const;
};

/// Posterior from a prebuilt response table (the grid extent may be a
/// sub-range of the prior when the caller needs local resolution).
PosteriorGrid grid_posterior(const ObservationSet& obs, const PriorConfig& prior,
                             const ResponseTable& table, double sigma_noise);

/// Convenience one-shot: builds the table over the prior support.
PosteriorGrid grid_posterior(const ObservationSet& obs, const PriorConfig& prior,
                             std::size_t n_grid, GridSpacing spacing, double sigma_noise,
                             const ForwardSetup& setup, unsigned n_threads = 0);

struct McmcConfig {
  std::size_t n_samples = 10000;
  std::size_t burn_in = 2000;      // default 20% of n_samples at the run level
  double proposal_std = 0.0;       // [um]; run level defaults to 5% of prior width
  std::uint64_t seed = 0;
  double init = 0.0;               // start point, must lie inside the prior

  void validate(const PriorConfig& prior) const;
};

struct McmcChain {
  std::vector<double> samples;    // every iteration, burn-in included
  std::vector<double> log_posts;
  double acceptance_rate = 0.0;   // post-burn-in
  std::uint64_t seed = 0;
  double proposal_std = 0.0;
  std::size_t burn_in = 0;
  bool acceptance_warning = false;  // rate outside [0.05, 0.95]

  std::vector<double> post_burn_in() const;
};

/// Random-walk Metropolis on d_c with Gaussian proposals; out-of-support
/// proposals are rejected, which enforces the uniform prior. The
/// log-likelihood is pluggable so priors-only chains cost nothing.
McmcChain mcmc_sample(const std::function<double(double)>& log_like, const PriorConfig& prior,
                      const McmcConfig& cfg);

/// Observation-driven chain: log_like(d_c) = Gaussian likelihood of the
/// forward response at d_c.
McmcChain mcmc_sample(const ObservationSet& obs, const PriorConfig& prior, double sigma_noise,
                      const ForwardSetup& setup, const McmcConfig& cfg);

struct PosteriorSummary {
  double mean = 0.0;
  double mode = 0.0;
  double std_dev = 0.0;
  double ci_level = 0.95;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

/// Moments and equal-tailed credible interval by trapezoid quadrature.
PosteriorSummary posterior_summary(const PosteriorGrid& grid, double level = 0.95);

/// Sample statistics of the post-burn-in chain (mode from a histogram).
PosteriorSummary posterior_summary(const McmcChain& chain, double level = 0.95);

/// Monte-Carlo standard error of the post-burn-in chain mean, by batch
/// means.
double chain_mean_standard_error(const McmcChain& chain, std::size_t n_batches = 50);

} // namespace rsf

#endif
