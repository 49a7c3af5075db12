#ifndef RSF_RUN_HPP
#define RSF_RUN_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "rsf/data_io.hpp"
#include "rsf/inversion.hpp"

namespace rsf {

/// Unified run configuration: the model, forcing, solver, prior, noise
/// and sampler settings plus I/O paths. Loadable from sectioned
/// key=value files with later sources (command-line flags) overriding.
struct RunConfig {
  RsfParams model;
  std::vector<double> dc_list{20.0};  // d_c values for simulate sweeps

  // optional SI constants; when given they must reproduce k', k''
  bool have_physical = false;
  PhysicalConstants physical;

  ForcingConfig forcing;
  SolverConfig solver;
  PriorConfig prior;
  NoiseModel noise;

  std::size_t grid_n = 200;
  GridSpacing grid_spacing = GridSpacing::Log;
  unsigned n_threads = 0;

  // sampler
  std::size_t mcmc_samples = 10000;
  std::int64_t mcmc_burn_in = -1;      // <0: 20% of mcmc_samples
  double mcmc_proposal_std = -1.0;     // <0: 5% of prior width
  double mcmc_init = -1.0;             // <0: start at the least-squares fit
  std::uint64_t seed = 0;

  // synthesis
  double synth_d_c_true = 20.0;
  std::size_t synth_n_obs = 5000;
  double synth_sigma = 0.0;

  // I/O
  std::string obs_path;
  std::string out_dir = ".";
  bool quiet = false;

  /// Apply "section.key=value"; unknown keys throw ValidationError.
  void set(const std::string& key, const std::string& value);

  /// Merge a sectioned key=value file into this config.
  void load_file(const std::string& path);

  /// Full cross-field validation; nothing executes on an invalid config.
  void validate() const;

  /// Observation times used by synth: n_obs points t_start + i*dt,
  /// i = 1..n_obs, dt = (t_end - t_start)/n_obs.
  std::vector<double> synth_times() const;

  ForwardSetup forward_setup(std::vector<double> times) const;

  /// Resolve NoiseModel to a concrete sigma (estimates it from the
  /// least-squares fit when mode is Estimated).
  double resolve_sigma(const ObservationSet& obs, const ForwardSetup& setup,
                       double* d_c_fit_hint = nullptr) const;
};

/// Sampler settings with run-level defaults filled in: burn-in (20% of
/// the samples), proposal width (5% of the prior width) and start point
/// (the least-squares fit; pass a non-NaN hint to reuse one already
/// computed).
McmcConfig resolve_mcmc_config(const RunConfig& cfg, const ObservationSet& obs,
                               const ForwardSetup& setup, double d_c_fit_hint);

/// Artifacts written by a command, echoed (with hashes) in its manifest.
struct RunOutputs {
  std::vector<std::string> files;
};

// Each command validates its config, runs, writes its artifacts plus a
// "<command>.manifest.json" under cfg.out_dir, and returns the artifact
// list. Errors surface as the exception types in errors.hpp.
RunOutputs run_simulate(const RunConfig& cfg);
RunOutputs run_synth(const RunConfig& cfg);
RunOutputs run_fit(const RunConfig& cfg);
RunOutputs run_posterior(const RunConfig& cfg);
RunOutputs run_mcmc(const RunConfig& cfg);
RunOutputs run_summarize(const RunConfig& cfg, const std::vector<std::string>& inputs);

} // namespace rsf

#endif
