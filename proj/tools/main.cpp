// rsfinv command-line tool: simulate | synth | fit | posterior | mcmc |
// summarize. A thin shell over the rsfinv C API; every run writes its
// artifacts plus a manifest into the output directory.
#include <cstdio>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "rsfinv.h"

namespace {

constexpr const char* kKeyHelp = R"(Config keys (file sections map to prefixes, e.g. [model] mu0 -> model.mu0):
  model.mu0                 reference friction coefficient [-]
  model.v0                  reference slip rate [um/s]
  model.a                   direct-effect constant A [-]
  model.b                   evolution-effect constant B [-]
  model.d_c                 critical slip distance [um]
  model.dc_list             comma-separated d_c sweep for simulate [um]
  model.k_prime             spring stiffness k' = E/(l*sigma) [1/um]
  model.k_dprime            radiation damping k'' = eta/sigma [s/um]
  physical.elastic_modulus  E [Pa]; optional, must reproduce k'
  physical.fault_length     l [m]
  physical.normal_stress    sigma [Pa]
  physical.damping_coef     eta [Pa s/m]
  forcing.shape             decaying_sinusoid | velocity_step
  forcing.baseline          load-point baseline velocity [um/s]
  forcing.amplitude         sinusoid amplitude [um/s]
  forcing.decay_time        envelope decay time [s]
  forcing.oscillation_time  sinusoid time scale [s]
  forcing.v_before          step velocity before step_time [um/s]
  forcing.v_after           step velocity after step_time [um/s]
  forcing.step_time         step instant [s]
  solver.t_start            window start [s]
  solver.t_end              window end [s]
  solver.output_dt          reporting interval [s]
  solver.abs_tol            absolute error tolerance [-]
  solver.rel_tol            relative error tolerance [-]
  solver.max_step           adaptive step cap [s]
  solver.rk4_dt             fixed RK4 step [s]
  solver.method             adaptive | rk4
  solver.damping            two_pass | implicit_exact
  prior.lower               d_c prior lower bound [um]
  prior.upper               d_c prior upper bound [um]
  noise.sigma               noise std [um/s^2], or 'auto' to estimate
  grid.n                    posterior grid size [-]
  grid.spacing              log | lin
  mcmc.samples              chain length [-]
  mcmc.burn_in              discarded iterations (default: 20% of samples)
  mcmc.proposal_std         random-walk step [um] (default: 5% of prior width)
  mcmc.init                 chain start [um] (default: least-squares fit)
  synth.d_c_true            generating critical slip distance [um]
  synth.n_obs               number of synthetic observations [-]
  synth.sigma               synthetic noise std [um/s^2]
  io.obs                    observation file path
  io.out_dir                artifact output directory
  run.seed                  RNG seed [-]
  run.threads               worker threads (0 = all hardware threads)
  run.quiet                 suppress the status line (true|false)

Exit codes: 0 ok, 1 validation, 2 solver failure, 3 inversion failure, 4 I/O.)";

using ConfigPtr = std::unique_ptr<rsfinv_config, decltype(&rsfinv_config_free)>;

struct CommonOpts {
  std::string config_file;
  std::string out_dir;
  std::string seed;
  std::string threads;
  std::string dc_grid;
  std::string sigma_noise;
  std::vector<std::string> sets;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_file, "Config file (sectioned key=value)");
  cmd->add_option("--out", o.out_dir, "Output directory for artifacts");
  cmd->add_option("--seed", o.seed, "RNG seed");
  cmd->add_option("--threads", o.threads, "Worker threads (0 = all)");
  cmd->add_option("--dc-grid", o.dc_grid, "Prior and grid as lo:hi:n[:log|lin] (um)");
  cmd->add_option("--sigma-noise", o.sigma_noise, "Noise std (um/s^2) or 'auto'");
  cmd->add_option("--set", o.sets, "Override any config key as key=value (applied last)")
      ->type_name("KEY=VALUE");
  cmd->add_flag("--quiet", o.quiet, "Suppress the status line");
  cmd->footer(kKeyHelp);
}

int report_failure(rsfinv_status s) {
  std::fprintf(stderr, "error: %s\n", rsfinv_last_error());
  return static_cast<int>(s);
}

int set_or_fail(rsfinv_config* cfg, const std::string& key, const std::string& value) {
  if (rsfinv_status s = rsfinv_config_set(cfg, key.c_str(), value.c_str()))
    return report_failure(s);
  return 0;
}

/// Apply config file, then flag overrides, in "flags win" order.
int apply_common(rsfinv_config* cfg, const CommonOpts& o,
                 const std::vector<std::pair<std::string, std::string>>& extra) {
  if (!o.config_file.empty())
    if (rsfinv_status s = rsfinv_config_load(cfg, o.config_file.c_str()))
      return report_failure(s);
  if (!o.out_dir.empty())
    if (int rc = set_or_fail(cfg, "io.out_dir", o.out_dir)) return rc;
  if (!o.seed.empty())
    if (int rc = set_or_fail(cfg, "run.seed", o.seed)) return rc;
  if (!o.threads.empty())
    if (int rc = set_or_fail(cfg, "run.threads", o.threads)) return rc;
  if (!o.sigma_noise.empty())
    if (int rc = set_or_fail(cfg, "noise.sigma", o.sigma_noise)) return rc;
  if (o.quiet)
    if (int rc = set_or_fail(cfg, "run.quiet", "true")) return rc;
  if (!o.dc_grid.empty()) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : o.dc_grid) {
      if (c == ':') {
        parts.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    parts.push_back(cur);
    if (parts.size() != 3 && parts.size() != 4) {
      std::fprintf(stderr, "error: --dc-grid expects lo:hi:n or lo:hi:n:log|lin\n");
      return static_cast<int>(RSFINV_ERR_VALIDATION);
    }
    if (int rc = set_or_fail(cfg, "prior.lower", parts[0])) return rc;
    if (int rc = set_or_fail(cfg, "prior.upper", parts[1])) return rc;
    if (int rc = set_or_fail(cfg, "grid.n", parts[2])) return rc;
    if (parts.size() == 4)
      if (int rc = set_or_fail(cfg, "grid.spacing", parts[3])) return rc;
  }
  for (const auto& [key, value] : extra)
    if (int rc = set_or_fail(cfg, key, value)) return rc;
  for (const auto& kv : o.sets) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", kv.c_str());
      return static_cast<int>(RSFINV_ERR_VALIDATION);
    }
    if (int rc = set_or_fail(cfg, kv.substr(0, eq), kv.substr(eq + 1))) return rc;
  }
  return 0;
}

int finish(rsfinv_config* cfg, const char* command, rsfinv_status s) {
  if (s != RSFINV_OK) return report_failure(s);
  char quiet[8] = "false";
  rsfinv_config_get(cfg, "run.quiet", quiet, sizeof(quiet));
  if (std::string(quiet) != "true") {
    char out_dir[4096] = ".";
    rsfinv_config_get(cfg, "io.out_dir", out_dir, sizeof(out_dir));
    std::printf("%s: wrote artifacts to %s (see %s.manifest.json)\n", command, out_dir,
                command);
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rate-and-state friction slider simulation and critical-slip-distance "
               "(d_c) uncertainty quantification"};
  app.require_subcommand(1);
  app.footer(kKeyHelp);

  CommonOpts sim_o, synth_o, fit_o, post_o, mcmc_o, sum_o;
  std::string sim_dc, synth_dc_true, synth_n_obs, synth_sigma;
  std::string fit_obs, post_obs, mcmc_obs, mcmc_samples, mcmc_burn_in, mcmc_proposal, mcmc_init;
  std::vector<std::string> sum_inputs;

  CLI::App* sim = app.add_subcommand("simulate", "Integrate the slider and write trajectories");
  add_common(sim, sim_o);
  sim->add_option("--dc", sim_dc, "Comma-separated d_c sweep (um)");

  CLI::App* synth = app.add_subcommand("synth", "Generate noisy synthetic observations");
  add_common(synth, synth_o);
  synth->add_option("--dc-true", synth_dc_true, "Generating d_c (um)");
  synth->add_option("--n-obs", synth_n_obs, "Number of observations");
  synth->add_option("--sigma", synth_sigma, "Noise std (um/s^2)");

  CLI::App* fit = app.add_subcommand("fit", "Least-squares estimate of d_c");
  add_common(fit, fit_o);
  fit->add_option("--obs", fit_obs, "Observation file");

  CLI::App* post = app.add_subcommand("posterior", "Grid-quadrature posterior over d_c");
  add_common(post, post_o);
  post->add_option("--obs", post_obs, "Observation file");

  CLI::App* mcmc = app.add_subcommand("mcmc", "Metropolis random-walk sampling of d_c");
  add_common(mcmc, mcmc_o);
  mcmc->add_option("--obs", mcmc_obs, "Observation file");
  mcmc->add_option("--samples", mcmc_samples, "Chain length");
  mcmc->add_option("--burn-in", mcmc_burn_in, "Discarded iterations");
  mcmc->add_option("--proposal-std", mcmc_proposal, "Random-walk step (um)");
  mcmc->add_option("--init", mcmc_init, "Chain start (um)");

  CLI::App* sum = app.add_subcommand("summarize", "Merge artifacts into a combined report");
  add_common(sum, sum_o);
  sum->add_option("inputs", sum_inputs, "Artifact files (posterior/chain/series CSV, manifest JSON)")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(RSFINV_ERR_VALIDATION);
  }

  ConfigPtr cfg(rsfinv_config_new(), &rsfinv_config_free);
  std::vector<std::pair<std::string, std::string>> extra;

  if (app.got_subcommand(sim)) {
    if (!sim_dc.empty()) extra.emplace_back("model.dc_list", sim_dc);
    if (int rc = apply_common(cfg.get(), sim_o, extra)) return rc;
    return finish(cfg.get(), "simulate", rsfinv_cmd_simulate(cfg.get()));
  }
  if (app.got_subcommand(synth)) {
    if (!synth_dc_true.empty()) extra.emplace_back("synth.d_c_true", synth_dc_true);
    if (!synth_n_obs.empty()) extra.emplace_back("synth.n_obs", synth_n_obs);
    if (!synth_sigma.empty()) extra.emplace_back("synth.sigma", synth_sigma);
    if (int rc = apply_common(cfg.get(), synth_o, extra)) return rc;
    return finish(cfg.get(), "synth", rsfinv_cmd_synth(cfg.get()));
  }
  if (app.got_subcommand(fit)) {
    if (!fit_obs.empty()) extra.emplace_back("io.obs", fit_obs);
    if (int rc = apply_common(cfg.get(), fit_o, extra)) return rc;
    return finish(cfg.get(), "fit", rsfinv_cmd_fit(cfg.get()));
  }
  if (app.got_subcommand(post)) {
    if (!post_obs.empty()) extra.emplace_back("io.obs", post_obs);
    if (int rc = apply_common(cfg.get(), post_o, extra)) return rc;
    return finish(cfg.get(), "posterior", rsfinv_cmd_posterior(cfg.get()));
  }
  if (app.got_subcommand(mcmc)) {
    if (!mcmc_obs.empty()) extra.emplace_back("io.obs", mcmc_obs);
    if (!mcmc_samples.empty()) extra.emplace_back("mcmc.samples", mcmc_samples);
    if (!mcmc_burn_in.empty()) extra.emplace_back("mcmc.burn_in", mcmc_burn_in);
    if (!mcmc_proposal.empty()) extra.emplace_back("mcmc.proposal_std", mcmc_proposal);
    if (!mcmc_init.empty()) extra.emplace_back("mcmc.init", mcmc_init);
    if (int rc = apply_common(cfg.get(), mcmc_o, extra)) return rc;
    return finish(cfg.get(), "mcmc", rsfinv_cmd_mcmc(cfg.get()));
  }
  if (app.got_subcommand(sum)) {
    if (int rc = apply_common(cfg.get(), sum_o, extra)) return rc;
    std::vector<const char*> ptrs;
    ptrs.reserve(sum_inputs.size());
    for (const auto& p : sum_inputs) ptrs.push_back(p.c_str());
    return finish(cfg.get(), "summarize",
                  rsfinv_cmd_summarize(cfg.get(), ptrs.data(), ptrs.size()));
  }
  return static_cast<int>(RSFINV_ERR_VALIDATION);
}
