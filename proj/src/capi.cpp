#include "rsfinv.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "rsf/data_io.hpp"
#include "rsf/errors.hpp"
#include "rsf/inversion.hpp"
#include "rsf/run.hpp"
#include "rsf/solver.hpp"

// Opaque handle definitions; the C layer owns plain copies of the C++
// values so handle lifetimes are independent of each other.
struct rsfinv_config {
  rsf::RunConfig cfg;
};
struct rsfinv_trajectory {
  rsf::Trajectory traj;
};
struct rsfinv_timeseries {
  rsf::TimeSeries ts;
};
struct rsfinv_posterior {
  rsf::PosteriorGrid post;
};
struct rsfinv_chain {
  rsf::McmcChain chain;
};

namespace {

thread_local std::string tl_error;

rsfinv_status fail(rsfinv_status code, const std::string& msg) {
  tl_error = msg;
  return code;
}

template <typename F>
rsfinv_status guard(F&& body) {
  try {
    body();
    return RSFINV_OK;
  } catch (const rsf::ValidationError& e) {
    return fail(RSFINV_ERR_VALIDATION, e.what());
  } catch (const rsf::SolverError& e) {
    return fail(RSFINV_ERR_SOLVER, e.what());
  } catch (const rsf::ModelDomainError& e) {
    return fail(RSFINV_ERR_SOLVER, e.what());
  } catch (const rsf::InversionError& e) {
    return fail(RSFINV_ERR_INVERSION, e.what());
  } catch (const rsf::IoError& e) {
    return fail(RSFINV_ERR_IO, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(RSFINV_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(RSFINV_ERR_INVERSION, std::string("internal error: ") + e.what());
  }
}

rsfinv_status require(bool ok, const char* msg) {
  return ok ? RSFINV_OK : fail(RSFINV_ERR_VALIDATION, msg);
}

/// Read back one config key as text (inverse of rsfinv_config_set).
std::string get_value(const rsf::RunConfig& c, const std::string& key) {
  using rsf::format_double;
  if (key == "model.mu0") return format_double(c.model.mu0);
  if (key == "model.v0") return format_double(c.model.v0);
  if (key == "model.a") return format_double(c.model.a_coef);
  if (key == "model.b") return format_double(c.model.b_coef);
  if (key == "model.d_c") return format_double(c.model.d_c);
  if (key == "model.k_prime") return format_double(c.model.k_prime);
  if (key == "model.k_dprime") return format_double(c.model.k_dprime);
  if (key == "model.dc_list") {
    std::ostringstream out;
    for (std::size_t i = 0; i < c.dc_list.size(); ++i) {
      if (i) out << ',';
      out << format_double(c.dc_list[i]);
    }
    return out.str();
  }
  if (key == "physical.elastic_modulus") return format_double(c.physical.elastic_modulus);
  if (key == "physical.fault_length") return format_double(c.physical.fault_length);
  if (key == "physical.normal_stress") return format_double(c.physical.normal_stress);
  if (key == "physical.damping_coef") return format_double(c.physical.damping_coef);
  if (key == "forcing.shape")
    return c.forcing.shape == rsf::ForcingConfig::Shape::DecayingSinusoid ? "decaying_sinusoid"
                                                                          : "velocity_step";
  if (key == "forcing.baseline") return format_double(c.forcing.baseline);
  if (key == "forcing.amplitude") return format_double(c.forcing.amplitude);
  if (key == "forcing.decay_time") return format_double(c.forcing.decay_time);
  if (key == "forcing.oscillation_time") return format_double(c.forcing.oscillation_time);
  if (key == "forcing.v_before") return format_double(c.forcing.v_before);
  if (key == "forcing.v_after") return format_double(c.forcing.v_after);
  if (key == "forcing.step_time") return format_double(c.forcing.step_time);
  if (key == "solver.t_start") return format_double(c.solver.t_start);
  if (key == "solver.t_end") return format_double(c.solver.t_end);
  if (key == "solver.output_dt") return format_double(c.solver.output_dt);
  if (key == "solver.abs_tol") return format_double(c.solver.abs_tol);
  if (key == "solver.rel_tol") return format_double(c.solver.rel_tol);
  if (key == "solver.max_step") return format_double(c.solver.max_step);
  if (key == "solver.rk4_dt") return format_double(c.solver.rk4_dt);
  if (key == "solver.method")
    return c.solver.method == rsf::SolverMethod::Adaptive ? "adaptive" : "rk4";
  if (key == "solver.damping")
    return c.solver.damping == rsf::DampingScheme::TwoPass ? "two_pass" : "implicit_exact";
  if (key == "prior.lower") return format_double(c.prior.lower);
  if (key == "prior.upper") return format_double(c.prior.upper);
  if (key == "noise.sigma")
    return c.noise.mode == rsf::NoiseModel::Mode::Estimated ? "auto"
                                                            : format_double(c.noise.sigma);
  if (key == "grid.n") return std::to_string(c.grid_n);
  if (key == "grid.spacing") return c.grid_spacing == rsf::GridSpacing::Log ? "log" : "lin";
  if (key == "mcmc.samples") return std::to_string(c.mcmc_samples);
  if (key == "mcmc.burn_in") return std::to_string(c.mcmc_burn_in);
  if (key == "mcmc.proposal_std") return format_double(c.mcmc_proposal_std);
  if (key == "mcmc.init") return format_double(c.mcmc_init);
  if (key == "synth.d_c_true") return format_double(c.synth_d_c_true);
  if (key == "synth.n_obs") return std::to_string(c.synth_n_obs);
  if (key == "synth.sigma") return format_double(c.synth_sigma);
  if (key == "io.obs") return c.obs_path;
  if (key == "io.out_dir") return c.out_dir;
  if (key == "run.seed") return std::to_string(c.seed);
  if (key == "run.threads") return std::to_string(c.n_threads);
  if (key == "run.quiet") return c.quiet ? "true" : "false";
  throw rsf::ValidationError("config: unknown key '" + key + "'");
}

rsf::ObservationSet observations_of(const rsfinv_timeseries* obs) {
  return obs->ts.to_observations();
}

} // namespace

extern "C" {

const char* rsfinv_version(void) { return "0.1.0"; }

const char* rsfinv_last_error(void) { return tl_error.c_str(); }

rsfinv_config* rsfinv_config_new(void) { return new rsfinv_config(); }

void rsfinv_config_free(rsfinv_config* cfg) { delete cfg; }

rsfinv_status rsfinv_config_load(rsfinv_config* cfg, const char* path) {
  if (auto s = require(cfg && path, "rsfinv_config_load: null argument")) return s;
  return guard([&] { cfg->cfg.load_file(path); });
}

rsfinv_status rsfinv_config_set(rsfinv_config* cfg, const char* key, const char* value) {
  if (auto s = require(cfg && key && value, "rsfinv_config_set: null argument")) return s;
  return guard([&] { cfg->cfg.set(key, value); });
}

rsfinv_status rsfinv_config_get(const rsfinv_config* cfg, const char* key, char* buf,
                                size_t buf_size) {
  if (auto s = require(cfg && key && buf && buf_size > 0, "rsfinv_config_get: null argument"))
    return s;
  return guard([&] {
    std::string v = get_value(cfg->cfg, key);
    std::size_t n = std::min(v.size(), buf_size - 1);
    std::memcpy(buf, v.data(), n);
    buf[n] = '\0';
  });
}

rsfinv_status rsfinv_config_validate(const rsfinv_config* cfg) {
  if (auto s = require(cfg != nullptr, "rsfinv_config_validate: null argument")) return s;
  return guard([&] { cfg->cfg.validate(); });
}

/* ---- simulation -------------------------------------------------------- */

rsfinv_status rsfinv_simulate(const rsfinv_config* cfg, double d_c, rsfinv_trajectory** out) {
  if (auto s = require(cfg && out, "rsfinv_simulate: null argument")) return s;
  *out = nullptr;
  return guard([&] {
    cfg->cfg.validate();
    rsf::RsfParams p = cfg->cfg.model.with_d_c(d_c);
    p.validate();
    rsf::SliderState y0 = rsf::default_initial_state(p);
    auto traj = rsf::integrate(p, cfg->cfg.forcing, y0, cfg->cfg.solver);
    *out = new rsfinv_trajectory{std::move(traj)};
  });
}

void rsfinv_trajectory_free(rsfinv_trajectory* traj) { delete traj; }

size_t rsfinv_trajectory_size(const rsfinv_trajectory* traj) {
  return traj ? traj->traj.size() : 0;
}

rsfinv_status rsfinv_trajectory_column(const rsfinv_trajectory* traj, int column, double* out,
                                       size_t out_len) {
  if (auto s = require(traj && out, "rsfinv_trajectory_column: null argument")) return s;
  if (auto s = require(column >= RSFINV_COL_T && column <= RSFINV_COL_A,
                       "rsfinv_trajectory_column: column out of range"))
    return s;
  if (auto s = require(out_len >= traj->traj.size(), "rsfinv_trajectory_column: buffer too small"))
    return s;
  return guard([&] {
    const auto& tr = traj->traj;
    for (std::size_t i = 0; i < tr.size(); ++i) {
      switch (column) {
        case RSFINV_COL_T: out[i] = tr.times[i]; break;
        case RSFINV_COL_MU: out[i] = tr.states[i].mu; break;
        case RSFINV_COL_THETA: out[i] = tr.states[i].theta; break;
        case RSFINV_COL_V: out[i] = tr.states[i].v; break;
        case RSFINV_COL_A: out[i] = tr.states[i].a; break;
      }
    }
  });
}

rsfinv_status rsfinv_trajectory_write_csv(const rsfinv_trajectory* traj, const char* path) {
  if (auto s = require(traj && path, "rsfinv_trajectory_write_csv: null argument")) return s;
  return guard([&] { rsf::write_trajectory_csv(traj->traj, path); });
}

/* ---- observations ------------------------------------------------------ */

rsfinv_status rsfinv_timeseries_read(const char* path, const char* unit_hint,
                                     rsfinv_timeseries** out) {
  if (auto s = require(path && out, "rsfinv_timeseries_read: null argument")) return s;
  *out = nullptr;
  return guard([&] {
    rsf::SeismogramFormat fmt;
    if (unit_hint) {
      std::string hint = unit_hint;
      std::replace(hint.begin(), hint.end(), '_', '/');
      auto u = rsf::parse_unit(hint);
      if (!u)
        throw rsf::ValidationError(std::string("unknown unit hint '") + unit_hint + "'");
      fmt.unit = *u;
    }
    rsf::TimeSeries ts = rsf::read_seismogram(path, fmt);
    ts = rsf::convert_units(ts, rsf::AccelUnit::UmPerS2);
    *out = new rsfinv_timeseries{std::move(ts)};
  });
}

rsfinv_status rsfinv_synthesize(const rsfinv_config* cfg, rsfinv_timeseries** out) {
  if (auto s = require(cfg && out, "rsfinv_synthesize: null argument")) return s;
  *out = nullptr;
  return guard([&] {
    cfg->cfg.validate();
    auto setup = cfg->cfg.forward_setup(cfg->cfg.synth_times());
    auto ts = rsf::generate_synthetic(cfg->cfg.synth_d_c_true, setup, cfg->cfg.synth_sigma,
                                      cfg->cfg.seed);
    *out = new rsfinv_timeseries{std::move(ts)};
  });
}

void rsfinv_timeseries_free(rsfinv_timeseries* ts) { delete ts; }

size_t rsfinv_timeseries_size(const rsfinv_timeseries* ts) { return ts ? ts->ts.size() : 0; }

rsfinv_status rsfinv_timeseries_data(const rsfinv_timeseries* ts, double* times, double* values,
                                     size_t len) {
  if (auto s = require(ts && times && values, "rsfinv_timeseries_data: null argument")) return s;
  if (auto s = require(len >= ts->ts.size(), "rsfinv_timeseries_data: buffer too small"))
    return s;
  return guard([&] {
    std::copy(ts->ts.times.begin(), ts->ts.times.end(), times);
    std::copy(ts->ts.values.begin(), ts->ts.values.end(), values);
  });
}

rsfinv_status rsfinv_timeseries_write_csv(const rsfinv_timeseries* ts, const char* path) {
  if (auto s = require(ts && path, "rsfinv_timeseries_write_csv: null argument")) return s;
  return guard([&] { rsf::write_timeseries_csv(ts->ts, path); });
}

/* ---- inversion --------------------------------------------------------- */

rsfinv_status rsfinv_fit(const rsfinv_config* cfg, const rsfinv_timeseries* obs,
                         rsfinv_fit_result* out) {
  if (auto s = require(cfg && obs && out, "rsfinv_fit: null argument")) return s;
  return guard([&] {
    cfg->cfg.validate();
    auto o = observations_of(obs);
    auto setup = cfg->cfg.forward_setup(o.times);
    rsf::FitOptions fo;
    fo.n_threads = cfg->cfg.n_threads;
    rsf::FitResult fit = rsf::least_squares_fit(o, cfg->cfg.prior, setup, fo);
    out->d_c_hat = fit.d_c_hat;
    out->sse = fit.sse;
    out->bracket_lo = fit.bracket_lo;
    out->bracket_hi = fit.bracket_hi;
    out->boundary = fit.boundary ? 1 : 0;
    out->multimodal = fit.multimodal ? 1 : 0;
    out->degenerate = fit.degenerate ? 1 : 0;
  });
}

rsfinv_status rsfinv_grid_posterior(const rsfinv_config* cfg, const rsfinv_timeseries* obs,
                                    rsfinv_posterior** out) {
  if (auto s = require(cfg && obs && out, "rsfinv_grid_posterior: null argument")) return s;
  *out = nullptr;
  return guard([&] {
    cfg->cfg.validate();
    auto o = observations_of(obs);
    auto setup = cfg->cfg.forward_setup(o.times);
    double sigma = cfg->cfg.resolve_sigma(o, setup);
    auto post = rsf::grid_posterior(o, cfg->cfg.prior, cfg->cfg.grid_n, cfg->cfg.grid_spacing,
                                    sigma, setup, cfg->cfg.n_threads);
    *out = new rsfinv_posterior{std::move(post)};
  });
}

void rsfinv_posterior_free(rsfinv_posterior* post) { delete post; }

size_t rsfinv_posterior_size(const rsfinv_posterior* post) {
  return post ? post->post.grid.size() : 0;
}

rsfinv_status rsfinv_posterior_column(const rsfinv_posterior* post, int column, double* out,
                                      size_t out_len) {
  if (auto s = require(post && out, "rsfinv_posterior_column: null argument")) return s;
  if (auto s = require(column >= RSFINV_POST_DC && column <= RSFINV_POST_DENSITY,
                       "rsfinv_posterior_column: column out of range"))
    return s;
  if (auto s = require(out_len >= post->post.grid.size(),
                       "rsfinv_posterior_column: buffer too small"))
    return s;
  return guard([&] {
    const auto& g = post->post;
    const std::vector<double>& src = (column == RSFINV_POST_DC)        ? g.grid
                                     : (column == RSFINV_POST_LOGLIKE) ? g.log_likelihoods
                                                                       : g.density;
    std::copy(src.begin(), src.end(), out);
  });
}

rsfinv_status rsfinv_posterior_write_csv(const rsfinv_posterior* post, const char* path) {
  if (auto s = require(post && path, "rsfinv_posterior_write_csv: null argument")) return s;
  return guard([&] { rsf::write_posterior_csv(post->post, path); });
}

rsfinv_status rsfinv_mcmc(const rsfinv_config* cfg, const rsfinv_timeseries* obs,
                          rsfinv_chain** out) {
  if (auto s = require(cfg && obs && out, "rsfinv_mcmc: null argument")) return s;
  *out = nullptr;
  return guard([&] {
    cfg->cfg.validate();
    auto o = observations_of(obs);
    auto setup = cfg->cfg.forward_setup(o.times);
    double hint = std::numeric_limits<double>::quiet_NaN();
    double sigma = cfg->cfg.resolve_sigma(o, setup, &hint);
    rsf::McmcConfig mc = rsf::resolve_mcmc_config(cfg->cfg, o, setup, hint);
    auto chain = rsf::mcmc_sample(o, cfg->cfg.prior, sigma, setup, mc);
    *out = new rsfinv_chain{std::move(chain)};
  });
}

void rsfinv_chain_free(rsfinv_chain* chain) { delete chain; }

size_t rsfinv_chain_size(const rsfinv_chain* chain) {
  return chain ? chain->chain.samples.size() : 0;
}

rsfinv_status rsfinv_chain_samples(const rsfinv_chain* chain, double* out, size_t out_len) {
  if (auto s = require(chain && out, "rsfinv_chain_samples: null argument")) return s;
  if (auto s = require(out_len >= chain->chain.samples.size(),
                       "rsfinv_chain_samples: buffer too small"))
    return s;
  return guard(
      [&] { std::copy(chain->chain.samples.begin(), chain->chain.samples.end(), out); });
}

double rsfinv_chain_acceptance_rate(const rsfinv_chain* chain) {
  return chain ? chain->chain.acceptance_rate : 0.0;
}

rsfinv_status rsfinv_chain_write_csv(const rsfinv_chain* chain, const char* path) {
  if (auto s = require(chain && path, "rsfinv_chain_write_csv: null argument")) return s;
  return guard([&] { rsf::write_chain_csv(chain->chain, path); });
}

rsfinv_status rsfinv_posterior_summary(const rsfinv_posterior* post, double level,
                                       rsfinv_summary* out) {
  if (auto s = require(post && out, "rsfinv_posterior_summary: null argument")) return s;
  return guard([&] {
    rsf::PosteriorSummary s = rsf::posterior_summary(post->post, level);
    *out = {s.mean, s.mode, s.std_dev, s.ci_level, s.ci_lo, s.ci_hi};
  });
}

rsfinv_status rsfinv_chain_summary(const rsfinv_chain* chain, double level,
                                   rsfinv_summary* out) {
  if (auto s = require(chain && out, "rsfinv_chain_summary: null argument")) return s;
  return guard([&] {
    rsf::PosteriorSummary s = rsf::posterior_summary(chain->chain, level);
    *out = {s.mean, s.mode, s.std_dev, s.ci_level, s.ci_lo, s.ci_hi};
  });
}

/* ---- command level ------------------------------------------------------ */

rsfinv_status rsfinv_cmd_simulate(const rsfinv_config* cfg) {
  if (auto s = require(cfg != nullptr, "rsfinv_cmd_simulate: null argument")) return s;
  return guard([&] { rsf::run_simulate(cfg->cfg); });
}

rsfinv_status rsfinv_cmd_synth(const rsfinv_config* cfg) {
  if (auto s = require(cfg != nullptr, "rsfinv_cmd_synth: null argument")) return s;
  return guard([&] { rsf::run_synth(cfg->cfg); });
}

rsfinv_status rsfinv_cmd_fit(const rsfinv_config* cfg) {
  if (auto s = require(cfg != nullptr, "rsfinv_cmd_fit: null argument")) return s;
  return guard([&] { rsf::run_fit(cfg->cfg); });
}

rsfinv_status rsfinv_cmd_posterior(const rsfinv_config* cfg) {
  if (auto s = require(cfg != nullptr, "rsfinv_cmd_posterior: null argument")) return s;
  return guard([&] { rsf::run_posterior(cfg->cfg); });
}

rsfinv_status rsfinv_cmd_mcmc(const rsfinv_config* cfg) {
  if (auto s = require(cfg != nullptr, "rsfinv_cmd_mcmc: null argument")) return s;
  return guard([&] { rsf::run_mcmc(cfg->cfg); });
}

rsfinv_status rsfinv_cmd_summarize(const rsfinv_config* cfg, const char* const* inputs,
                                   size_t n_inputs) {
  if (auto s = require(cfg && (inputs || n_inputs == 0), "rsfinv_cmd_summarize: null argument"))
    return s;
  return guard([&] {
    std::vector<std::string> paths;
    paths.reserve(n_inputs);
    for (size_t i = 0; i < n_inputs; ++i) {
      if (!inputs[i]) throw rsf::ValidationError("rsfinv_cmd_summarize: null input path");
      paths.emplace_back(inputs[i]);
    }
    rsf::run_summarize(cfg->cfg, paths);
  });
}

} // extern "C"
