#include "rsf/run.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "rsf/errors.hpp"
#include "rsf/rng.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace rsf {

namespace {

double parse_double_value(const std::string& key, const std::string& value) {
  const char* begin = value.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  while (end && *end && std::isspace(static_cast<unsigned char>(*end))) ++end;
  if (end == begin || (end && *end != '\0'))
    throw ValidationError("config: " + key + ": not a number: '" + value + "'");
  return v;
}

std::uint64_t parse_u64_value(const std::string& key, const std::string& value) {
  double v = parse_double_value(key, value);
  if (v < 0 || v != std::floor(v))
    throw ValidationError("config: " + key + ": not a non-negative integer: '" + value + "'");
  return static_cast<std::uint64_t>(v);
}

bool parse_bool_value(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ValidationError("config: " + key + ": not a boolean: '" + value + "'");
}

std::string trim_copy(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string shape_name(ForcingConfig::Shape s) {
  return s == ForcingConfig::Shape::DecayingSinusoid ? "decaying_sinusoid" : "velocity_step";
}

std::string method_name(SolverMethod m) {
  return m == SolverMethod::Adaptive ? "adaptive" : "rk4";
}

std::string damping_name(DampingScheme d) {
  return d == DampingScheme::TwoPass ? "two_pass" : "implicit_exact";
}

std::string spacing_name(GridSpacing s) {
  return s == GridSpacing::Log ? "log" : "lin";
}

std::size_t resolved_burn_in(const RunConfig& cfg) {
  if (cfg.mcmc_burn_in >= 0) return static_cast<std::size_t>(cfg.mcmc_burn_in);
  return cfg.mcmc_samples / 5;
}

double resolved_proposal_std(const RunConfig& cfg) {
  if (cfg.mcmc_proposal_std > 0.0) return cfg.mcmc_proposal_std;
  return 0.05 * cfg.prior.width();
}

std::string fmt_g(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", x);
  return buf;
}

ordered_json config_json(const RunConfig& cfg) {
  ordered_json j;
  j["model"] = {{"mu0", cfg.model.mu0},
                {"v0", cfg.model.v0},
                {"a", cfg.model.a_coef},
                {"b", cfg.model.b_coef},
                {"d_c", cfg.model.d_c},
                {"k_prime", cfg.model.k_prime},
                {"k_dprime", cfg.model.k_dprime}};
  j["dc_list"] = cfg.dc_list;
  if (cfg.have_physical) {
    j["physical"] = {{"elastic_modulus", cfg.physical.elastic_modulus},
                     {"fault_length", cfg.physical.fault_length},
                     {"normal_stress", cfg.physical.normal_stress},
                     {"damping_coef", cfg.physical.damping_coef}};
  } else {
    j["physical"] = nullptr;
  }
  ordered_json f;
  f["shape"] = shape_name(cfg.forcing.shape);
  if (cfg.forcing.shape == ForcingConfig::Shape::DecayingSinusoid) {
    f["baseline"] = cfg.forcing.baseline;
    f["amplitude"] = cfg.forcing.amplitude;
    f["decay_time"] = cfg.forcing.decay_time;
    f["oscillation_time"] = cfg.forcing.oscillation_time;
  } else {
    f["v_before"] = cfg.forcing.v_before;
    f["v_after"] = cfg.forcing.v_after;
    f["step_time"] = cfg.forcing.step_time;
  }
  j["forcing"] = f;
  j["solver"] = {{"t_start", cfg.solver.t_start},   {"t_end", cfg.solver.t_end},
                 {"output_dt", cfg.solver.output_dt}, {"abs_tol", cfg.solver.abs_tol},
                 {"rel_tol", cfg.solver.rel_tol},   {"max_step", cfg.solver.max_step},
                 {"rk4_dt", cfg.solver.rk4_dt},     {"method", method_name(cfg.solver.method)},
                 {"damping", damping_name(cfg.solver.damping)}};
  j["prior"] = {{"lower", cfg.prior.lower}, {"upper", cfg.prior.upper}};
  if (cfg.noise.mode == NoiseModel::Mode::Fixed)
    j["noise"] = {{"mode", "fixed"}, {"sigma", cfg.noise.sigma}};
  else
    j["noise"] = {{"mode", "auto"}};
  j["grid"] = {{"n", cfg.grid_n}, {"spacing", spacing_name(cfg.grid_spacing)}};
  j["mcmc"] = {{"samples", cfg.mcmc_samples},
               {"burn_in", resolved_burn_in(cfg)},
               {"proposal_std", resolved_proposal_std(cfg)},
               {"init", cfg.mcmc_init}};
  j["synth"] = {{"d_c_true", cfg.synth_d_c_true},
                {"n_obs", cfg.synth_n_obs},
                {"sigma", cfg.synth_sigma}};
  j["seed"] = cfg.seed;
  j["io"] = {{"obs", cfg.obs_path}, {"out_dir", cfg.out_dir}};
  j["threads"] = cfg.n_threads;
  return j;
}

void write_json_file(const ordered_json& j, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write file: " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

/// Write "<command>.manifest.json" echoing config, results and artifact
/// hashes. No timestamps: identical runs produce identical manifests.
std::string write_manifest(const RunConfig& cfg, const std::string& command,
                           const std::vector<std::string>& artifact_names,
                           const ordered_json& results) {
  ordered_json m;
  m["schema_version"] = "rsfinv.manifest.v1";
  m["command"] = command;
  m["generator"] = Rng::generator_name();
  m["config"] = config_json(cfg);
  m["results"] = results;
  ordered_json arts = ordered_json::array();
  for (const auto& name : artifact_names) {
    fs::path p = fs::path(cfg.out_dir) / name;
    arts.push_back({{"path", name}, {"hash", hash_file(p.string())}});
  }
  m["artifacts"] = arts;
  fs::path mpath = fs::path(cfg.out_dir) / (command + ".manifest.json");
  write_json_file(m, mpath);
  return mpath.string();
}

ObservationSet load_observations(const RunConfig& cfg) {
  if (cfg.obs_path.empty())
    throw ValidationError("io.obs is required for this command (observation file path)");
  TimeSeries ts = read_seismogram(cfg.obs_path);
  ts = convert_units(ts, AccelUnit::UmPerS2);
  return ts.to_observations();
}

RunOutputs finish(const RunConfig& cfg, const std::string& command,
                  const std::vector<std::string>& artifact_names, const ordered_json& results) {
  RunOutputs out;
  for (const auto& name : artifact_names)
    out.files.push_back((fs::path(cfg.out_dir) / name).string());
  out.files.push_back(write_manifest(cfg, command, artifact_names, results));
  return out;
}

ordered_json summary_json(const PosteriorSummary& s) {
  return ordered_json{{"mean", s.mean},         {"mode", s.mode},
                      {"std_dev", s.std_dev},   {"ci_level", s.ci_level},
                      {"ci_lo", s.ci_lo},       {"ci_hi", s.ci_hi}};
}

} // namespace

void RunConfig::set(const std::string& key, const std::string& value_raw) {
  const std::string value = trim_copy(value_raw);
  auto num = [&] { return parse_double_value(key, value); };
  auto u64 = [&] { return parse_u64_value(key, value); };

  if (key == "model.mu0") model.mu0 = num();
  else if (key == "model.v0") model.v0 = num();
  else if (key == "model.a") model.a_coef = num();
  else if (key == "model.b") model.b_coef = num();
  else if (key == "model.d_c") { model.d_c = num(); dc_list = {model.d_c}; }
  else if (key == "model.k_prime") model.k_prime = num();
  else if (key == "model.k_dprime") model.k_dprime = num();
  else if (key == "model.dc_list") {
    dc_list.clear();
    std::stringstream ss(value);
    std::string tok;
    while (std::getline(ss, tok, ','))
      dc_list.push_back(parse_double_value(key, trim_copy(tok)));
    if (dc_list.empty()) throw ValidationError("config: model.dc_list: empty list");
  }
  else if (key == "physical.elastic_modulus") { physical.elastic_modulus = num(); have_physical = true; }
  else if (key == "physical.fault_length") { physical.fault_length = num(); have_physical = true; }
  else if (key == "physical.normal_stress") { physical.normal_stress = num(); have_physical = true; }
  else if (key == "physical.damping_coef") { physical.damping_coef = num(); have_physical = true; }
  else if (key == "forcing.shape") {
    if (value == "decaying_sinusoid" || value == "sinusoid")
      forcing.shape = ForcingConfig::Shape::DecayingSinusoid;
    else if (value == "velocity_step" || value == "step")
      forcing.shape = ForcingConfig::Shape::VelocityStep;
    else throw ValidationError("config: forcing.shape: unknown shape '" + value + "'");
  }
  else if (key == "forcing.baseline") forcing.baseline = num();
  else if (key == "forcing.amplitude") forcing.amplitude = num();
  else if (key == "forcing.decay_time") forcing.decay_time = num();
  else if (key == "forcing.oscillation_time") forcing.oscillation_time = num();
  else if (key == "forcing.v_before") forcing.v_before = num();
  else if (key == "forcing.v_after") forcing.v_after = num();
  else if (key == "forcing.step_time") forcing.step_time = num();
  else if (key == "solver.t_start") solver.t_start = num();
  else if (key == "solver.t_end") solver.t_end = num();
  else if (key == "solver.output_dt") solver.output_dt = num();
  else if (key == "solver.abs_tol") solver.abs_tol = num();
  else if (key == "solver.rel_tol") solver.rel_tol = num();
  else if (key == "solver.max_step") solver.max_step = num();
  else if (key == "solver.rk4_dt") solver.rk4_dt = num();
  else if (key == "solver.method") {
    if (value == "adaptive") solver.method = SolverMethod::Adaptive;
    else if (value == "rk4") solver.method = SolverMethod::FixedRk4;
    else throw ValidationError("config: solver.method: unknown method '" + value + "'");
  }
  else if (key == "solver.damping") {
    if (value == "two_pass") solver.damping = DampingScheme::TwoPass;
    else if (value == "implicit_exact" || value == "implicit")
      solver.damping = DampingScheme::ImplicitExact;
    else throw ValidationError("config: solver.damping: unknown scheme '" + value + "'");
  }
  else if (key == "prior.lower") prior.lower = num();
  else if (key == "prior.upper") prior.upper = num();
  else if (key == "noise.sigma") {
    if (value == "auto") {
      noise.mode = NoiseModel::Mode::Estimated;
      noise.sigma = 0.0;
    } else {
      noise.mode = NoiseModel::Mode::Fixed;
      noise.sigma = num();
    }
  }
  else if (key == "grid.n") grid_n = static_cast<std::size_t>(u64());
  else if (key == "grid.spacing") {
    if (value == "log") grid_spacing = GridSpacing::Log;
    else if (value == "lin" || value == "linear") grid_spacing = GridSpacing::Linear;
    else throw ValidationError("config: grid.spacing: unknown spacing '" + value + "'");
  }
  else if (key == "mcmc.samples") mcmc_samples = static_cast<std::size_t>(u64());
  else if (key == "mcmc.burn_in") mcmc_burn_in = static_cast<std::int64_t>(u64());
  else if (key == "mcmc.proposal_std") mcmc_proposal_std = num();
  else if (key == "mcmc.init") mcmc_init = num();
  else if (key == "synth.d_c_true") synth_d_c_true = num();
  else if (key == "synth.n_obs") synth_n_obs = static_cast<std::size_t>(u64());
  else if (key == "synth.sigma") synth_sigma = num();
  else if (key == "io.obs") obs_path = value;
  else if (key == "io.out_dir") out_dir = value;
  else if (key == "run.seed") seed = u64();
  else if (key == "run.threads") n_threads = static_cast<unsigned>(u64());
  else if (key == "run.quiet") quiet = parse_bool_value(key, value);
  else throw ValidationError("config: unknown key '" + key + "'");
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::string line, section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string t = trim_copy(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = trim_copy(t.substr(1, t.size() - 2));
      if (section.empty())
        throw ValidationError(path + ":" + std::to_string(line_no) + ": empty section name");
      continue;
    }
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": expected 'key = value' or '[section]'");
    std::string key = trim_copy(t.substr(0, eq));
    std::string value = trim_copy(t.substr(eq + 1));
    if (key.find('.') == std::string::npos) {
      if (section.empty())
        throw ValidationError(path + ":" + std::to_string(line_no) +
                              ": key '" + key + "' outside any [section]");
      key = section + "." + key;
    }
    try {
      set(key, value);
    } catch (const ValidationError& e) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void RunConfig::validate() const {
  model.validate();
  if (dc_list.empty()) throw ValidationError("config: dc_list is empty");
  for (double dc : dc_list)
    if (!(dc > 0.0)) throw ValidationError("config: dc_list entries must be > 0");
  if (have_physical) {
    physical.validate();
    if (!physical.consistent_with(model))
      throw ValidationError(
          "config: physical constants do not reproduce model.k_prime / model.k_dprime");
  }
  forcing.validate();
  solver.validate();
  prior.validate();
  noise.validate();
  if (grid_n < 8) throw ValidationError("config: grid.n must be >= 8");
  if (mcmc_samples < 2) throw ValidationError("config: mcmc.samples must be >= 2");
  if (resolved_burn_in(*this) >= mcmc_samples)
    throw ValidationError("config: mcmc.burn_in must be smaller than mcmc.samples");
  if (mcmc_init >= 0.0 && !prior.contains(mcmc_init))
    throw ValidationError("config: mcmc.init lies outside the prior support");
  if (!(synth_d_c_true > 0.0)) throw ValidationError("config: synth.d_c_true must be > 0");
  if (synth_n_obs < 2) throw ValidationError("config: synth.n_obs must be >= 2");
  if (!(synth_sigma >= 0.0)) throw ValidationError("config: synth.sigma must be >= 0");
  if (out_dir.empty()) throw ValidationError("config: io.out_dir is empty");
}

std::vector<double> RunConfig::synth_times() const {
  double dt = (solver.t_end - solver.t_start) / double(synth_n_obs);
  std::vector<double> times(synth_n_obs);
  for (std::size_t i = 0; i < synth_n_obs; ++i)
    times[i] = solver.t_start + double(i + 1) * dt;
  times.back() = solver.t_end;  // no fp overshoot past the window
  return times;
}

ForwardSetup RunConfig::forward_setup(std::vector<double> times) const {
  ForwardSetup setup;
  setup.fixed = model;
  setup.forcing = forcing;
  // Pin one concrete initial state, derived from the configured model's d_c,
  // so every candidate d_c in an inversion starts from the same state. A
  // per-candidate steady state would flatten the objective in d_c.
  setup.init.mode = InitialCondition::Mode::Explicit;
  setup.init.y0 = default_initial_state(model);
  setup.solver = solver;
  setup.times = std::move(times);
  return setup;
}

double RunConfig::resolve_sigma(const ObservationSet& obs, const ForwardSetup& setup,
                                double* d_c_fit_hint) const {
  if (noise.mode == NoiseModel::Mode::Fixed) return noise.sigma;
  FitOptions fo;
  fo.n_threads = n_threads;
  FitResult fit = least_squares_fit(obs, prior, setup, fo);
  if (d_c_fit_hint) *d_c_fit_hint = fit.d_c_hat;
  return estimate_noise_std(obs, fit.d_c_hat, setup);
}

McmcConfig resolve_mcmc_config(const RunConfig& cfg, const ObservationSet& obs,
                               const ForwardSetup& setup, double d_c_fit_hint) {
  McmcConfig mc;
  mc.n_samples = cfg.mcmc_samples;
  mc.burn_in = resolved_burn_in(cfg);
  mc.proposal_std = resolved_proposal_std(cfg);
  mc.seed = cfg.seed;
  if (cfg.mcmc_init >= 0.0) {
    mc.init = cfg.mcmc_init;
  } else {
    double fit = d_c_fit_hint;
    if (std::isnan(fit)) {
      FitOptions fo;
      fo.n_threads = cfg.n_threads;
      fit = least_squares_fit(obs, cfg.prior, setup, fo).d_c_hat;
    }
    mc.init = std::clamp(fit, cfg.prior.lower, cfg.prior.upper);
  }
  return mc;
}

RunOutputs run_simulate(const RunConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.out_dir);

  std::vector<std::string> names;
  ordered_json results = ordered_json::array();
  for (double dc : cfg.dc_list) {
    RsfParams p = cfg.model.with_d_c(dc);
    SliderState y0 = default_initial_state(p);
    Trajectory traj;
    try {
      traj = integrate(p, cfg.forcing, y0, cfg.solver);
    } catch (const SolverError& e) {
      throw SolverError("simulate failed at d_c=" + fmt_g(dc) + ": " + e.what(),
                        e.last_good_time);
    } catch (const ModelDomainError& e) {
      throw ModelDomainError("simulate failed at d_c=" + fmt_g(dc) + ": " + e.what(), e.time);
    }
    std::string name = "trajectory_dc" + fmt_g(dc) + ".csv";
    write_trajectory_csv(traj, (fs::path(cfg.out_dir) / name).string());
    names.push_back(name);
    results.push_back({{"d_c", dc},
                       {"file", name},
                       {"n_output", traj.size()},
                       {"n_steps", traj.stats.n_steps},
                       {"n_rejected", traj.stats.n_rejected},
                       {"n_rhs_evals", traj.stats.n_rhs_evals}});
  }
  return finish(cfg, "simulate", names, results);
}

RunOutputs run_synth(const RunConfig& cfg) {
  cfg.validate();
  ForwardSetup setup = cfg.forward_setup(cfg.synth_times());
  TimeSeries ts = generate_synthetic(cfg.synth_d_c_true, setup, cfg.synth_sigma, cfg.seed);
  fs::create_directories(cfg.out_dir);

  std::string name = "observations.csv";
  write_timeseries_csv(ts, (fs::path(cfg.out_dir) / name).string());

  double max_abs = 0.0;
  for (double v : ts.values) max_abs = std::max(max_abs, std::abs(v));
  ordered_json results = {{"d_c_true", cfg.synth_d_c_true},
                          {"n_obs", ts.size()},
                          {"sigma_noise", cfg.synth_sigma},
                          {"seed", cfg.seed},
                          {"max_abs_value", max_abs}};
  return finish(cfg, "synth", {name}, results);
}

RunOutputs run_fit(const RunConfig& cfg) {
  cfg.validate();
  ObservationSet obs = load_observations(cfg);
  ForwardSetup setup = cfg.forward_setup(obs.times);
  FitOptions fo;
  fo.n_threads = cfg.n_threads;
  FitResult fit = least_squares_fit(obs, cfg.prior, setup, fo);
  fs::create_directories(cfg.out_dir);

  ordered_json fj = {{"schema_version", "rsfinv.fit.v1"},
                     {"d_c_hat", fit.d_c_hat},
                     {"sse", fit.sse},
                     {"bracket", {fit.bracket_lo, fit.bracket_hi}},
                     {"boundary", fit.boundary},
                     {"multimodal", fit.multimodal},
                     {"degenerate", fit.degenerate},
                     {"n_evals", fit.n_evals}};
  write_json_file(fj, fs::path(cfg.out_dir) / "fit.json");

  // plot-ready overlay: observations next to the best-fit response
  std::vector<double> model_a = forward_response(fit.d_c_hat, setup);
  {
    std::ofstream out(fs::path(cfg.out_dir) / "fit_response.csv");
    if (!out) throw IoError("cannot write file: fit_response.csv");
    out << "# schema: rsfinv.overlay.v1\n";
    out << "# d_c_hat: " << format_double(fit.d_c_hat) << "\n";
    out << "t,a_obs,a_model\n";
    for (std::size_t i = 0; i < obs.size(); ++i)
      out << format_double(obs.times[i]) << ',' << format_double(obs.accels[i]) << ','
          << format_double(model_a[i]) << '\n';
  }
  return finish(cfg, "fit", {"fit.json", "fit_response.csv"}, fj);
}

RunOutputs run_posterior(const RunConfig& cfg) {
  cfg.validate();
  ObservationSet obs = load_observations(cfg);
  ForwardSetup setup = cfg.forward_setup(obs.times);
  double d_c_fit = std::numeric_limits<double>::quiet_NaN();
  double sigma = cfg.resolve_sigma(obs, setup, &d_c_fit);
  PosteriorGrid post =
      grid_posterior(obs, cfg.prior, cfg.grid_n, cfg.grid_spacing, sigma, setup, cfg.n_threads);
  fs::create_directories(cfg.out_dir);

  write_posterior_csv(post, (fs::path(cfg.out_dir) / "posterior.csv").string());
  PosteriorSummary s = posterior_summary(post);
  ordered_json sj = summary_json(s);
  sj["log_evidence"] = post.log_evidence;
  sj["sigma_noise"] = sigma;
  sj["n_failed"] = post.n_failed;
  ordered_json out = {{"schema_version", "rsfinv.posterior_summary.v1"}};
  if (!std::isnan(d_c_fit)) out["d_c_fit"] = d_c_fit;
  out.update(sj);
  write_json_file(out, fs::path(cfg.out_dir) / "posterior_summary.json");

  return finish(cfg, "posterior", {"posterior.csv", "posterior_summary.json"}, out);
}

RunOutputs run_mcmc(const RunConfig& cfg) {
  cfg.validate();
  ObservationSet obs = load_observations(cfg);
  ForwardSetup setup = cfg.forward_setup(obs.times);
  double d_c_fit = std::numeric_limits<double>::quiet_NaN();
  double sigma = cfg.resolve_sigma(obs, setup, &d_c_fit);

  McmcConfig mc = resolve_mcmc_config(cfg, obs, setup, d_c_fit);
  McmcChain chain = mcmc_sample(obs, cfg.prior, sigma, setup, mc);
  fs::create_directories(cfg.out_dir);
  write_chain_csv(chain, (fs::path(cfg.out_dir) / "chain.csv").string());

  PosteriorSummary s = posterior_summary(chain);
  ordered_json out = {{"schema_version", "rsfinv.chain_summary.v1"}};
  out.update(summary_json(s));
  out["acceptance_rate"] = chain.acceptance_rate;
  out["acceptance_warning"] = chain.acceptance_warning;
  if (chain.samples.size() - chain.burn_in >= 100)
    out["mean_standard_error"] = chain_mean_standard_error(chain);
  else
    out["mean_standard_error"] = nullptr;
  out["seed"] = chain.seed;
  out["proposal_std"] = chain.proposal_std;
  out["burn_in"] = chain.burn_in;
  out["init"] = mc.init;
  out["sigma_noise"] = sigma;
  write_json_file(out, fs::path(cfg.out_dir) / "chain_summary.json");

  return finish(cfg, "mcmc", {"chain.csv", "chain_summary.json"}, out);
}

namespace {

std::optional<std::string> peek_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path);
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim_copy(line);
    if (t.empty()) continue;
    if (t[0] != '#') break;
    auto colon = t.find(':');
    if (colon != std::string::npos && trim_copy(t.substr(1, colon - 1)) == "schema")
      return trim_copy(t.substr(colon + 1));
  }
  return std::nullopt;
}

double interp_density(const PosteriorGrid& g, double x) {
  if (x < g.grid.front() || x > g.grid.back()) return 0.0;
  auto it = std::lower_bound(g.grid.begin(), g.grid.end(), x);
  std::size_t i = std::size_t(it - g.grid.begin());
  if (i < g.grid.size() && g.grid[i] == x) return g.density[i];
  double x0 = g.grid[i - 1], x1 = g.grid[i];
  double w = (x - x0) / (x1 - x0);
  return g.density[i - 1] * (1.0 - w) + g.density[i] * w;
}

} // namespace

RunOutputs run_summarize(const RunConfig& cfg, const std::vector<std::string>& inputs) {
  if (inputs.empty()) throw ValidationError("summarize: no input files given");
  if (cfg.out_dir.empty()) throw ValidationError("config: io.out_dir is empty");

  ordered_json report_inputs = ordered_json::array();
  ordered_json manifests = ordered_json::array();
  std::vector<std::pair<std::string, PosteriorGrid>> posteriors;

  for (const auto& path : inputs) {
    if (fs::path(path).extension() == ".json") {
      std::ifstream in(path);
      if (!in) throw IoError("cannot open file: " + path);
      ordered_json j;
      try {
        in >> j;
      } catch (const std::exception& e) {
        throw IoError(path + ": invalid JSON: " + e.what());
      }
      manifests.push_back({{"path", path}, {"content", j}});
      report_inputs.push_back({{"path", path}, {"kind", "json"}, {"hash", hash_file(path)}});
      continue;
    }
    auto schema = peek_schema(path);
    if (!schema) throw IoError(path + ": missing '# schema:' header");
    if (*schema == "rsfinv.posterior.v1") {
      PosteriorGrid g = read_posterior_csv(path);
      PosteriorSummary s = posterior_summary(g);
      ordered_json e = {{"path", path}, {"kind", "posterior"}, {"hash", hash_file(path)}};
      e.update(summary_json(s));
      e["log_evidence"] = g.log_evidence;
      e["sigma_noise"] = g.sigma_noise;
      report_inputs.push_back(e);
      posteriors.emplace_back(path, std::move(g));
    } else if (*schema == "rsfinv.chain.v1") {
      McmcChain c = read_chain_csv(path);
      PosteriorSummary s = posterior_summary(c);
      ordered_json e = {{"path", path}, {"kind", "chain"}, {"hash", hash_file(path)}};
      e.update(summary_json(s));
      e["acceptance_rate"] = c.acceptance_rate;
      e["n_samples"] = c.samples.size();
      report_inputs.push_back(e);
    } else if (*schema == "rsfinv.timeseries.v1") {
      TimeSeries ts = read_timeseries_csv(path);
      double lo = *std::min_element(ts.values.begin(), ts.values.end());
      double hi = *std::max_element(ts.values.begin(), ts.values.end());
      report_inputs.push_back({{"path", path},
                               {"kind", "timeseries"},
                               {"hash", hash_file(path)},
                               {"n", ts.size()},
                               {"t_first", ts.times.front()},
                               {"t_last", ts.times.back()},
                               {"min_value", lo},
                               {"max_value", hi},
                               {"unit", unit_name(ts.unit)}});
    } else if (*schema == "rsfinv.trajectory.v1") {
      Trajectory tr = read_trajectory_csv(path);
      report_inputs.push_back({{"path", path},
                               {"kind", "trajectory"},
                               {"hash", hash_file(path)},
                               {"n", tr.size()},
                               {"t_first", tr.times.front()},
                               {"t_last", tr.times.back()}});
    } else {
      throw IoError(path + ": unsupported schema '" + *schema + "'");
    }
  }

  fs::create_directories(cfg.out_dir);
  std::vector<std::string> names;

  if (!posteriors.empty()) {
    // union grid over every posterior, zero density outside each support
    std::vector<double> grid;
    for (const auto& [path, g] : posteriors)
      grid.insert(grid.end(), g.grid.begin(), g.grid.end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    fs::path dpath = fs::path(cfg.out_dir) / "summary_density.csv";
    std::ofstream out(dpath);
    if (!out) throw IoError("cannot write file: " + dpath.string());
    out << "# schema: rsfinv.summary_density.v1\n";
    for (std::size_t k = 0; k < posteriors.size(); ++k)
      out << "# source_" << k + 1 << ": " << posteriors[k].first << "\n";
    out << "dc";
    for (std::size_t k = 0; k < posteriors.size(); ++k) out << ",density_" << k + 1;
    out << "\n";
    for (double x : grid) {
      out << format_double(x);
      for (const auto& [path, g] : posteriors) out << ',' << format_double(interp_density(g, x));
      out << '\n';
    }
    if (!out) throw IoError("write failed: " + dpath.string());
    names.push_back("summary_density.csv");
  }

  ordered_json report = {{"schema_version", "rsfinv.summary.v1"},
                         {"inputs", report_inputs},
                         {"manifests", manifests}};
  write_json_file(report, fs::path(cfg.out_dir) / "summary_report.json");
  names.push_back("summary_report.json");

  return finish(cfg, "summarize", names, report);
}

} // namespace rsf
