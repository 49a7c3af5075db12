#include "rsf/inversion.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <thread>

#include "rsf/rng.hpp"

namespace rsf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i)
    acc += 0.5 * (y[i] + y[i + 1]) * (x[i + 1] - x[i]);
  return acc;
}

void check_times_increasing(const std::vector<double>& times, const char* who) {
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    if (!(times[i] < times[i + 1])) {
      std::ostringstream msg;
      msg << who << ": times must be strictly increasing (index " << i + 1 << ")";
      throw ValidationError(msg.str());
    }
  }
}

/// Run fn(i) for i in [0, n), optionally across threads. Slot-indexed
/// results keep assembly deterministic regardless of scheduling.
void parallel_for(std::size_t n, unsigned n_threads, const std::function<void(std::size_t)>& fn) {
  unsigned hw = std::thread::hardware_concurrency();
  if (n_threads == 0) n_threads = hw ? hw : 1;
  n_threads = std::min<std::size_t>(n_threads, n);
  if (n_threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  workers.reserve(n_threads);
  for (unsigned w = 0; w < n_threads; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : workers) t.join();
}

} // namespace

void ObservationSet::validate() const {
  if (times.size() != accels.size())
    throw ValidationError("observations: times and accels must have equal length");
  if (times.size() < 2) throw ValidationError("observations: need at least 2 samples");
  check_times_increasing(times, "observations");
  for (double a : accels)
    if (!std::isfinite(a)) throw ValidationError("observations: non-finite acceleration");
}

void NoiseModel::validate() const {
  if (mode == Mode::Fixed && !(sigma > 0.0))
    throw ValidationError("noise: fixed sigma must be > 0");
}

void PriorConfig::validate() const {
  if (!(0.0 < lower && lower < upper))
    throw ValidationError("prior: require 0 < lower < upper");
}

SliderState InitialCondition::resolve(const RsfParams& p) const {
  if (mode == Mode::SteadyState) return default_initial_state(p);
  return y0;
}

void ForwardSetup::validate() const {
  forcing.validate();
  solver.validate();
  if (times.empty()) throw ValidationError("forward setup: observation times are empty");
  check_times_increasing(times, "forward setup");
  double tol = 1e-9 * std::max(1.0, std::abs(solver.t_end));
  if (times.front() < solver.t_start - tol || times.back() > solver.t_end + tol)
    throw ValidationError("forward setup: observation times outside the solver window");
}

std::vector<double> forward_response(double d_c, const ForwardSetup& setup) {
  if (!(d_c > 0.0)) throw ValidationError("forward_response: d_c must be > 0");
  setup.validate();
  RsfParams p = setup.fixed.with_d_c(d_c);
  p.validate();
  SliderState y0 = setup.init.resolve(p);
  try {
    Trajectory traj = integrate(p, setup.forcing, y0, setup.solver);
    return spline_sample(traj.times, traj.column_a(), setup.times);
  } catch (const SolverError& e) {
    std::ostringstream msg;
    msg << "forward model failed at d_c=" << d_c << ": " << e.what();
    throw SolverError(msg.str(), e.last_good_time);
  } catch (const ModelDomainError& e) {
    std::ostringstream msg;
    msg << "forward model failed at d_c=" << d_c << ": " << e.what();
    throw ModelDomainError(msg.str(), e.time);
  }
}

double sse(const ObservationSet& obs, const std::vector<double>& response) {
  if (obs.size() != response.size())
    throw ValidationError("sse: observation/response length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < response.size(); ++i) {
    double r = obs.accels[i] - response[i];
    acc += r * r;
  }
  return acc;
}

double sse_at(const ObservationSet& obs, double d_c, const ForwardSetup& setup) {
  return sse(obs, forward_response(d_c, setup));
}

double log_likelihood(const ObservationSet& obs, const std::vector<double>& response,
                      double sigma_noise) {
  if (!(sigma_noise > 0.0)) throw ValidationError("log_likelihood: sigma_noise must be > 0");
  double n = static_cast<double>(obs.size());
  double s = sse(obs, response);
  double ll = -n * std::log(sigma_noise * std::sqrt(2.0 * std::numbers::pi)) -
              s / (2.0 * sigma_noise * sigma_noise);
  if (std::isnan(ll)) throw InversionError("log_likelihood: result is NaN");
  return ll;  // -inf (overflowing sse) is a legitimate zero likelihood
}

double log_likelihood_at(const ObservationSet& obs, double d_c, const ForwardSetup& setup,
                         double sigma_noise) {
  return log_likelihood(obs, forward_response(d_c, setup), sigma_noise);
}

double estimate_noise_std(const ObservationSet& obs, double d_c_ref,
                          const ForwardSetup& setup) {
  obs.validate();
  if (obs.size() < 2) throw ValidationError("estimate_noise_std: need n > 1");
  double s = sse_at(obs, d_c_ref, setup);
  if (s <= 0.0)
    throw InversionError("estimate_noise_std: residuals are identically zero (degenerate)");
  return std::sqrt(s / (double(obs.size()) - 1.0));
}

std::vector<double> make_grid(double lo, double hi, std::size_t n, GridSpacing spacing) {
  if (!(0.0 < lo && lo < hi)) throw ValidationError("make_grid: require 0 < lo < hi");
  if (n < 2) throw ValidationError("make_grid: need at least 2 points");
  std::vector<double> g(n);
  if (spacing == GridSpacing::Log) {
    double llo = std::log(lo), lhi = std::log(hi);
    for (std::size_t i = 0; i < n; ++i)
      g[i] = std::exp(llo + (lhi - llo) * double(i) / double(n - 1));
  } else {
    for (std::size_t i = 0; i < n; ++i) g[i] = lo + (hi - lo) * double(i) / double(n - 1);
  }
  g.front() = lo;
  g.back() = hi;
  return g;
}

ResponseTable build_response_table(const std::vector<double>& grid, const ForwardSetup& setup,
                                   unsigned n_threads) {
  setup.validate();
  const std::size_t n = grid.size();
  std::vector<std::optional<std::vector<double>>> results(n);
  std::vector<std::string> errors(n);

  parallel_for(n, n_threads, [&](std::size_t i) {
    try {
      results[i] = forward_response(grid[i], setup);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  ResponseTable table;
  table.dc_grid.reserve(n);
  table.responses.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (results[i]) {
      table.dc_grid.push_back(grid[i]);
      table.responses.push_back(std::move(*results[i]));
    } else {
      ++table.n_failed;
      if (table.failure_messages.size() < 5) table.failure_messages.push_back(errors[i]);
    }
  }
  return table;
}

void PosteriorGrid::validate() const {
  if (grid.size() < 2) throw InversionError("posterior grid: too few points");
  double total = trapezoid(grid, density);
  if (std::abs(total - 1.0) > 1e-8)
    throw InversionError("posterior grid: density does not integrate to 1");
  for (double d : density)
    if (!(d >= 0.0)) throw InversionError("posterior grid: negative density");
}

PosteriorGrid grid_posterior(const ObservationSet& obs, const PriorConfig& prior,
                             const ResponseTable& table, double sigma_noise) {
  obs.validate();
  prior.validate();
  if (!(sigma_noise > 0.0)) throw ValidationError("grid_posterior: sigma_noise must be > 0");
  if (table.dc_grid.size() < 8) {
    std::ostringstream msg;
    msg << "grid_posterior: only " << table.dc_grid.size() << " usable grid points ("
        << table.n_failed << " forward failures";
    if (!table.failure_messages.empty()) msg << "; first: " << table.failure_messages.front();
    msg << ")";
    throw InversionError(msg.str());
  }

  const std::size_t n = table.dc_grid.size();
  PosteriorGrid post;
  post.grid = table.dc_grid;
  post.prior = prior;
  post.sigma_noise = sigma_noise;
  post.n_failed = table.n_failed;
  post.log_likelihoods.resize(n);

  double ll_max = kNegInf;
  for (std::size_t i = 0; i < n; ++i) {
    post.log_likelihoods[i] = log_likelihood(obs, table.responses[i], sigma_noise);
    ll_max = std::max(ll_max, post.log_likelihoods[i]);
  }
  if (!std::isfinite(ll_max))
    throw InversionError("grid_posterior: likelihood vanished on the whole grid");

  // The uniform prior is constant over the support, so it cancels in the
  // normalized density and enters the evidence alone.
  post.density.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    post.density[i] = std::exp(post.log_likelihoods[i] - ll_max);
  double z = trapezoid(post.grid, post.density);
  if (!(z > 0.0)) throw InversionError("grid_posterior: zero normalization integral");
  for (double& d : post.density) d /= z;
  post.log_evidence = ll_max + std::log(z) + std::log(prior.density());

  post.validate();
  return post;
}

PosteriorGrid grid_posterior(const ObservationSet& obs, const PriorConfig& prior,
                             std::size_t n_grid, GridSpacing spacing, double sigma_noise,
                             const ForwardSetup& setup, unsigned n_threads) {
  if (n_grid < 8) throw ValidationError("grid_posterior: n_grid must be >= 8");
  auto grid = make_grid(prior.lower, prior.upper, n_grid, spacing);
  auto table = build_response_table(grid, setup, n_threads);
  return grid_posterior(obs, prior, table, sigma_noise);
}

FitResult least_squares_fit(const ObservationSet& obs, const PriorConfig& bounds,
                            const ForwardSetup& setup, const FitOptions& opts) {
  obs.validate();
  bounds.validate();
  if (opts.n_scan < 4) throw ValidationError("least_squares_fit: n_scan must be >= 4");

  auto grid = make_grid(bounds.lower, bounds.upper, opts.n_scan, opts.spacing);
  const std::size_t n = grid.size();
  std::vector<double> values(n, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::string> errors(n);
  parallel_for(n, opts.n_threads, [&](std::size_t i) {
    try {
      values[i] = sse_at(obs, grid[i], setup);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  std::vector<std::size_t> ok;
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isnan(values[i])) ok.push_back(i);
  if (ok.empty()) {
    std::string first;
    for (const auto& e : errors)
      if (!e.empty()) {
        first = e;
        break;
      }
    throw InversionError("least_squares_fit: every grid evaluation failed (first: " + first +
                         ")");
  }

  FitResult fit;
  fit.n_evals = ok.size();

  double vmin = std::numeric_limits<double>::infinity();
  double vmax = -std::numeric_limits<double>::infinity();
  for (std::size_t i : ok) {
    vmin = std::min(vmin, values[i]);
    vmax = std::max(vmax, values[i]);
  }

  const double tie_tol = 1e-12 * std::max(1.0, std::abs(vmin));
  if (vmax - vmin <= tie_tol) {
    // objective carries no d_c information
    fit.degenerate = true;
    fit.boundary = true;
    fit.d_c_hat = bounds.lower;
    fit.sse = vmin;
    fit.bracket_lo = bounds.lower;
    fit.bracket_hi = bounds.upper;
    return fit;
  }

  std::size_t best = ok.front();
  std::size_t n_tied = 0;
  for (std::size_t i : ok) {
    if (values[i] <= vmin + tie_tol) {
      ++n_tied;
      if (values[i] < values[best] - tie_tol || (n_tied == 1)) best = i;
    }
  }
  if (n_tied > 1) {
    fit.multimodal = true;
    // refine the smallest-d_c tied cell
    for (std::size_t i : ok)
      if (values[i] <= vmin + tie_tol) {
        best = i;
        break;
      }
  }

  // bracket from the neighbors of the best coarse point (surviving ones)
  auto pos = std::find(ok.begin(), ok.end(), best);
  double lo = (pos == ok.begin()) ? grid[best] : grid[*(pos - 1)];
  double hi = (pos + 1 == ok.end()) ? grid[best] : grid[*(pos + 1)];
  if (lo == hi) {
    fit.d_c_hat = grid[best];
    fit.sse = values[best];
    fit.bracket_lo = lo;
    fit.bracket_hi = hi;
    fit.boundary = true;
    return fit;
  }

  // golden-section refinement
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double best_x = grid[best], best_v = values[best];
  auto probe = [&](double x) {
    try {
      double v = sse_at(obs, x, setup);
      ++fit.n_evals;
      if (v < best_v) {
        best_v = v;
        best_x = x;
      }
      return v;
    } catch (const std::exception& e) {
      throw InversionError(std::string("least_squares_fit: refinement failed: ") + e.what());
    }
  };
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = probe(c), fd = probe(d);
  while ((b - a) > opts.rel_width * std::max(1.0, 0.5 * std::abs(a + b))) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = probe(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = probe(d);
    }
  }

  fit.d_c_hat = best_x;
  fit.sse = best_v;
  fit.bracket_lo = a;
  fit.bracket_hi = b;
  double edge_tol = 2.0 * opts.rel_width * std::max(1.0, std::abs(best_x));
  fit.boundary = (best_x - bounds.lower <= edge_tol) || (bounds.upper - best_x <= edge_tol);
  return fit;
}

void McmcConfig::validate(const PriorConfig& prior) const {
  if (!(n_samples > burn_in))
    throw ValidationError("mcmc: n_samples must exceed burn_in");
  if (!(proposal_std > 0.0)) throw ValidationError("mcmc: proposal_std must be > 0");
  if (!prior.contains(init))
    throw ValidationError("mcmc: start point must lie inside the prior support");
}

std::vector<double> McmcChain::post_burn_in() const {
  return std::vector<double>(samples.begin() + std::ptrdiff_t(burn_in), samples.end());
}

McmcChain mcmc_sample(const std::function<double(double)>& log_like, const PriorConfig& prior,
                      const McmcConfig& cfg) {
  prior.validate();
  cfg.validate(prior);

  Rng rng(cfg.seed);
  McmcChain chain;
  chain.seed = cfg.seed;
  chain.proposal_std = cfg.proposal_std;
  chain.burn_in = cfg.burn_in;
  chain.samples.reserve(cfg.n_samples);
  chain.log_posts.reserve(cfg.n_samples);

  const double log_prior = std::log(prior.density());
  double x = cfg.init;
  double ll = log_like(x);
  std::size_t accepted_tail = 0;

  for (std::size_t i = 0; i < cfg.n_samples; ++i) {
    double prop = rng.normal(x, cfg.proposal_std);
    bool accepted = false;
    if (prior.contains(prop)) {
      double ll_prop = log_like(prop);
      double log_alpha = ll_prop - ll;
      if (log_alpha >= 0.0 || std::log(rng.uniform()) < log_alpha) {
        x = prop;
        ll = ll_prop;
        accepted = true;
      }
    }
    if (accepted && i >= cfg.burn_in) ++accepted_tail;
    chain.samples.push_back(x);
    chain.log_posts.push_back(ll + log_prior);
  }

  chain.acceptance_rate =
      double(accepted_tail) / double(cfg.n_samples - cfg.burn_in);
  chain.acceptance_warning =
      chain.acceptance_rate < 0.05 || chain.acceptance_rate > 0.95;
  return chain;
}

McmcChain mcmc_sample(const ObservationSet& obs, const PriorConfig& prior, double sigma_noise,
                      const ForwardSetup& setup, const McmcConfig& cfg) {
  obs.validate();
  if (!(sigma_noise > 0.0)) throw ValidationError("mcmc: sigma_noise must be > 0");
  setup.validate();
  // forward failures count as zero likelihood: the proposal is rejected
  auto ll = [&](double d_c) -> double {
    try {
      return log_likelihood_at(obs, d_c, setup, sigma_noise);
    } catch (const Error&) {
      return kNegInf;
    }
  };
  return mcmc_sample(ll, prior, cfg);
}

namespace {

/// Invert the piecewise-quadratic CDF of a piecewise-linear density.
double quantile_from_grid(const std::vector<double>& x, const std::vector<double>& p,
                          const std::vector<double>& cdf, double q) {
  if (q <= 0.0) return x.front();
  if (q >= cdf.back()) return x.back();
  auto it = std::lower_bound(cdf.begin(), cdf.end(), q);
  std::size_t i = std::size_t(it - cdf.begin());
  if (i == 0) return x.front();
  --i;  // q lies in (cdf[i], cdf[i+1]]
  double dx = x[i + 1] - x[i];
  double rem = q - cdf[i];
  double slope = (p[i + 1] - p[i]) / dx;
  if (std::abs(slope) < 1e-300) {
    if (p[i] <= 0.0) return x[i];
    return x[i] + rem / p[i];
  }
  double disc = p[i] * p[i] + 2.0 * slope * rem;
  if (disc < 0.0) disc = 0.0;
  double u = (-p[i] + std::sqrt(disc)) / slope;
  return x[i] + std::clamp(u, 0.0, dx);
}

} // namespace

PosteriorSummary posterior_summary(const PosteriorGrid& grid, double level) {
  if (!(level > 0.0 && level < 1.0))
    throw ValidationError("posterior_summary: level must be in (0, 1)");
  const auto& x = grid.grid;
  const auto& p = grid.density;

  std::vector<double> xp(x.size()), x2p(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xp[i] = x[i] * p[i];
    x2p[i] = x[i] * x[i] * p[i];
  }
  PosteriorSummary s;
  s.mean = trapezoid(x, xp);
  double second = trapezoid(x, x2p);
  s.std_dev = std::sqrt(std::max(0.0, second - s.mean * s.mean));
  s.mode = x[std::size_t(std::max_element(p.begin(), p.end()) - p.begin())];
  s.ci_level = level;

  std::vector<double> cdf(x.size(), 0.0);
  for (std::size_t i = 1; i < x.size(); ++i)
    cdf[i] = cdf[i - 1] + 0.5 * (p[i] + p[i - 1]) * (x[i] - x[i - 1]);
  double tail = (1.0 - level) / 2.0;
  s.ci_lo = quantile_from_grid(x, p, cdf, tail);
  s.ci_hi = quantile_from_grid(x, p, cdf, 1.0 - tail);
  return s;
}

PosteriorSummary posterior_summary(const McmcChain& chain, double level) {
  if (!(level > 0.0 && level < 1.0))
    throw ValidationError("posterior_summary: level must be in (0, 1)");
  auto tail = chain.post_burn_in();
  if (tail.empty()) throw InversionError("posterior_summary: empty post-burn-in chain");

  PosteriorSummary s;
  s.ci_level = level;
  double n = double(tail.size());
  double mean = 0.0;
  for (double v : tail) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : tail) var += (v - mean) * (v - mean);
  var = (tail.size() > 1) ? var / (n - 1.0) : 0.0;
  s.mean = mean;
  s.std_dev = std::sqrt(var);

  // mode from a fixed 100-bin histogram over the sample range
  auto [mn_it, mx_it] = std::minmax_element(tail.begin(), tail.end());
  double mn = *mn_it, mx = *mx_it;
  if (mx > mn) {
    constexpr std::size_t n_bins = 100;
    std::vector<std::size_t> counts(n_bins, 0);
    for (double v : tail) {
      auto b = std::size_t((v - mn) / (mx - mn) * n_bins);
      if (b >= n_bins) b = n_bins - 1;
      ++counts[b];
    }
    auto bi = std::size_t(std::max_element(counts.begin(), counts.end()) - counts.begin());
    s.mode = mn + (double(bi) + 0.5) * (mx - mn) / double(n_bins);
  } else {
    s.mode = mn;
  }

  std::sort(tail.begin(), tail.end());
  auto quant = [&](double q) {
    double idx = q * (n - 1.0);
    auto lo = std::size_t(std::floor(idx));
    auto hi = std::min(lo + 1, tail.size() - 1);
    double w = idx - double(lo);
    return tail[lo] * (1.0 - w) + tail[hi] * w;
  };
  double t = (1.0 - level) / 2.0;
  s.ci_lo = quant(t);
  s.ci_hi = quant(1.0 - t);
  return s;
}

double chain_mean_standard_error(const McmcChain& chain, std::size_t n_batches) {
  auto tail = chain.post_burn_in();
  if (tail.size() < 2 * n_batches)
    throw InversionError("chain_mean_standard_error: chain too short for batch means");
  std::size_t m = tail.size() / n_batches;
  std::vector<double> means(n_batches, 0.0);
  for (std::size_t b = 0; b < n_batches; ++b) {
    for (std::size_t j = 0; j < m; ++j) means[b] += tail[b * m + j];
    means[b] /= double(m);
  }
  double grand = 0.0;
  for (double v : means) grand += v;
  grand /= double(n_batches);
  double var = 0.0;
  for (double v : means) var += (v - grand) * (v - grand);
  var /= double(n_batches - 1);
  return std::sqrt(var / double(n_batches));
}

} // namespace rsf
