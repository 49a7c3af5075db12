#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rsf/inversion.hpp"
#include "rsf/rng.hpp"

using namespace rsf;

namespace {

// small, fast forward scenario shared by most cases: pinned initial state
// from the reference model, relaxed step cap, n observation times
ForwardSetup quick_setup(int n, double t_end = 50.0) {
  ForwardSetup s;
  s.solver.t_end = t_end;
  s.solver.max_step = 1e-2;
  s.init.mode = InitialCondition::Mode::Explicit;
  s.init.y0 = default_initial_state(s.fixed);
  s.times.resize(n);
  for (int i = 0; i < n; ++i) s.times[i] = t_end * (i + 1) / n;
  return s;
}

ObservationSet obs_from(const ForwardSetup& setup, const std::vector<double>& values) {
  ObservationSet o;
  o.times = setup.times;
  o.accels = values;
  return o;
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double z = 0;
  for (std::size_t i = 1; i < x.size(); ++i) z += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return z;
}

}  // namespace

TEST_CASE("forward response is zero at a candidate-bound steady state") {
  ForwardSetup s = quick_setup(100);
  s.init.mode = InitialCondition::Mode::SteadyState;
  s.forcing = ForcingConfig::constant(1.0);
  for (double dc : {10.0, 20.0, 35.0}) {
    std::vector<double> r = forward_response(dc, s);
    for (double a : r) CHECK(std::abs(a) < 1e-10);
  }
}

TEST_CASE("forward response equals the trajectory's acceleration column") {
  ForwardSetup s = quick_setup(500);
  std::vector<double> r = forward_response(20.0, s);
  Trajectory tr = integrate(s.fixed.with_d_c(20.0), s.forcing, s.init.y0, s.solver);
  std::vector<double> oracle = spline_sample(tr.times, tr.column_a(), s.times);
  REQUIRE(r.size() == oracle.size());
  for (std::size_t i = 0; i < r.size(); ++i) CHECK(r[i] == oracle[i]);
}

TEST_CASE("forward response is deterministic") {
  ForwardSetup s = quick_setup(200);
  CHECK(forward_response(17.0, s) == forward_response(17.0, s));
}

TEST_CASE("forward response failures name the offending d_c") {
  ForwardSetup s = quick_setup(100);
  try {
    forward_response(50.0, s);  // stalls: state pinned far from d_c=50 equilibrium
    FAIL("expected a failure");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("d_c=50") != std::string::npos);
  }
  CHECK_THROWS_AS(forward_response(-1.0, s), ValidationError);
}

TEST_CASE("sse basics") {
  ForwardSetup s = quick_setup(300);
  std::vector<double> clean = forward_response(20.0, s);

  ObservationSet o = obs_from(s, clean);
  CHECK(sse(o, clean) == 0.0);
  CHECK(sse_at(o, 20.0, s) <= 1e-10 * o.size());

  double c = 0.37;
  std::vector<double> shifted = clean;
  for (double& x : shifted) x += c;
  CHECK(sse(obs_from(s, shifted), clean) ==
        doctest::Approx(o.size() * c * c).epsilon(1e-12));
}

TEST_CASE("sse is continuous in d_c") {
  ForwardSetup s = quick_setup(300);
  ObservationSet o = obs_from(s, forward_response(20.0, s));
  double base = sse_at(o, 20.0, s);
  double d1 = std::abs(sse_at(o, 20.0 + 1e-1, s) - base);
  double d2 = std::abs(sse_at(o, 20.0 + 1e-2, s) - base);
  double d3 = std::abs(sse_at(o, 20.0 + 1e-3, s) - base);
  CHECK(d2 < d1);
  CHECK(d3 < d2);
}

TEST_CASE("log likelihood closed form") {
  ObservationSet one;
  one.times = {1.0};
  one.accels = {0.125};
  CHECK(log_likelihood(one, {0.125}, 1.0) ==
        doctest::Approx(-0.5 * std::log(2.0 * M_PI)).epsilon(1e-12));
  CHECK(log_likelihood(one, {0.125}, 1.0) == doctest::Approx(-0.9189385).epsilon(1e-7));

  // doubling sigma with zero residuals costs exactly n ln 2
  ObservationSet o;
  o.times = {1.0, 2.0, 3.0};
  o.accels = {0.1, -0.2, 0.3};
  double l1 = log_likelihood(o, o.accels, 0.5);
  double l2 = log_likelihood(o, o.accels, 1.0);
  CHECK(l1 - l2 == doctest::Approx(3.0 * std::log(2.0)).epsilon(1e-13));

  CHECK_THROWS_AS(log_likelihood(o, o.accels, 0.0), ValidationError);
}

TEST_CASE("log likelihood matches a per-point summation oracle") {
  Rng rng(99);
  ObservationSet o;
  std::vector<double> resp;
  for (int i = 0; i < 257; ++i) {
    o.times.push_back(i + 1.0);
    o.accels.push_back(rng.normal());
    resp.push_back(rng.normal());
  }
  double sigma = 0.7;
  double oracle = 0;
  for (std::size_t i = 0; i < resp.size(); ++i) {
    double r = o.accels[i] - resp[i];
    oracle += -std::log(sigma * std::sqrt(2.0 * M_PI)) - r * r / (2.0 * sigma * sigma);
  }
  CHECK(log_likelihood(o, resp, sigma) == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("log likelihood of disjoint parts sums to the whole") {
  Rng rng(7);
  ObservationSet all, first, second;
  std::vector<double> ra, rf, rs;
  for (int i = 0; i < 100; ++i) {
    double t = i + 1.0, a = rng.normal(), r = rng.normal();
    all.times.push_back(t);
    all.accels.push_back(a);
    ra.push_back(r);
    (i < 60 ? first : second).times.push_back(t);
    (i < 60 ? first : second).accels.push_back(a);
    (i < 60 ? rf : rs).push_back(r);
  }
  double whole = log_likelihood(all, ra, 0.9);
  double parts = log_likelihood(first, rf, 0.9) + log_likelihood(second, rs, 0.9);
  CHECK(whole == doctest::Approx(parts).epsilon(1e-12));
}

TEST_CASE("noise estimation") {
  ForwardSetup s = quick_setup(400);
  std::vector<double> clean = forward_response(20.0, s);

  // residuals all equal to c
  double c = -0.04;
  std::vector<double> vals = clean;
  for (double& x : vals) x += c;
  double n = double(vals.size());
  CHECK(estimate_noise_std(obs_from(s, vals), 20.0, s) ==
        doctest::Approx(std::abs(c) * std::sqrt(n / (n - 1))).epsilon(1e-9));

  // n=2 with residuals {0, r}
  ForwardSetup s2 = quick_setup(2);
  std::vector<double> c2 = forward_response(20.0, s2);
  CHECK(estimate_noise_std(obs_from(s2, {c2[0], c2[1] + 0.5}), 20.0, s2) ==
        doctest::Approx(0.5).epsilon(1e-9));

  // seeded noisy data recover sigma
  Rng rng(4242);
  ForwardSetup s3 = quick_setup(600);
  std::vector<double> c3 = forward_response(20.0, s3);
  std::vector<double> noisy = c3;
  for (double& x : noisy) x += 0.05 * rng.normal();
  double sig_hat = estimate_noise_std(obs_from(s3, noisy), 20.0, s3);
  CHECK(sig_hat > 0.04);
  CHECK(sig_hat < 0.06);

  // exact-match residuals are degenerate
  CHECK_THROWS_AS(estimate_noise_std(obs_from(s, clean), 20.0, s), InversionError);
}

TEST_CASE("make_grid") {
  std::vector<double> lin = make_grid(2.0, 10.0, 5, GridSpacing::Linear);
  REQUIRE(lin.size() == 5);
  CHECK(lin.front() == 2.0);
  CHECK(lin.back() == 10.0);
  CHECK(lin[2] == doctest::Approx(6.0).epsilon(1e-15));

  std::vector<double> lg = make_grid(1.0, 16.0, 5, GridSpacing::Log);
  CHECK(lg.front() == 1.0);
  CHECK(lg.back() == 16.0);
  CHECK(lg[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(lg[3] == doctest::Approx(8.0).epsilon(1e-12));

  CHECK_THROWS_AS(make_grid(1.0, 2.0, 1, GridSpacing::Linear), ValidationError);
  CHECK_THROWS_AS(make_grid(-1.0, 2.0, 8, GridSpacing::Log), ValidationError);
}

TEST_CASE("response table drops failing grid points deterministically") {
  ForwardSetup s = quick_setup(100);
  std::vector<double> grid = make_grid(5.0, 50.0, 24, GridSpacing::Log);
  ResponseTable t1 = build_response_table(grid, s, 1);
  ResponseTable t2 = build_response_table(grid, s, 4);
  CHECK(t1.n_failed > 0);
  CHECK(t1.dc_grid.size() + t1.n_failed == grid.size());
  CHECK_FALSE(t1.failure_messages.empty());
  // thread count must not affect the assembled table
  CHECK(t1.dc_grid == t2.dc_grid);
  CHECK(t1.n_failed == t2.n_failed);
  REQUIRE(t1.responses.size() == t2.responses.size());
  for (std::size_t i = 0; i < t1.responses.size(); ++i)
    CHECK(t1.responses[i] == t2.responses[i]);
}

TEST_CASE("least squares recovers a noiseless truth") {
  ForwardSetup s = quick_setup(500);
  ObservationSet o = obs_from(s, forward_response(20.0, s));
  FitResult fit = least_squares_fit(o, PriorConfig{}, s);
  CHECK(std::abs(fit.d_c_hat - 20.0) / 20.0 <= 0.005);
  CHECK(fit.sse <= 1e-4);
  CHECK_FALSE(fit.boundary);
  CHECK_FALSE(fit.degenerate);
  CHECK(fit.bracket_lo <= fit.d_c_hat);
  CHECK(fit.d_c_hat <= fit.bracket_hi);
  CHECK(fit.n_evals > 0);
}

TEST_CASE("least squares flags the non-identifiable flat objective") {
  // candidate-bound steady states under constant forcing: every candidate
  // reproduces the zero observations exactly
  ForwardSetup s = quick_setup(100);
  s.init.mode = InitialCondition::Mode::SteadyState;
  s.forcing = ForcingConfig::constant(1.0);
  ObservationSet o = obs_from(s, std::vector<double>(100, 0.0));
  FitResult fit = least_squares_fit(o, PriorConfig{}, s);
  CHECK(fit.degenerate);
  CHECK(fit.boundary);
  CHECK(fit.d_c_hat == 5.0);
}

TEST_CASE("least squares respects collapsed bounds") {
  ForwardSetup s = quick_setup(300);
  ObservationSet o = obs_from(s, forward_response(20.0, s));
  PriorConfig tight;
  tight.lower = 19.9;
  tight.upper = 20.1;
  FitResult fit = least_squares_fit(o, tight, s);
  CHECK(fit.d_c_hat >= 19.9);
  CHECK(fit.d_c_hat <= 20.1);
  CHECK(std::abs(fit.d_c_hat - 20.0) <= 0.05);
}

TEST_CASE("least squares reports a boundary minimum") {
  ForwardSetup s = quick_setup(300);
  ObservationSet o = obs_from(s, forward_response(20.0, s));
  PriorConfig off;
  off.lower = 22.0;
  off.upper = 30.0;
  FitResult fit = least_squares_fit(o, off, s);
  CHECK(fit.boundary);
  CHECK(fit.d_c_hat == doctest::Approx(22.0).epsilon(1e-3));
}

TEST_CASE("grid posterior reproduces a flat prior and normalizes") {
  PriorConfig prior;
  ObservationSet o;
  o.times = {1.0, 2.0};
  o.accels = {0.25, -0.5};
  ResponseTable flat;
  flat.dc_grid = make_grid(5.0, 50.0, 64, GridSpacing::Log);
  flat.responses.assign(flat.dc_grid.size(), {0.25, -0.5});
  PosteriorGrid post = grid_posterior(o, prior, flat, 1.0);
  for (double d : post.density) CHECK(d == post.density.front());
  CHECK(post.density.front() == doctest::Approx(prior.density()).epsilon(1e-12));
  CHECK(trapezoid(post.grid, post.density) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK_NOTHROW(post.validate());
}

TEST_CASE("grid posterior density is invariant under likelihood shifts") {
  // scaling observations, responses and sigma together shifts every log
  // likelihood by the same constant; the normalized density must not move
  ForwardSetup s = quick_setup(200);
  std::vector<double> clean = forward_response(20.0, s);
  Rng rng(11);
  std::vector<double> noisy = clean;
  for (double& x : noisy) x += 0.05 * rng.normal();

  std::vector<double> grid = make_grid(10.0, 30.0, 32, GridSpacing::Log);
  ResponseTable table = build_response_table(grid, s);
  PosteriorGrid p1 = grid_posterior(obs_from(s, noisy), PriorConfig{}, table, 0.05);

  double k = 128.0;  // power of two keeps the residual scaling exact
  ObservationSet scaled = obs_from(s, noisy);
  for (double& x : scaled.accels) x *= k;
  ResponseTable st = table;
  for (auto& r : st.responses)
    for (double& x : r) x *= k;
  PosteriorGrid p2 = grid_posterior(scaled, PriorConfig{}, st, 0.05 * k);
  REQUIRE(p1.density.size() == p2.density.size());
  for (std::size_t i = 0; i < p1.density.size(); ++i)
    CHECK(p1.density[i] == doctest::Approx(p2.density[i]).epsilon(1e-9));
}

TEST_CASE("grid posterior handles huge sse without under or overflow") {
  ForwardSetup s = quick_setup(200);
  std::vector<double> clean = forward_response(20.0, s);
  std::vector<double> far = clean;
  for (double& x : far) x += 100.0;  // sse ~ 2e6 at sigma=1
  std::vector<double> grid = make_grid(10.0, 30.0, 16, GridSpacing::Log);
  PosteriorGrid post =
      grid_posterior(obs_from(s, far), PriorConfig{}, build_response_table(grid, s), 1.0);
  for (double d : post.density) CHECK(std::isfinite(d));
  CHECK(trapezoid(post.grid, post.density) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("grid posterior requires enough surviving nodes") {
  ForwardSetup s = quick_setup(100);
  // every candidate above ~32 stalls against the pinned theta0=20 state
  std::vector<double> grid = make_grid(40.0, 50.0, 12, GridSpacing::Linear);
  ObservationSet o = obs_from(s, std::vector<double>(100, 0.0));
  ResponseTable table = build_response_table(grid, s);
  CHECK(table.dc_grid.size() < 8);
  CHECK_THROWS_AS(grid_posterior(o, PriorConfig{}, table, 1.0), InversionError);

  PriorConfig doomed;
  doomed.lower = 40.0;
  doomed.upper = 50.0;
  CHECK_THROWS_AS(grid_posterior(o, doomed, 12, GridSpacing::Linear, 1.0, s),
                  InversionError);
}

TEST_CASE("one-shot grid posterior enforces the minimum grid") {
  ObservationSet o;
  o.times = {1.0, 2.0};
  o.accels = {0.0, 0.0};
  ForwardSetup s = quick_setup(2);
  CHECK_THROWS_AS(grid_posterior(o, PriorConfig{}, 4, GridSpacing::Log, 1.0, s),
                  ValidationError);
}

TEST_CASE("grid argmax agrees with the least squares fit") {
  ForwardSetup s = quick_setup(300);
  std::vector<double> clean = forward_response(20.0, s);
  Rng rng(5);
  std::vector<double> noisy = clean;
  for (double& x : noisy) x += 0.02 * rng.normal();
  ObservationSet o = obs_from(s, noisy);

  std::vector<double> grid = make_grid(15.0, 25.0, 48, GridSpacing::Log);
  PosteriorGrid post = grid_posterior(o, PriorConfig{}, build_response_table(grid, s), 0.02);
  std::size_t k = std::max_element(post.log_likelihoods.begin(), post.log_likelihoods.end()) -
                  post.log_likelihoods.begin();
  FitResult fit = least_squares_fit(o, PriorConfig{}, s);
  double cell = post.grid[std::min(k + 1, post.grid.size() - 1)] -
                post.grid[k > 0 ? k - 1 : 0];
  CHECK(std::abs(post.grid[k] - fit.d_c_hat) <= cell);
}

TEST_CASE("mcmc chains are seeded and deterministic") {
  PriorConfig prior;
  auto quadratic = [](double x) { return -0.5 * (x - 20.0) * (x - 20.0); };
  McmcConfig cfg;
  cfg.n_samples = 3000;
  cfg.burn_in = 500;
  cfg.proposal_std = 2.0;
  cfg.seed = 31;
  cfg.init = 20.0;
  McmcChain a = mcmc_sample(quadratic, prior, cfg);
  McmcChain b = mcmc_sample(quadratic, prior, cfg);
  CHECK(a.samples == b.samples);
  CHECK(a.log_posts == b.log_posts);
  CHECK(a.acceptance_rate == b.acceptance_rate);
  REQUIRE(a.samples.size() == 3000);
  CHECK(a.post_burn_in().size() == 2500);

  cfg.seed = 32;
  McmcChain c = mcmc_sample(quadratic, prior, cfg);
  CHECK(a.samples != c.samples);
}

TEST_CASE("mcmc respects the prior support and records the prior") {
  PriorConfig prior;
  McmcConfig cfg;
  cfg.n_samples = 20000;
  cfg.burn_in = 0;
  cfg.proposal_std = prior.width();
  cfg.seed = 9;
  cfg.init = 27.5;
  McmcChain ch = mcmc_sample([](double) { return 0.0; }, prior, cfg);
  double lo = 1e300, hi = -1e300;
  for (double x : ch.samples) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  CHECK(lo >= prior.lower);
  CHECK(hi <= prior.upper);
  // flat likelihood: the stored log posterior is the constant log prior
  for (double lp : ch.log_posts) CHECK(lp == doctest::Approx(std::log(prior.density())));
}

TEST_CASE("flat-likelihood chain is uniform by chi-square") {
  PriorConfig prior;
  McmcConfig cfg;
  cfg.n_samples = 50000;
  cfg.burn_in = 0;
  cfg.proposal_std = prior.width();
  cfg.seed = 1;
  cfg.init = 27.5;
  McmcChain ch = mcmc_sample([](double) { return 0.0; }, prior, cfg);
  // thin to near-independence before the Pearson test
  std::vector<int> bins(20, 0);
  int n = 0;
  for (std::size_t i = 0; i < ch.samples.size(); i += 20) {
    int b = std::min(19, int((ch.samples[i] - prior.lower) / prior.width() * 20));
    ++bins[b];
    ++n;
  }
  double expct = n / 20.0, x2 = 0;
  for (int c : bins) x2 += (c - expct) * (c - expct) / expct;
  CHECK(x2 < 36.191);  // chi-square(19), p = 0.01
}

TEST_CASE("mcmc flags pathological acceptance rates") {
  PriorConfig prior;
  auto sharp = [](double x) { return -5e5 * (x - 20.0) * (x - 20.0); };
  McmcConfig cfg;
  cfg.n_samples = 2000;
  cfg.burn_in = 200;
  cfg.proposal_std = 10.0;  // nearly every proposal falls off the spike
  cfg.seed = 3;
  cfg.init = 20.0;
  McmcChain ch = mcmc_sample(sharp, prior, cfg);
  CHECK(ch.acceptance_rate < 0.05);
  CHECK(ch.acceptance_warning);

  cfg.proposal_std = 1e-7;  // microscopic steps are almost always accepted
  McmcChain ch2 = mcmc_sample(sharp, prior, cfg);
  CHECK(ch2.acceptance_rate > 0.95);
  CHECK(ch2.acceptance_warning);
}

TEST_CASE("mcmc configuration validation") {
  PriorConfig prior;
  McmcConfig cfg;
  cfg.n_samples = 100;
  cfg.burn_in = 100;
  cfg.proposal_std = 1.0;
  cfg.init = 20.0;
  CHECK_THROWS_AS(cfg.validate(prior), ValidationError);
  cfg.burn_in = 10;
  cfg.proposal_std = 0.0;
  CHECK_THROWS_AS(cfg.validate(prior), ValidationError);
  cfg.proposal_std = 1.0;
  cfg.init = 60.0;
  CHECK_THROWS_AS(cfg.validate(prior), ValidationError);
  cfg.init = 20.0;
  CHECK_NOTHROW(cfg.validate(prior));
}

TEST_CASE("posterior summary of an exact uniform grid density") {
  PriorConfig prior;
  ObservationSet o;
  o.times = {1.0, 2.0};
  o.accels = {0.0, 0.0};
  ResponseTable flat;
  flat.dc_grid = make_grid(5.0, 50.0, 200, GridSpacing::Linear);
  flat.responses.assign(flat.dc_grid.size(), {0.0, 0.0});
  PosteriorSummary s = posterior_summary(grid_posterior(o, prior, flat, 1.0));
  CHECK(s.mean == doctest::Approx(27.5).epsilon(1e-10));
  CHECK(s.std_dev == doctest::Approx(45.0 / std::sqrt(12.0)).epsilon(1e-3));
  CHECK(s.ci_lo == doctest::Approx(5.0 + 0.025 * 45.0).epsilon(1e-3));
  CHECK(s.ci_hi == doctest::Approx(50.0 - 0.025 * 45.0).epsilon(1e-3));
}

TEST_CASE("posterior summary of an exact Gaussian grid density") {
  // identity forward map: response at grid point x is {x}, observation 20,
  // sigma 1, so the posterior is a unit Gaussian truncated to [5,50]
  PriorConfig prior;
  ObservationSet o;
  o.times = {1.0, 2.0};
  o.accels = {20.0, 0.0};
  ResponseTable ident;
  ident.dc_grid = make_grid(5.0, 50.0, 901, GridSpacing::Linear);
  for (double x : ident.dc_grid) ident.responses.push_back({x, 0.0});
  PosteriorGrid post = grid_posterior(o, prior, ident, 1.0);
  PosteriorSummary s = posterior_summary(post);
  CHECK(s.mean == doctest::Approx(20.0).epsilon(1e-6));
  CHECK(s.mode == doctest::Approx(20.0).epsilon(1e-3));
  CHECK(s.std_dev == doctest::Approx(1.0).epsilon(1e-3));
  // equal-tailed 95% interval of a Gaussian is mean +- 1.96 sigma
  CHECK(s.ci_lo == doctest::Approx(20.0 - 1.959964).epsilon(5e-2));
  CHECK(s.ci_hi == doctest::Approx(20.0 + 1.959964).epsilon(5e-2));
  // mean and mode of a symmetric density agree within one cell
  CHECK(std::abs(s.mean - s.mode) <= 0.05);
}

TEST_CASE("posterior summary of a chain") {
  PriorConfig prior;
  McmcConfig cfg;
  cfg.n_samples = 60000;
  cfg.burn_in = 5000;
  cfg.proposal_std = prior.width();
  cfg.seed = 17;
  cfg.init = 27.5;
  McmcChain ch = mcmc_sample([](double) { return 0.0; }, prior, cfg);
  PosteriorSummary s = posterior_summary(ch);
  CHECK(s.mean == doctest::Approx(27.5).epsilon(0.02));
  CHECK(s.std_dev == doctest::Approx(45.0 / std::sqrt(12.0)).epsilon(0.05));
  CHECK(s.ci_lo == doctest::Approx(6.125).epsilon(0.15));
  CHECK(s.ci_hi == doctest::Approx(48.875).epsilon(0.05));

  McmcChain empty;
  empty.samples = {20.0};
  empty.burn_in = 1;
  CHECK_THROWS_AS(posterior_summary(empty), InversionError);
}

TEST_CASE("chain mean standard error is a sane scale") {
  PriorConfig prior;
  McmcConfig cfg;
  cfg.n_samples = 40000;
  cfg.burn_in = 4000;
  cfg.proposal_std = prior.width();
  cfg.seed = 23;
  cfg.init = 27.5;
  McmcChain ch = mcmc_sample([](double) { return 0.0; }, prior, cfg);
  PosteriorSummary s = posterior_summary(ch);
  double naive = s.std_dev / std::sqrt(double(ch.samples.size() - ch.burn_in));
  double mcse = chain_mean_standard_error(ch, 36);
  // autocorrelation inflates the naive i.i.d. error, but not wildly
  CHECK(mcse >= naive);
  CHECK(mcse <= 10.0 * naive);
  // too few batches for the tail length
  McmcChain tiny;
  tiny.samples.assign(50, 20.0);
  tiny.burn_in = 0;
  CHECK_THROWS_AS(chain_mean_standard_error(tiny, 36), InversionError);
}

TEST_CASE("posterior and chain agree on a shared synthetic problem") {
  ForwardSetup s = quick_setup(400);
  std::vector<double> clean = forward_response(20.0, s);
  Rng rng(2026);
  std::vector<double> noisy = clean;
  double sigma = 0.03;
  for (double& x : noisy) x += sigma * rng.normal();
  ObservationSet o = obs_from(s, noisy);

  FitResult fit = least_squares_fit(o, PriorConfig{}, s);
  // fine local grid around the fit; the posterior is sharply concentrated
  double h = 0.05;
  double curv = (sse_at(o, fit.d_c_hat - h, s) - 2 * fit.sse + sse_at(o, fit.d_c_hat + h, s)) /
                (h * h);
  double sp = sigma / std::sqrt(0.5 * curv);
  std::vector<double> lg =
      make_grid(fit.d_c_hat - 8 * sp, fit.d_c_hat + 8 * sp, 121, GridSpacing::Linear);
  PosteriorGrid post = grid_posterior(o, PriorConfig{}, build_response_table(lg, s), sigma);
  PosteriorSummary gs = posterior_summary(post);

  McmcConfig cfg;
  cfg.n_samples = 4000;
  cfg.burn_in = 800;
  cfg.proposal_std = 2.4 * sp;
  cfg.seed = 41;
  cfg.init = fit.d_c_hat;
  McmcChain ch = mcmc_sample(o, PriorConfig{}, sigma, s, cfg);
  PosteriorSummary cs = posterior_summary(ch);
  double mcse = chain_mean_standard_error(ch, 32);
  CHECK(std::abs(cs.mean - gs.mean) <= 4.0 * mcse);
  CHECK(cs.std_dev == doctest::Approx(gs.std_dev).epsilon(0.2));
}

TEST_CASE("validation of observation and prior inputs") {
  ObservationSet o;
  o.times = {1.0};
  o.accels = {0.0};
  CHECK_THROWS_AS(o.validate(), ValidationError);
  o.times = {1.0, 0.5};
  o.accels = {0.0, 0.0};
  CHECK_THROWS_AS(o.validate(), ValidationError);
  o.times = {1.0, 2.0};
  o.accels = {0.0};
  CHECK_THROWS_AS(o.validate(), ValidationError);

  PriorConfig prior;
  prior.lower = 10.0;
  prior.upper = 10.0;
  CHECK_THROWS_AS(prior.validate(), ValidationError);
  prior = PriorConfig{};
  prior.lower = -1.0;
  CHECK_THROWS_AS(prior.validate(), ValidationError);

  NoiseModel nm;
  nm.mode = NoiseModel::Mode::Fixed;
  nm.sigma = 0.0;
  CHECK_THROWS_AS(nm.validate(), ValidationError);
}
