#include "rsf/data_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rsf/errors.hpp"
#include "rsf/rng.hpp"

namespace rsf {

std::string unit_name(AccelUnit u) {
  switch (u) {
    case AccelUnit::G: return "g";
    case AccelUnit::MPerS2: return "m/s2";
    case AccelUnit::UmPerS2: return "um/s2";
  }
  throw ValidationError("unit_name: unknown unit");
}

std::optional<AccelUnit> parse_unit(const std::string& name) {
  std::string s;
  for (char c : name)
    if (!std::isspace(static_cast<unsigned char>(c))) s += char(std::tolower(static_cast<unsigned char>(c)));
  if (s == "g") return AccelUnit::G;
  if (s == "m/s2" || s == "m/s^2") return AccelUnit::MPerS2;
  if (s == "um/s2" || s == "um/s^2" || s == "micron/s2") return AccelUnit::UmPerS2;
  return std::nullopt;
}

double to_um_per_s2_factor(AccelUnit u) {
  switch (u) {
    case AccelUnit::G: return 9.8e6;   // g = 9.8 m/s^2
    case AccelUnit::MPerS2: return 1e6;
    case AccelUnit::UmPerS2: return 1.0;
  }
  throw ValidationError("to_um_per_s2_factor: unknown unit");
}

void TimeSeries::validate() const {
  if (times.size() != values.size())
    throw ValidationError("time series: times and values must have equal length");
  if (times.empty()) throw ValidationError("time series: empty");
  for (std::size_t i = 0; i + 1 < times.size(); ++i)
    if (!(times[i] < times[i + 1]))
      throw ValidationError("time series: times must be strictly increasing");
  for (double v : values)
    if (!std::isfinite(v)) throw ValidationError("time series: non-finite value");
}

ObservationSet TimeSeries::to_observations() const {
  if (unit != AccelUnit::UmPerS2)
    throw ValidationError("time series: convert to um/s2 before inverting (is " +
                          unit_name(unit) + ")");
  ObservationSet obs;
  obs.times = times;
  obs.accels = values;
  obs.validate();
  return obs;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace {

[[noreturn]] void parse_fail(const std::string& path, std::size_t line_no,
                             const std::string& msg) {
  std::ostringstream out;
  out << path << ":" << line_no << ": " << msg;
  throw IoError(out.str());
}

double parse_number(const std::string& tok, const std::string& path, std::size_t line_no) {
  const char* begin = tok.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  while (end && *end && std::isspace(static_cast<unsigned char>(*end))) ++end;
  if (end == begin || (end && *end != '\0'))
    parse_fail(path, line_no, "not a number: '" + tok + "'");
  if (std::isnan(v)) parse_fail(path, line_no, "NaN value");
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool looks_numeric(const std::string& tok) {
  const char* begin = tok.c_str();
  char* end = nullptr;
  std::strtod(begin, &end);
  return end != begin;
}

struct HeaderMeta {
  std::size_t line_no = 0;
  std::string key;
  std::string value;
};

struct ParsedFile {
  std::vector<HeaderMeta> meta;          // "# key: value" lines
  std::vector<std::pair<std::size_t, std::string>> rows;  // line number, content
};

ParsedFile slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path);
  ParsedFile out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      std::string body = trim(t.substr(1));
      auto colon = body.find(':');
      if (colon != std::string::npos) {
        HeaderMeta m;
        m.line_no = line_no;
        m.key = trim(body.substr(0, colon));
        m.value = trim(body.substr(colon + 1));
        out.meta.push_back(std::move(m));
      }
      continue;  // bare comments are skipped
    }
    out.rows.emplace_back(line_no, t);
  }
  return out;
}

const HeaderMeta* find_meta(const ParsedFile& f, const std::string& key) {
  for (const auto& m : f.meta)
    if (m.key == key) return &m;
  return nullptr;
}

void require_schema(const ParsedFile& f, const std::string& path, const std::string& expect) {
  const HeaderMeta* m = find_meta(f, "schema");
  if (!m) throw IoError(path + ": missing '# schema:' header");
  if (m->value != expect)
    parse_fail(path, m->line_no,
               "unsupported schema version '" + m->value + "' (expected '" + expect + "')");
}

void check_increasing(const std::vector<double>& times, const std::string& path,
                      const std::vector<std::size_t>& line_nos) {
  for (std::size_t i = 0; i + 1 < times.size(); ++i)
    if (!(times[i] < times[i + 1]))
      parse_fail(path, line_nos[i + 1], "time not strictly increasing");
}

} // namespace

TimeSeries read_seismogram(const std::string& path, const SeismogramFormat& fmt) {
  ParsedFile f = slurp(path);
  if (f.rows.empty()) throw IoError(path + ":1: no data rows");

  TimeSeries ts;
  if (const HeaderMeta* m = find_meta(f, "unit")) {
    auto u = parse_unit(m->value);
    if (!u) parse_fail(path, m->line_no, "unknown unit '" + m->value + "'");
    ts.unit = *u;
  } else if (fmt.unit) {
    ts.unit = *fmt.unit;
  } else {
    parse_fail(path, 1, "unit tag missing (add '# unit: g|m/s2|um/s2' or pass a hint)");
  }

  const HeaderMeta* dt_meta = find_meta(f, "dt");
  std::vector<std::size_t> line_nos;
  if (dt_meta) {
    // fixed-rate single-column format
    double dt = parse_number(dt_meta->value, path, dt_meta->line_no);
    if (!(dt > 0.0)) parse_fail(path, dt_meta->line_no, "dt must be > 0");
    double t0 = 0.0;
    if (const HeaderMeta* m = find_meta(f, "t0")) t0 = parse_number(m->value, path, m->line_no);
    std::size_t i = 0;
    for (const auto& [line_no, row] : f.rows) {
      auto cols = split_csv(row);
      if (cols.size() != 1) parse_fail(path, line_no, "expected a single column");
      ts.times.push_back(t0 + double(i) * dt);
      ts.values.push_back(parse_number(trim(cols[0]), path, line_no));
      line_nos.push_back(line_no);
      ++i;
    }
  } else {
    // two-column "t,a" CSV, optional header row
    bool first = true;
    for (const auto& [line_no, row] : f.rows) {
      auto cols = split_csv(row);
      if (first && cols.size() == 2 && !looks_numeric(trim(cols[0]))) {
        first = false;
        continue;  // "t,a" header row
      }
      first = false;
      if (cols.size() != 2) parse_fail(path, line_no, "expected two columns 't,a'");
      ts.times.push_back(parse_number(trim(cols[0]), path, line_no));
      ts.values.push_back(parse_number(trim(cols[1]), path, line_no));
      line_nos.push_back(line_no);
    }
  }
  if (ts.times.empty()) throw IoError(path + ":1: no data rows");
  check_increasing(ts.times, path, line_nos);
  ts.validate();
  return ts;
}

TimeSeries convert_units(const TimeSeries& ts, AccelUnit target) {
  TimeSeries out = ts;
  if (ts.unit == target) return out;
  double factor = to_um_per_s2_factor(ts.unit) / to_um_per_s2_factor(target);
  for (double& v : out.values) v *= factor;
  out.unit = target;
  return out;
}

TimeSeries generate_synthetic(double d_c_true, const ForwardSetup& setup, double sigma_noise,
                              std::uint64_t seed) {
  if (!(sigma_noise >= 0.0))
    throw ValidationError("generate_synthetic: sigma_noise must be >= 0");
  std::vector<double> resp = forward_response(d_c_true, setup);

  TimeSeries ts;
  ts.times = setup.times;
  ts.values = std::move(resp);
  ts.unit = AccelUnit::UmPerS2;
  ts.provenance.kind = Provenance::Kind::Synthetic;
  ts.provenance.seed = seed;
  ts.provenance.sigma_noise = sigma_noise;
  ts.provenance.d_c_true = d_c_true;

  if (sigma_noise > 0.0) {
    Rng rng(seed);
    for (double& v : ts.values) v += sigma_noise * rng.normal();
  }
  ts.validate();
  return ts;
}

// ---- persistence ----------------------------------------------------------

namespace {

constexpr const char* kTrajectorySchema = "rsfinv.trajectory.v1";
constexpr const char* kTimeSeriesSchema = "rsfinv.timeseries.v1";
constexpr const char* kPosteriorSchema = "rsfinv.posterior.v1";
constexpr const char* kChainSchema = "rsfinv.chain.v1";

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write file: " + path);
  return out;
}

double meta_number(const ParsedFile& f, const std::string& path, const std::string& key) {
  const HeaderMeta* m = find_meta(f, key);
  if (!m) throw IoError(path + ": missing '# " + key + ":' header");
  return parse_number(m->value, path, m->line_no);
}

std::vector<std::vector<double>> read_rows(const ParsedFile& f, const std::string& path,
                                           const std::string& header, std::size_t n_cols) {
  if (f.rows.empty()) throw IoError(path + ":1: no data rows");
  std::size_t start = 0;
  if (trim(f.rows[0].second) == header) start = 1;
  std::vector<std::vector<double>> rows;
  rows.reserve(f.rows.size() - start);
  for (std::size_t r = start; r < f.rows.size(); ++r) {
    const auto& [line_no, row] = f.rows[r];
    auto cols = split_csv(row);
    if (cols.size() != n_cols) {
      std::ostringstream msg;
      msg << "expected " << n_cols << " columns, got " << cols.size();
      parse_fail(path, line_no, msg.str());
    }
    std::vector<double> vals(n_cols);
    for (std::size_t c = 0; c < n_cols; ++c)
      vals[c] = parse_number(trim(cols[c]), path, line_no);
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw IoError(path + ":1: no data rows");
  return rows;
}

} // namespace

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  auto out = open_out(path);
  out << "# schema: " << kTrajectorySchema << "\n";
  out << "t,mu,theta,v,a\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const SliderState& s = traj.states[i];
    out << format_double(traj.times[i]) << ',' << format_double(s.mu) << ','
        << format_double(s.theta) << ',' << format_double(s.v) << ','
        << format_double(s.a) << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

Trajectory read_trajectory_csv(const std::string& path) {
  ParsedFile f = slurp(path);
  require_schema(f, path, kTrajectorySchema);
  auto rows = read_rows(f, path, "t,mu,theta,v,a", 5);
  Trajectory traj;
  traj.times.reserve(rows.size());
  traj.states.reserve(rows.size());
  for (const auto& r : rows) {
    traj.times.push_back(r[0]);
    traj.states.push_back(SliderState{r[1], r[2], r[3], r[4]});
  }
  return traj;
}

void write_timeseries_csv(const TimeSeries& ts, const std::string& path) {
  auto out = open_out(path);
  out << "# schema: " << kTimeSeriesSchema << "\n";
  out << "# unit: " << unit_name(ts.unit) << "\n";
  if (ts.provenance.kind == Provenance::Kind::Synthetic) {
    out << "# provenance: synthetic\n";
    out << "# generator: " << Rng::generator_name() << "\n";
    out << "# seed: " << ts.provenance.seed << "\n";
    out << "# sigma_noise: " << format_double(ts.provenance.sigma_noise) << "\n";
    out << "# d_c_true: " << format_double(ts.provenance.d_c_true) << "\n";
  } else {
    out << "# provenance: measured\n";
  }
  out << "t,a\n";
  for (std::size_t i = 0; i < ts.size(); ++i)
    out << format_double(ts.times[i]) << ',' << format_double(ts.values[i]) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

TimeSeries read_timeseries_csv(const std::string& path) {
  ParsedFile f = slurp(path);
  require_schema(f, path, kTimeSeriesSchema);
  TimeSeries ts;

  const HeaderMeta* um = find_meta(f, "unit");
  if (!um) throw IoError(path + ": missing '# unit:' header");
  auto u = parse_unit(um->value);
  if (!u) parse_fail(path, um->line_no, "unknown unit '" + um->value + "'");
  ts.unit = *u;

  const HeaderMeta* pm = find_meta(f, "provenance");
  if (pm && pm->value == "synthetic") {
    ts.provenance.kind = Provenance::Kind::Synthetic;
    ts.provenance.seed = std::uint64_t(meta_number(f, path, "seed"));
    ts.provenance.sigma_noise = meta_number(f, path, "sigma_noise");
    ts.provenance.d_c_true = meta_number(f, path, "d_c_true");
  }

  auto rows = read_rows(f, path, "t,a", 2);
  for (const auto& r : rows) {
    ts.times.push_back(r[0]);
    ts.values.push_back(r[1]);
  }
  ts.validate();
  return ts;
}

void write_posterior_csv(const PosteriorGrid& grid, const std::string& path) {
  auto out = open_out(path);
  out << "# schema: " << kPosteriorSchema << "\n";
  out << "# prior_lower: " << format_double(grid.prior.lower) << "\n";
  out << "# prior_upper: " << format_double(grid.prior.upper) << "\n";
  out << "# sigma_noise: " << format_double(grid.sigma_noise) << "\n";
  out << "# log_evidence: " << format_double(grid.log_evidence) << "\n";
  out << "# n_failed: " << grid.n_failed << "\n";
  out << "dc,log_like,density\n";
  for (std::size_t i = 0; i < grid.grid.size(); ++i)
    out << format_double(grid.grid[i]) << ',' << format_double(grid.log_likelihoods[i]) << ','
        << format_double(grid.density[i]) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

PosteriorGrid read_posterior_csv(const std::string& path) {
  ParsedFile f = slurp(path);
  require_schema(f, path, kPosteriorSchema);
  PosteriorGrid grid;
  grid.prior.lower = meta_number(f, path, "prior_lower");
  grid.prior.upper = meta_number(f, path, "prior_upper");
  grid.sigma_noise = meta_number(f, path, "sigma_noise");
  grid.log_evidence = meta_number(f, path, "log_evidence");
  grid.n_failed = std::size_t(meta_number(f, path, "n_failed"));
  auto rows = read_rows(f, path, "dc,log_like,density", 3);
  for (const auto& r : rows) {
    grid.grid.push_back(r[0]);
    grid.log_likelihoods.push_back(r[1]);
    grid.density.push_back(r[2]);
  }
  grid.validate();
  return grid;
}

void write_chain_csv(const McmcChain& chain, const std::string& path) {
  auto out = open_out(path);
  out << "# schema: " << kChainSchema << "\n";
  out << "# generator: " << Rng::generator_name() << "\n";
  out << "# seed: " << chain.seed << "\n";
  out << "# proposal_std: " << format_double(chain.proposal_std) << "\n";
  out << "# burn_in: " << chain.burn_in << "\n";
  out << "# acceptance_rate: " << format_double(chain.acceptance_rate) << "\n";
  out << "iter,dc,log_post\n";
  for (std::size_t i = 0; i < chain.samples.size(); ++i)
    out << i << ',' << format_double(chain.samples[i]) << ','
        << format_double(chain.log_posts[i]) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

McmcChain read_chain_csv(const std::string& path) {
  ParsedFile f = slurp(path);
  require_schema(f, path, kChainSchema);
  McmcChain chain;
  chain.seed = std::uint64_t(meta_number(f, path, "seed"));
  chain.proposal_std = meta_number(f, path, "proposal_std");
  chain.burn_in = std::size_t(meta_number(f, path, "burn_in"));
  chain.acceptance_rate = meta_number(f, path, "acceptance_rate");
  chain.acceptance_warning = chain.acceptance_rate < 0.05 || chain.acceptance_rate > 0.95;
  auto rows = read_rows(f, path, "iter,dc,log_post", 3);
  for (const auto& r : rows) {
    chain.samples.push_back(r[1]);
    chain.log_posts.push_back(r[2]);
  }
  if (chain.burn_in >= chain.samples.size())
    throw IoError(path + ": burn_in exceeds chain length");
  return chain;
}

std::string hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::uint64_t h = 14695981039346656037ull;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
    if (!in) break;
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

} // namespace rsf
