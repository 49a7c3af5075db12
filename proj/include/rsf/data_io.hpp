#ifndef RSF_DATA_IO_HPP
#define RSF_DATA_IO_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rsf/inversion.hpp"
#include "rsf/solver.hpp"

namespace rsf {

enum class AccelUnit { G, MPerS2, UmPerS2 };

std::string unit_name(AccelUnit u);
std::optional<AccelUnit> parse_unit(const std::string& name);

/// Conversion factor into um/s^2. The g convention is 9.8 m/s^2.
double to_um_per_s2_factor(AccelUnit u);

/// Where a series came from; synthetic series record how they were made.
struct Provenance {
  enum class Kind { Measured, Synthetic };
  Kind kind = Kind::Measured;
  std::uint64_t seed = 0;
  double sigma_noise = 0.0;
  double d_c_true = 0.0;
};

struct TimeSeries {
  std::vector<double> times;   // [s], strictly increasing
  std::vector<double> values;
  AccelUnit unit = AccelUnit::UmPerS2;
  Provenance provenance;

  std::size_t size() const { return times.size(); }
  void validate() const;

  /// View as observations; requires unit um/s^2.
  ObservationSet to_observations() const;
};

/// Options for read_seismogram. The unit hint applies when the file
/// itself carries no "# unit:" line.
struct SeismogramFormat {
  std::optional<AccelUnit> unit;
};

/// Load a record from either a two-column "t,a" CSV or a fixed-rate
/// single-column file with "# dt:" in its header. Lines starting with
/// '#' hold "key: value" metadata (unit, dt, t0). Parse failures carry
/// the offending line number.
TimeSeries read_seismogram(const std::string& path, const SeismogramFormat& fmt = {});

/// Convert between acceleration units; exact round trips.
TimeSeries convert_units(const TimeSeries& ts, AccelUnit target);

/// Forward response at d_c_true plus seeded Gaussian noise of std
/// sigma_noise. Deterministic per seed.
TimeSeries generate_synthetic(double d_c_true, const ForwardSetup& setup, double sigma_noise,
                              std::uint64_t seed);

// ---- persistence ----------------------------------------------------------
// All floats are written with 17 significant digits so text round trips
// reproduce doubles exactly. Artifact CSVs start with "# schema:" lines;
// a schema line naming an unknown version is an explicit error.

void write_trajectory_csv(const Trajectory& traj, const std::string& path);
Trajectory read_trajectory_csv(const std::string& path);

void write_timeseries_csv(const TimeSeries& ts, const std::string& path);
TimeSeries read_timeseries_csv(const std::string& path);

void write_posterior_csv(const PosteriorGrid& grid, const std::string& path);
PosteriorGrid read_posterior_csv(const std::string& path);

void write_chain_csv(const McmcChain& chain, const std::string& path);
McmcChain read_chain_csv(const std::string& path);

/// FNV-1a 64-bit content hash, as fixed-width hex.
std::string hash_file(const std::string& path);

std::string format_double(double x);

} // namespace rsf

#endif
