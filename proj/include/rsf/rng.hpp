#ifndef RSF_RNG_HPP
#define RSF_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace rsf {

// Seeded random stream used everywhere randomness is needed. Normal
// deviates come from an explicit Box-Muller transform over mt19937_64
// uniforms so the stream is pinned by this code, not by the standard
// library's unspecified normal_distribution. Manifests record the
// generator as "mt19937_64/box-muller".

class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static constexpr const char* generator_name() { return "mt19937_64/box-muller"; }

  /// Uniform on [0, 1).
  double uniform() {
    return std::generate_canonical<double, 53>(engine_);
  }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal deviate.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the log is finite
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double angle = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(angle);
    have_spare_ = true;
    return r * std::cos(angle);
  }

  double normal(double mean, double std) { return mean + std * normal(); }

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

} // namespace rsf

#endif
