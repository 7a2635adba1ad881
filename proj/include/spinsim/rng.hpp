#pragma once

#include <cmath>
#include <cstdint>

namespace spinsim {

// Role of a random substream within one trial.  Every stochastic draw in
// the simulator goes through a (seed, stream, purpose) substream so that
// trials are reproducible independently of execution order and thread
// count.
enum class Purpose : std::uint32_t {
  kTrajectory = 1,
  kEmission = 2,
  kFlip = 3,
  kDark = 4,
  kDetector = 5,
  kPulse = 6,
  kArrivals = 7,
  kMeasEmission = 8,
  kMeasFlip = 9,
  kMeasDark = 10,
};

// Counter-based splittable generator.  The state is derived from
// (master seed, stream id, purpose) through SplitMix64 finalizers, and the
// output sequence is the SplitMix64 stream itself.  Identical keys give
// bit-identical sequences on every platform; distributions are hand-rolled
// (std::* distributions are implementation-defined).
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream, Purpose purpose) {
    state_ = mix(seed + 0x9E3779B97F4A7C15ull);
    state_ = mix(state_ ^ mix(stream + 0xBF58476D1CE4E5B9ull));
    state_ = mix(state_ ^ mix(static_cast<std::uint64_t>(purpose) +
                              0x94D049BB133111EBull));
  }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix(state_);
  }

  // Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1]; safe as a log argument.
  double uniform_pos() { return 1.0 - uniform(); }

  double uniform_range(double lo, double hi) {
    return lo + (hi - lo) * uniform();
  }

  double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

  double normal(double mean, double sigma) {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return mean + sigma * std::sqrt(-2.0 * std::log(u1)) *
                      std::cos(6.283185307179586 * u2);
  }

  bool bernoulli(double p) { return uniform() < p; }

  unsigned poisson(double mu) {
    // Inversion by sequential search; means in this code are small.
    if (mu <= 0.0) return 0;
    double p = std::exp(-mu);
    double cdf = p;
    const double u = uniform();
    unsigned k = 0;
    while (u > cdf && k < 100000) {
      ++k;
      p *= mu / static_cast<double>(k);
      cdf += p;
    }
    return k;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace spinsim
