#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace realgym {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Combines two 64-bit values into a well-mixed key.
inline constexpr std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) noexcept {
  return splitmix64(splitmix64(a) ^ (b + 0x632BE59BD9B4E019ull + (a << 6) + (a >> 2)));
}

/// Counter-based random stream.
///
/// The n-th draw is a pure function of (seed, stream_id, n), so a stream can
/// be reproduced on any platform and adding new streams never perturbs the
/// existing ones. Distributions are implemented here rather than taken from
/// <random>, whose distribution algorithms are implementation-defined.
class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_id_(stream_id), key_(mix_seed(seed, stream_id)) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  std::uint64_t counter() const noexcept { return counter_; }

  // Rewinds or fast-forwards the stream to an absolute position.
  void set_counter(std::uint64_t c) noexcept { counter_ = c; }

  std::uint64_t next_u64() noexcept {
    return splitmix64(key_ ^ splitmix64(counter_++));
  }

  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_int(std::uint64_t n) noexcept {
    // Lemire's multiply-shift with rejection for exact uniformity.
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        x = next_u64();
        m = static_cast<__uint128_t>(x) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  // Standard normal via Box-Muller (one value per two uniforms).
  double normal() noexcept {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double stddev) noexcept { return mean + stddev * normal(); }

  // Poisson draw. Large rates are split into chunks of at most 30, since a
  // sum of independent Poisson variables is Poisson with the summed rate.
  std::uint64_t poisson(double rate) noexcept {
    if (!(rate > 0.0)) return 0;
    std::uint64_t total = 0;
    while (rate > 0.0) {
      const double chunk = rate > 30.0 ? 30.0 : rate;
      rate -= chunk;
      const double limit = std::exp(-chunk);
      double prod = uniform();
      while (prod > limit) {
        ++total;
        prod *= uniform();
      }
    }
    return total;
  }

  friend bool operator==(const RngStream&, const RngStream&) = default;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace realgym
