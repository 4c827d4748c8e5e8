#pragma once

#include <cstdint>
#include <cmath>
#include <limits>

namespace ergodic {

/// Deterministic random stream (xoshiro256++ seeded through splitmix64).
///
/// Streams derived from the same (master_seed, index) pair are identical
/// across runs and thread schedules, which is what the replica-level
/// determinism contract of the experiment harness relies on.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed) { seed_state(seed); }

  /// Stream for replica `index` under a given master seed.
  static RngStream derive(std::uint64_t master_seed, std::uint64_t index) {
    // counter-based split: mix the index into the seed before expansion
    std::uint64_t x = master_seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    return RngStream(splitmix64(x));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  std::uint64_t operator()() { return next_u64(); }
  static constexpr std::uint64_t min() { return 0; }
  static constexpr std::uint64_t max() {
    return std::numeric_limits<std::uint64_t>::max();
  }

  /// Uniform on (0,1); never returns exactly 0 or 1.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Unit-rate exponential draw.
  double exponential() { return -std::log(uniform()); }

  /// Standard normal draw (Marsaglia polar method with a cached spare).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t splitmix64(std::uint64_t&& x) {
    std::uint64_t y = x;
    return splitmix64(y);
  }

  void seed_state(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& s : s_) s = splitmix64(x);
    has_spare_ = false;
  }

  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ergodic
