#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace edpauli {

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}
}  // namespace detail

/// Counter-based generator: the stream is a pure function of
/// (seed, stream id, step, purpose), so per-walker sampling is reproducible
/// under any parallel schedule.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t step,
             std::uint64_t purpose = 0) {
    std::uint64_t k = detail::mix64(seed + 0x9E3779B97F4A7C15ULL);
    k = detail::mix64(k ^ (stream + 0xBF58476D1CE4E5B9ULL));
    k = detail::mix64(k ^ (step + 0x94D049BB133111EBULL));
    state_ = detail::mix64(k ^ (purpose + 0xD6E8FEB86659FD93ULL));
  }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return detail::mix64(state_);
  }

  /// Uniform in [0, 1).
  double next_uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (pairs cached).
  double next_gaussian() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(t);
    has_cached_ = true;
    return r * std::cos(t);
  }

 private:
  std::uint64_t state_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace edpauli
