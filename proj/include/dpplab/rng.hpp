#pragma once

#include <cmath>
#include <cstdint>

namespace dpplab {

namespace detail {
// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}
inline constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ull;
}  // namespace detail

// Counter-based generator: value j of stream s under seed k is a pure function
// of (k, s, j). Streams split freely across draws, trials, and threads, and
// can be consumed in any order without coupling.
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, std::uint64_t stream)
      : key_(detail::mix64(detail::mix64(seed + detail::kGamma) ^
                           detail::mix64(stream * detail::kGamma + 1))) {}

  std::uint64_t next_u64() {
    return detail::mix64(key_ + (++counter_) * detail::kGamma);
  }

  // uniform on [0, 1), 53-bit resolution
  double next_uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // standard normal via Box-Muller; second deviate cached
  double next_normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = 1.0 - next_uniform();  // (0, 1], keeps log finite
    double u2 = next_uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

// Stable stream-id derivation for nested loops (experiment, n, trial, ...).
inline std::uint64_t derive_stream(std::uint64_t a, std::uint64_t b,
                                   std::uint64_t c = 0, std::uint64_t d = 0) {
  using detail::kGamma;
  using detail::mix64;
  std::uint64_t h = mix64(a + kGamma);
  h = mix64(h ^ (b + kGamma));
  h = mix64(h ^ (c + 2 * kGamma));
  h = mix64(h ^ (d + 3 * kGamma));
  return h;
}

}  // namespace dpplab
