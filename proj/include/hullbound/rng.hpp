#pragma once

#include <cstdint>
#include <string_view>

namespace hullbound {

/// FNV-1a over a string, used to turn operation names into stream tags.
constexpr std::uint64_t tag_of(std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : name) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based random stream.
///
/// The i-th output is a pure function of (key, i), where the key is derived
/// from (seed, tag, chunk). Work split into chunks therefore draws the same
/// numbers no matter which thread runs which chunk or in what order.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t chunk = 0)
      : key_(mix64(mix64(seed ^ 0x5851f42d4c957f2dULL) ^ mix64(tag + 0x9e3779b97f4a7c15ULL) ^
                   mix64(chunk * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL))) {}

  std::uint64_t next_u64() { return mix64(key_ + 0x9e3779b97f4a7c15ULL * (++counter_)); }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  /// Standard normal (Box-Muller; the second variate of each pair is cached).
  double normal();

  /// Exp(1).
  double exponential();

  /// Gamma(shape, 1) via Marsaglia-Tsang, with the shape < 1 boost.
  double gamma(double shape);

  /// Random sign, +1 or -1.
  double sign() { return (next_u64() >> 63) ? 1.0 : -1.0; }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace hullbound
