#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace selfbound {

/// Seeded random stream with named derivation paths.
///
/// All randomness in the library flows from one master seed through
/// `derive(label)` / `derive(label, index)`, so parallel and serial
/// schedules see identical streams. Distribution sampling is implemented
/// from raw 64-bit words (not std::*_distribution) so sequences are pinned
/// down to the bit, independent of the standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Child stream keyed by this stream's seed plus a label (and index).
  /// Derivation depends only on the construction seed, never on how many
  /// values have been drawn.
  Rng derive(std::string_view label, std::uint64_t index = 0) const;

  std::uint64_t seed() const noexcept { return key_; }

  std::uint64_t bits() { return engine_(); }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound), rejection sampling (unbiased).
  std::uint64_t below(std::uint64_t bound);

  /// Standard normal via Box-Muller (one value per call, no cached spare).
  double normal();

 private:
  std::uint64_t key_;
  std::mt19937_64 engine_;
};

}  // namespace selfbound
