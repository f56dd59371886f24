#pragma once

#include <cmath>
#include <cstdint>

namespace samlab {

/// Counter-based deterministic random stream.
///
/// The generator is SplitMix64 over a state derived from (seed, stream_id):
///   state0 = mix(mix(seed) ^ (mix(stream_id) + GOLDEN))
/// where mix is the SplitMix64 finalizer and GOLDEN is the 64-bit golden-ratio
/// increment. Two streams with identical (seed, stream_id) produce identical
/// sequences; distinct stream ids decorrelate through the finalizer. Streams
/// are cheap value types and are meant to be consumed by value, one per run.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
      : seed_(seed), stream_id_(stream_id) {
    state_ = mix(mix(seed) ^ (mix(stream_id) + kGolden));
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Derive an independent child stream; deterministic in (seed, stream_id, child).
  RngStream fork(std::uint64_t child) const {
    return RngStream(mix(seed_ ^ mix(child)), stream_id_ + 0x632BE59BD9B4E019ULL + child);
  }

  std::uint64_t next_u64() {
    state_ += kGolden;
    return mix(state_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). n must be positive.
  int next_index(int n) { return static_cast<int>(next_double() * static_cast<double>(n)); }

  /// One fair bit.
  int next_bit() { return static_cast<int>(next_u64() >> 63); }

  /// Standard normal via Box-Muller; pairs are cached.
  double next_gaussian() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = next_double();
    double u2 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * M_PI * u2;
    cached_ = mag * std::sin(ang);
    has_cached_ = true;
    return mag * std::cos(ang);
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  static std::uint64_t mix(std::uint64_t z) {
    z += kGolden;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t state_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace samlab
