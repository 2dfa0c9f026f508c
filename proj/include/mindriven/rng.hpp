// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>

namespace mindriven {

/// Purpose of a stream. Distinct roles of the same replica never overlap.
enum class StreamRole : std::uint64_t {
  Simulation = 1,
  Coupling = 2,
  Initial = 3,
  Ensemble = 4,
  Scaling = 5,
};

/// Counter-based random stream keyed by (seed, replica, role).
///
/// Output k is a SplitMix64 finalizer applied to key + (k + 1) * golden, so
/// each stream is a pure function of its key and position. Keys are derived
/// by chained mixing; streams for different replicas or roles are independent
/// for practical purposes and fully reproducible from the master seed.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t seed, std::uint64_t replica, StreamRole role)
      : key_(derive_key(seed, replica, static_cast<std::uint64_t>(role))) {}

  explicit RandomStream(std::uint64_t key) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    ++counter_;
    return mix(key_ + counter_ * kGolden);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_open_closed() {
    return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
  }

  /// Unit-mean exponential variate, always strictly positive.
  double exponential();

  /// Uniform integer on [lo, hi] without modulo bias.
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi);

  /// Independent child stream; does not advance this one.
  RandomStream split(std::uint64_t index) const {
    return RandomStream(mix(key_ ^ mix(index + kGolden)));
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t position() const { return counter_; }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t replica,
                                  std::uint64_t role) {
    std::uint64_t k = mix(seed + kGolden);
    k = mix(k ^ (replica * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL));
    k = mix(k ^ (role * 0xaef17502108ef2d9ULL + 0x2545f4914f6cdd1dULL));
    return k;
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace mindriven
