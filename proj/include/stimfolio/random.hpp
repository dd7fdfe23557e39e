#pragma once

// Counter-splitting seed derivation. Every unit of work (an LHS family, one rock
// realization, one mixture cloud) gets its own engine keyed by the master seed and
// a path of labels/indices, so it can be reproduced in isolation and in any order.

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace stimfolio {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// 64-bit FNV-1a of a label, used to turn identifiers into path components.
std::uint64_t hash_label(std::string_view label) noexcept;

/// Key for the stream at `path` below `master_seed`.
std::uint64_t derive_stream_key(std::uint64_t master_seed,
                                std::initializer_list<std::uint64_t> path) noexcept;

/// Thin wrapper over mt19937_64 with distribution code that does not depend on
/// the standard library implementation, so streams are identical across toolchains.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t key) : engine_(key) {}

  /// Uniform on the open interval (0, 1).
  double uniform01() noexcept {
    return (double(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) noexcept;
  /// Unit-rate exponential variate.
  double exponential() noexcept;

 private:
  std::mt19937_64 engine_;
};

}  // namespace stimfolio
