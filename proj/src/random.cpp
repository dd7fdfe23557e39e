#include "stimfolio/random.hpp"

#include <cmath>

namespace stimfolio {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t hash_label(std::string_view label) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t derive_stream_key(std::uint64_t master_seed,
                                std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t key = splitmix64(master_seed);
  for (std::uint64_t component : path) key = splitmix64(key ^ splitmix64(component));
  return key;
}

std::uint64_t RandomStream::below(std::uint64_t bound) noexcept {
  // Rejection sampling keeps the result exactly uniform.
  const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

double RandomStream::exponential() noexcept { return -std::log(uniform01()); }

}  // namespace stimfolio
