#pragma once

#include <cstdint>

namespace ppfso3 {

/**
 * Counter-based SplitMix64 stream.
 *
 * The k-th raw output (k = 1, 2, ...) is mix(seed + k * 0x9E3779B97F4A7C15)
 * where mix is the SplitMix64 finalizer:
 *   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
 *   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
 *   z =  z ^ (z >> 31)
 * all arithmetic modulo 2^64. uniform() maps a raw output x to
 * ((x >> 11) + 1) * 2^-53, which lies in (0, 1]. gaussian() consumes two
 * uniforms u1, u2 and returns sqrt(-2 ln u1) * cos(2 pi u2) (the sine branch
 * of Box-Muller is discarded so every draw costs exactly two outputs).
 *
 * Any implementation following these rules reproduces the same streams.
 */
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  double uniform();
  double gaussian();

  std::uint64_t counter_state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

}  // namespace ppfso3
