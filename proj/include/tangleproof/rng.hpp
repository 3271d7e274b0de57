#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tangleproof/errors.hpp"

namespace tangleproof {

// Counter-based random stream. Every draw is a pure function of
// (seed, step, slot), so overriding the decision at one step never perturbs
// the randomness consumed at any other step, and replays are exact without
// storing generator state.
//
// Slot layout per step:
//   0       pow duration
//   1       lookback
//   2       parent count (only consumed when the count is actually random)
//   3..     parent draws
struct RngStream {
  std::uint64_t seed = 0;

  static constexpr std::uint32_t kSlotTheta = 0;
  static constexpr std::uint32_t kSlotEps = 1;
  static constexpr std::uint32_t kSlotCount = 2;
  static constexpr std::uint32_t kSlotParent0 = 3;

  // SplitMix64-style finalizer over the three keys. The odd constants differ
  // per key so that (seed, step, slot) collisions require full 64-bit matches.
  [[nodiscard]] std::uint64_t draw_u64(std::uint64_t step,
                                       std::uint32_t slot) const {
    std::uint64_t z = seed;
    z += 0x9e3779b97f4a7c15ULL;
    z ^= step * 0xbf58476d1ce4e5b9ULL + 0x94d049bb133111ebULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z ^= (static_cast<std::uint64_t>(slot) + 1) * 0xd6e8feb86659fd93ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z = z ^ (z >> 31);
    z = (z ^ (z >> 33)) * 0xff51afd7ed558ccdULL;
    return z ^ (z >> 33);
  }

  // Uniform in [0, 1) with full 53-bit mantissa resolution.
  [[nodiscard]] double draw_unit(std::uint64_t step, std::uint32_t slot) const {
    return static_cast<double>(draw_u64(step, slot) >> 11) * 0x1.0p-53;
  }

  // Uniform index in [0, n). Modulo bias is at most n / 2^64 per draw, far
  // below anything the statistical tests can resolve, and exactly zero when
  // n divides 2^64.
  [[nodiscard]] std::size_t draw_index(std::uint64_t step, std::uint32_t slot,
                                       std::size_t n) const {
    if (n == 0) throw LogicBug("draw_index: empty range");
    return static_cast<std::size_t>(draw_u64(step, slot) % n);
  }

  // Inverse-CDF draw from a finite distribution. `probs` must sum to ~1;
  // the last bucket absorbs rounding slack.
  [[nodiscard]] std::size_t draw_categorical(
      std::uint64_t step, std::uint32_t slot,
      const std::vector<double>& probs) const {
    if (probs.empty()) throw LogicBug("draw_categorical: empty distribution");
    const double u = draw_unit(step, slot);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
      acc += probs[i];
      if (u < acc) return i;
    }
    return probs.size() - 1;
  }
};

}  // namespace tangleproof
