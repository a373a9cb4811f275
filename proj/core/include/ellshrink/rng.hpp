#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace ellshrink {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
//
// The 128-bit counter is split into a 32-bit block index (advanced as the
// stream is consumed) and three 32-bit words that name the substream.
// Substream (seed, replicate, lane) therefore never overlaps any other
// substream derived from the same seed, and can be constructed directly
// without stepping through its predecessors.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  Philox4x32(std::uint64_t seed, std::uint64_t replicate, std::uint32_t lane = 0) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  // Raw bijection: ten rounds of the Philox S-box over `counter` under `key`.
  static Block encrypt(Block counter, Key key) noexcept;

 private:
  Key key_;
  Block counter_;
  Block buffer_{};
  unsigned used_ = 4;
};

using Substream = Philox4x32;

// Derive the generator for replicate `k` of a run seeded with `seed`.
// `lane` separates independent consumers inside one replicate.
inline Substream substream(std::uint64_t seed, std::uint64_t k, std::uint32_t lane = 0) noexcept {
  return Substream(seed, k, lane);
}

}  // namespace ellshrink
