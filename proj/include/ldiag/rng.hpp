#pragma once

// Counter-based random streams (Philox4x32-10). A stream is identified by a
// 64-bit key; the i-th output block of a stream depends only on (key, i), so
// independent replicates can be generated in any order on any thread.

#include <array>
#include <cstdint>
#include <initializer_list>

namespace ldiag::rng {

using Block = std::array<std::uint32_t, 4>;

[[nodiscard]] Block philox4x32(Block counter, std::array<std::uint32_t, 2> key) noexcept;

/// SplitMix64-style mixing of a sequence of words into one stream key.
[[nodiscard]] std::uint64_t derive_key(std::initializer_list<std::uint64_t> words) noexcept;

/// Sequential reader over one stream. The counter's high 64 bits are a
/// sub-stream id, the low 64 bits advance per block.
class Stream {
 public:
  Stream(std::uint64_t key, std::uint64_t substream) noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Standard exponential, -log(1 - U).
  double exponential() noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }
  std::uint64_t next_u64() noexcept;

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint64_t substream_;
  std::uint64_t block_index_ = 0;
  Block buffer_{};
  int cursor_ = 2;  // in 64-bit words; 2 means buffer exhausted
};

}  // namespace ldiag::rng
