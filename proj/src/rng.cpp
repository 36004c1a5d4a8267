#include "ldiag/rng.hpp"

#include <cmath>

namespace ldiag::rng {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline std::uint64_t splitmix(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

Block philox4x32(Block ctr, std::array<std::uint32_t, 2> key) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

std::uint64_t derive_key(std::initializer_list<std::uint64_t> words) noexcept {
  std::uint64_t h = 0x6A09E667F3BCC909ull;
  for (auto w : words) h = splitmix(h ^ splitmix(w));
  return h;
}

Stream::Stream(std::uint64_t key, std::uint64_t substream) noexcept
    : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)},
      substream_(substream) {}

std::uint64_t Stream::next_u64() noexcept {
  if (cursor_ == 2) {
    const Block ctr{static_cast<std::uint32_t>(block_index_), static_cast<std::uint32_t>(block_index_ >> 32),
                    static_cast<std::uint32_t>(substream_), static_cast<std::uint32_t>(substream_ >> 32)};
    buffer_ = philox4x32(ctr, key_);
    ++block_index_;
    cursor_ = 0;
  }
  const std::uint64_t v = (static_cast<std::uint64_t>(buffer_[2 * cursor_ + 1]) << 32) | buffer_[2 * cursor_];
  ++cursor_;
  return v;
}

double Stream::uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Stream::exponential() noexcept { return -std::log1p(-uniform()); }

}  // namespace ldiag::rng
