#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace bcap {

/// Counter-based random stream (Philox4x32-10).
///
/// A stream is identified by a 64-bit key; draws walk a 64-bit block counter.
/// `split(i)` derives an independent child key from (key, i), so the draws of
/// any task depend only on the root seed and the task's index path, never on
/// scheduling. Satisfies UniformRandomBitGenerator.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed);

  RandomStream split(std::uint64_t index) const;

  result_type operator()() {
    const std::uint64_t lo = next32();
    return (std::uint64_t{next32()} << 32) | lo;
  }

  std::uint32_t next32() {
    if (avail_ == 4) refill();
    return buffer_[avail_++];
  }

  /// Uniform integer in {0, ..., n-1} from 32-bit draws, exact (Lemire rejection).
  std::uint32_t below32(std::uint32_t n) {
    std::uint64_t m = std::uint64_t{next32()} * n;
    auto low = static_cast<std::uint32_t>(m);
    if (low < n) {
      const std::uint32_t threshold = (0u - n) % n;
      while (low < threshold) {
        m = std::uint64_t{next32()} * n;
        low = static_cast<std::uint32_t>(m);
      }
    }
    return static_cast<std::uint32_t>(m >> 32);
  }

  /// Uniform double in (0, 1) on the grid (k + 1/2) 2^-32.
  double uniform32() { return (static_cast<double>(next32()) + 0.5) * 0x1.0p-32; }

  /// Uniform double in the open interval (0, 1) with 53 random bits.
  double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

  /// Uniform integer in {0, ..., n-1}, exact (Lemire rejection).
  std::uint64_t below(std::uint64_t n);

  std::uint64_t key() const { return (std::uint64_t{key_[1]} << 32) | key_[0]; }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

 private:
  RandomStream(std::uint32_t k0, std::uint32_t k1) : key_{k0, k1} {}
  void refill();

  std::array<std::uint32_t, 2> key_{};
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int avail_ = 4;
};

/// One Philox4x32-10 block. Exposed for the known-answer test.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

}  // namespace bcap
