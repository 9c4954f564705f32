#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>

#if defined(__SSE2__)
#include <emmintrin.h>
#endif

namespace colltime {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter apply(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
      }
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
             static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
             static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }
};

/// Stream identity inside the reproducibility contract: a master seed plus
/// two 32-bit stream coordinates (e.g. replicate index and walk index).
struct StreamId {
  std::uint64_t seed = 0;
  std::uint32_t major = 0;
  std::uint32_t minor = 0;
};

/// Sequential view of one Philox stream. Block b of stream (seed, major, minor)
/// is Philox(counter = {b_lo, b_hi, minor, major}, key = seed). Distinct streams
/// never share counters, so draws depend only on the stream id and position.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng() noexcept : CounterRng(StreamId{}) {}
  explicit CounterRng(StreamId id, std::uint64_t first_block = 0) noexcept
      : key_{static_cast<std::uint32_t>(id.seed), static_cast<std::uint32_t>(id.seed >> 32)},
        minor_(id.minor),
        major_(id.major),
        block_(first_block) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    if (lane_ == 0) refill();
    const result_type out = buffer_[2 - lane_];
    --lane_;
    return out;
  }

  /// One full 128-bit block as two 64-bit words; skips any buffered word.
  std::array<std::uint64_t, 2> next_block() noexcept {
    lane_ = 0;
    refill();
    lane_ = 0;
    return buffer_;
  }

  /// Writes the next 2 * blocks words of the stream, exactly as `blocks` pairs of
  /// operator() calls would (after any buffered word is dropped).
  void fill(std::uint64_t* out, std::size_t blocks) noexcept {
    lane_ = 0;
    std::size_t done = 0;
#if defined(__SSE2__)
    // two blocks per pass, one 32-bit counter word in the low half of each 64-bit lane
    const __m128i m0 = _mm_set1_epi64x(0xD2511F53u), m1 = _mm_set1_epi64x(0xCD9E8D57u);
    const __m128i lo = _mm_set1_epi64x(0xFFFFFFFFu);
    for (; done + 2 <= blocks; done += 2) {
      const std::uint64_t b0 = block_ + done, b1 = b0 + 1;
      __m128i c0 = _mm_set_epi64x(static_cast<std::uint32_t>(b1), static_cast<std::uint32_t>(b0));
      __m128i c1 = _mm_set_epi64x(b1 >> 32, b0 >> 32);
      __m128i c2 = _mm_set1_epi64x(minor_);
      __m128i c3 = _mm_set1_epi64x(major_);
      std::uint32_t k0 = key_[0], k1 = key_[1];
      for (int round = 0; round < 10; ++round) {
        if (round > 0) {
          k0 += 0x9E3779B9u;
          k1 += 0xBB67AE85u;
        }
        const __m128i p0 = _mm_mul_epu32(c0, m0);
        const __m128i p1 = _mm_mul_epu32(c2, m1);
        c0 = _mm_xor_si128(_mm_xor_si128(_mm_srli_epi64(p1, 32), c1), _mm_set1_epi64x(k0));
        c2 = _mm_xor_si128(_mm_xor_si128(_mm_srli_epi64(p0, 32), c3), _mm_set1_epi64x(k1));
        c1 = p1;
        c3 = p0;
      }
      const __m128i w0 = _mm_or_si128(_mm_slli_epi64(c1, 32), _mm_and_si128(c0, lo));
      const __m128i w1 = _mm_or_si128(_mm_slli_epi64(c3, 32), _mm_and_si128(c2, lo));
      _mm_storeu_si128(reinterpret_cast<__m128i*>(out + 2 * done), _mm_unpacklo_epi64(w0, w1));
      _mm_storeu_si128(reinterpret_cast<__m128i*>(out + 2 * done + 2), _mm_unpackhi_epi64(w0, w1));
    }
    block_ += done;
#endif
    for (; done < blocks; ++done) {
      refill();
      out[2 * done] = buffer_[0];
      out[2 * done + 1] = buffer_[1];
    }
    lane_ = 0;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  void refill() noexcept {
    const auto out = Philox4x32::apply(
        {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32), minor_, major_}, key_);
    ++block_;
    buffer_[0] = (std::uint64_t{out[1]} << 32) | out[0];
    buffer_[1] = (std::uint64_t{out[3]} << 32) | out[2];
    lane_ = 2;
  }

  Philox4x32::Key key_;
  std::uint32_t minor_;
  std::uint32_t major_;
  std::uint64_t block_;
  std::array<std::uint64_t, 2> buffer_{};
  int lane_ = 0;
};

}  // namespace colltime
