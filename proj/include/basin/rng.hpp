#pragma once

// Counter-based random numbers (Philox4x32-10). Every (seed, sample index,
// attempt) triple addresses its own substream, so the k-th draw is a pure
// function of those values: independent of how many samples are requested, in
// what order, or across how many threads.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace basin {

namespace detail {

inline constexpr std::uint32_t kPhiloxW32A = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW32B = 0xBB67AE85u;
inline constexpr std::uint32_t kPhiloxM4x32A = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM4x32B = 0xCD9E8D57u;

inline std::uint32_t mulhilo(std::uint32_t a, std::uint32_t b,
                             std::uint32_t* hi) {
  std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  *hi = static_cast<std::uint32_t>(p >> 32);
  return static_cast<std::uint32_t>(p);
}

/// One 10-round Philox4x32 block.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::uint32_t key0,
                                               std::uint32_t key1) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, hi1;
    std::uint32_t lo0 = mulhilo(kPhiloxM4x32A, ctr[0], &hi0);
    std::uint32_t lo1 = mulhilo(kPhiloxM4x32B, ctr[2], &hi1);
    ctr = {hi1 ^ ctr[1] ^ key0, lo1, hi0 ^ ctr[3] ^ key1, lo0};
    key0 += kPhiloxW32A;
    key1 += kPhiloxW32B;
  }
  return ctr;
}

inline double u64_to_unit_double(std::uint64_t x) {
  // 53 significant bits mapped to (0, 1]; never 0 so log() below is safe.
  return static_cast<double>((x >> 11) + 1) * 0x1.0p-53;
}

}  // namespace detail

/// Deterministic source of N(0,1) variates for one (seed, index, attempt)
/// substream. Consumes Philox blocks lazily; each block yields a Box-Muller
/// pair.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t sample_index,
               std::uint32_t attempt)
      : key0_(static_cast<std::uint32_t>(seed)),
        key1_(static_cast<std::uint32_t>(seed >> 32)),
        index_lo_(static_cast<std::uint32_t>(sample_index)),
        index_hi_(static_cast<std::uint32_t>(sample_index >> 32)),
        attempt_(attempt) {}

  double next() {
    if (!have_spare_) {
      auto words = detail::philox4x32({block_++, attempt_, index_lo_, index_hi_},
                                      key0_, key1_);
      std::uint64_t u0 = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
      std::uint64_t u1 = (static_cast<std::uint64_t>(words[2]) << 32) | words[3];
      double r = std::sqrt(-2.0 * std::log(detail::u64_to_unit_double(u0)));
      double phi = 2.0 * std::numbers::pi * detail::u64_to_unit_double(u1);
      spare_ = r * std::sin(phi);
      have_spare_ = true;
      return r * std::cos(phi);
    }
    have_spare_ = false;
    return spare_;
  }

 private:
  std::uint32_t key0_, key1_, index_lo_, index_hi_, attempt_;
  std::uint32_t block_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace basin
