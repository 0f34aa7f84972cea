#pragma once

#include <array>
#include <cstdint>

namespace she {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key);

/// 52-bit uniform in the open interval (0,1) from two 32-bit words.
inline double uniform_open(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits =
      (static_cast<std::uint64_t>(hi >> 6) << 26) | static_cast<std::uint64_t>(lo >> 6);
  // 52 bits: the largest midpoint 1 - 2^-53 is still below 1.
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
}

/// Standard normal quantile, Wichura's AS241 (PPND16), ~1e-16 relative.
double normal_quantile(double p);

}  // namespace she
