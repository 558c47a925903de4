#pragma once

#include <cstddef>
#include <cstdint>

namespace agecohort {

// 100 * part / whole rounded half-up to two decimals, computed in integers so
// printed shares never depend on binary floating-point representation.
inline double percent_2dp(std::uint64_t part, std::uint64_t whole) {
  if (whole == 0) return 0.0;
  const std::uint64_t hundredths = (20000 * part + whole) / (2 * whole);
  return static_cast<double>(hundredths) / 100.0;
}

}  // namespace agecohort
