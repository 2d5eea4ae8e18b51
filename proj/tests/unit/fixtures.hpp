#pragma once

#include "xpoint/crossbar.hpp"
#include "xpoint/memory_ops.hpp"

namespace fixtures {

inline const xpoint::TransistorModel kWordTransistor{50.0, 5e-3, 1e9, 56.0};

inline xpoint::CrossbarArray array(std::size_t m = 4, std::size_t n = 4) {
  return xpoint::CrossbarArray::balanced(m, n, xpoint::MtjParams{}, kWordTransistor);
}

inline double ic0() { return xpoint::critical_current(xpoint::MtjParams{}); }

inline double tau_parallel(const xpoint::OperatingPoint& op = {}) {
  return *xpoint::switching_delay(op.drive.parallel_ratio * ic0(), xpoint::MtjParams{}, op.dynamics);
}

inline std::vector<bool> bits_of(unsigned v, std::size_t n) {
  std::vector<bool> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = (v >> i) & 1U;
  return out;
}

}  // namespace fixtures
