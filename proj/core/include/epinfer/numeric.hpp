// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef EPINFER_NUMERIC_HPP
#define EPINFER_NUMERIC_HPP

#include <cmath>
#include <limits>
#include <span>

namespace epinfer {

// log(sum_i exp(x_i)) with the usual max shift. Summation runs in index
// order so the result is independent of how callers partition work. Returns
// -infinity when every entry is -infinity.
inline double log_sum_exp(std::span<const double> x) noexcept {
  double hi = -std::numeric_limits<double>::infinity();
  for (const double v : x) hi = std::fmax(hi, v);
  if (!std::isfinite(hi)) return hi;
  double sum = 0.0;
  for (const double v : x) sum += std::exp(v - hi);
  return hi + std::log(sum);
}

}  // namespace epinfer

#endif  // EPINFER_NUMERIC_HPP
