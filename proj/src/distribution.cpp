#include "fcs/distribution.hpp"

#include <cmath>
#include <cstddef>

namespace fcs {

void CountingDistribution::trim(double threshold) {
  if (p.empty()) return;
  std::size_t lo = 0;
  std::size_t hi = p.size();
  const std::size_t zero_idx = n_min <= 0 ? static_cast<std::size_t>(-n_min) : 0;
  while (lo + 1 < hi && std::abs(p[lo]) <= threshold && lo < zero_idx) ++lo;
  while (hi > lo + 1 && std::abs(p[hi - 1]) <= threshold &&
         static_cast<int>(hi - 1) + n_min > 0) {
    --hi;
  }
  if (lo == 0 && hi == p.size()) return;
  p = std::vector<double>(p.begin() + static_cast<std::ptrdiff_t>(lo),
                          p.begin() + static_cast<std::ptrdiff_t>(hi));
  n_min += static_cast<int>(lo);
}

}  // namespace fcs
