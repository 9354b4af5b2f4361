#pragma once

#include <cstddef>
#include <span>

namespace monolab {

/// Pairwise (cascade) summation: O(eps log n) error growth and a fixed
/// association order, so results depend only on the input sequence.
inline double pairwise_sum(std::span<const double> x) {
  constexpr std::size_t kLeaf = 16;
  if (x.size() <= kLeaf) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t half = x.size() / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

}  // namespace monolab
