#pragma once

#include <cstddef>
#include <span>

namespace ksdagg {

/// Pairwise (cascade) summation: error grows like O(log n) rather than O(n).
/// Leaves of up to 128 values are summed in eight interleaved lanes, which the
/// compiler can vectorise without changing the order of operations.
/// The result depends only on the values and their order.
inline double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kBlock = 128;
  constexpr std::size_t kLanes = 8;
  if (values.size() <= kBlock) {
    double lane[kLanes] = {};
    const std::size_t full = values.size() / kLanes * kLanes;
    for (std::size_t i = 0; i < full; i += kLanes) {
      for (std::size_t l = 0; l < kLanes; ++l) lane[l] += values[i + l];
    }
    for (std::size_t i = full; i < values.size(); ++i) lane[i - full] += values[i];
    return ((lane[0] + lane[1]) + (lane[2] + lane[3])) + ((lane[4] + lane[5]) + (lane[6] + lane[7]));
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace ksdagg
