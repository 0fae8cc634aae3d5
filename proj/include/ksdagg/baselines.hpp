#pragma once

#include "ksdagg/aggregation.hpp"
#include "ksdagg/bootstrap.hpp"
#include "ksdagg/rng.hpp"
#include "ksdagg/stein.hpp"
#include "ksdagg/types.hpp"

#include <cstddef>
#include <optional>
#include <span>

namespace ksdagg {

inline constexpr double kPowerProxyRegularizer = 1e-8;

/// Asymptotic power proxy KSD / σ̂, where σ̂² = max(γ, (4/N)(m₂ − m₁²)) is the
/// variance of the off-diagonal row means rᵵ of H, scaled as the first-order
/// variance of the U-statistic under the alternative.
double power_proxy(const SteinGram& h, double regularizer = kPowerProxyRegularizer);

/// Index of the largest proxy; ties go to the smallest bandwidth.
std::size_t argmax_proxy(std::span<const double> bandwidths, std::span<const double> proxies);

/// Kernel of the collection maximising the power proxy on `x_select`. Ties go
/// to the smallest bandwidth.
KernelSpec select_bandwidth_by_proxy(const DataMatrix& x_select, const ScoreModel& model,
                                     const BandwidthCollection& collection, KernelFamily family,
                                     double imq_beta = 0.5);

/// Single KSD test with the median-heuristic bandwidth of `x`.
TestReport median_test(const DataMatrix& x, const ScoreModel& model, double alpha,
                       std::size_t b1, BootstrapKind kind, KernelFamily family, double imq_beta,
                       const RngStream& rng, std::size_t workers = 1);

/// Bandwidth selection by power proxy followed by a single test.
///
/// Without `extra`, the first ⌊N/2⌋ rows select the bandwidth and the
/// remaining rows are tested. With `extra`, selection runs on `extra` and
/// all rows of `x` are tested.
TestReport split_test(const DataMatrix& x, const ScoreModel& model,
                      const BandwidthCollection& collection, KernelFamily family,
                      double imq_beta, double alpha, std::size_t b1, BootstrapKind kind,
                      const std::optional<DataMatrix>& extra, const RngStream& rng,
                      std::size_t workers = 1);

/// Rows used for bandwidth selection by the in-sample split test.
DataMatrix split_selection_rows(const DataMatrix& x);

}  // namespace ksdagg
