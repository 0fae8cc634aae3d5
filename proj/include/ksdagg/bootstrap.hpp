#pragma once

#include "ksdagg/rng.hpp"
#include "ksdagg/stein.hpp"
#include "ksdagg/types.hpp"

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace ksdagg {

enum class BootstrapKind { wild, parametric };

std::string_view to_string(BootstrapKind kind);
BootstrapKind parse_bootstrap_kind(std::string_view name);

/// Simulated null statistics for one kernel.
///
/// `sorted` holds the B₁ quantile replicates together with the observed
/// statistic, in ascending order (length B₁ + 1). `level` holds the B₂
/// replicates used to estimate the aggregated type I error.
class BootstrapBank {
 public:
  BootstrapBank(double observed, std::vector<double> quantile_stats,
                std::vector<double> level_stats = {});

  double observed() const noexcept { return observed_; }
  std::span<const double> sorted() const noexcept { return sorted_; }
  std::span<const double> level() const noexcept { return level_; }
  /// Number of simulated quantile replicates B₁.
  std::size_t b1() const noexcept { return sorted_.size() - 1; }

 private:
  double observed_;
  std::vector<double> sorted_;
  std::vector<double> level_;
};

struct QuantileResult {
  double value = 0.0;
  std::size_t index = 0;  ///< 1-based rank into the sorted bank
  bool clamped = false;   ///< the raw rank fell outside [1, B₁ + 1]
};

/// ⌈(B₁+1)(1−a)⌉-th smallest element of the sorted bank.
QuantileResult empirical_quantile(const BootstrapBank& bank, double level_complement);

/// 1-based quantile rank ⌈(B₁+1)(1−a)⌉ clamped to [1, B₁+1].
std::size_t quantile_rank(std::size_t b1, double level_complement, bool* clamped = nullptr);

/// (1/(N(N−1))) Σ_{i≠j} εᵢεⱼ H[i][j]. Throws ConfigError if sizes differ.
double wild_bootstrap_stat(const SteinGram& h, std::span<const double> eps);

/// Column b holds a Rademacher vector of length n drawn from `rng.child(b)`.
Eigen::MatrixXd rademacher_matrix(std::size_t n, std::size_t count, const RngStream& rng);

/// Wild bootstrap statistic for every column of `signs`, as one matrix product.
std::vector<double> wild_bootstrap_stats(const SteinGram& h, const Eigen::MatrixXd& signs);

/// KSD of N fresh model samples drawn from `rng`, under the given kernel.
double parametric_bootstrap_stat(const ScoreModel& model, const KernelSpec& spec, std::size_t n,
                                 const RngStream& rng);

/// Replicate b draws one sample set from `rng.child(b)` and evaluates every
/// kernel on it. Result is indexed [kernel][replicate].
std::vector<std::vector<double>> parametric_bootstrap_stats(const ScoreModel& model,
                                                            std::span<const KernelSpec> specs,
                                                            std::size_t n, std::size_t count,
                                                            const RngStream& rng,
                                                            std::size_t workers = 1);

}  // namespace ksdagg
