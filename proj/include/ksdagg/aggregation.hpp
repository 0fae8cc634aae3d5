#pragma once

#include "ksdagg/bootstrap.hpp"
#include "ksdagg/rng.hpp"
#include "ksdagg/stein.hpp"
#include "ksdagg/types.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ksdagg {

/// Outcome of one kernel inside a (single or aggregated) test.
struct KernelOutcome {
  KernelSpec spec;
  double weight = 1.0;
  double statistic = 0.0;
  double threshold = 0.0;
  std::size_t quantile_rank = 0;  ///< 1-based rank of the threshold in the sorted bank
  bool reject = false;
};

struct TestReport {
  std::string method;
  bool reject = false;
  /// Level correction. Kernel k is tested at level u_alpha · weight_k; single
  /// tests report u_alpha = alpha with weight 1.
  double u_alpha = 0.0;
  std::vector<KernelOutcome> kernels;
  BootstrapKind bootstrap = BootstrapKind::wild;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::size_t sample_count = 0;  ///< rows used to compute the test statistic
  double seconds = 0.0;
  bool u_alpha_at_boundary = false;
  bool quantile_clamped = false;
  /// The wild bootstrap is only asymptotically valid for Lipschitz Stein
  /// kernels; this is assumed, not checked.
  bool lipschitz_assumed = false;
};

struct AggConfig {
  double alpha = 0.05;
  std::size_t b1 = 500;
  std::size_t b2 = 500;
  std::size_t b3 = 50;
  BootstrapKind bootstrap = BootstrapKind::parametric;
  BandwidthCollection collection;
  KernelFamily family = KernelFamily::imq;
  double imq_beta = 0.5;
  std::size_t workers = 1;
  /// Per-kernel multipliers applied to the base kernels (empty means all 1).
  std::vector<double> kernel_scales;

  void validate() const;
  std::vector<KernelSpec> kernel_specs() const;
};

/// Observed statistics and simulated null banks for every kernel of one
/// dataset. Replicate b of every kernel comes from the same Rademacher vector
/// (wild) or the same fresh model sample (parametric); quantile and level
/// replicates use independent streams `rng.child(1)` and `rng.child(2)`.
std::vector<BootstrapBank> build_banks(const DataMatrix& x, const ScoreModel& model,
                                       std::span<const KernelSpec> specs, std::size_t b1,
                                       std::size_t b2, BootstrapKind kind, const RngStream& rng,
                                       std::size_t workers = 1);

/// Monte Carlo type I error of the aggregated test with correction u:
/// (1/B₂) Σ_b 1{max_k (K̃_k^b − K̄_k^{•⌈(B₁+1)(1−u w_k)⌉}) > 0}.
double estimated_level(std::span<const BootstrapBank> banks, std::span<const double> weights,
                       double u);

struct UAlphaResult {
  double u_alpha = 0.0;
  double search_upper = 0.0;  ///< min_k 1/w_k
  bool at_lower_boundary = false;  ///< no tested u satisfied the level
  bool at_upper_boundary = false;  ///< every tested u satisfied the level
};

/// Bisection for sup{u ∈ (0, min_k 1/w_k) : P̂_u ≤ α}; returns the lower end
/// after `b3` halvings.
UAlphaResult compute_u_alpha(std::span<const BootstrapBank> banks,
                             std::span<const double> weights, double alpha, std::size_t b3);

/// Aggregated decision from prebuilt banks: computes u_α and rejects iff some
/// kernel's statistic strictly exceeds its corrected threshold.
TestReport aggregate(std::span<const BootstrapBank> banks, std::span<const KernelSpec> specs,
                     std::span<const double> weights, double alpha, std::size_t b3);

/// Single-kernel decision from a prebuilt bank at level `alpha`.
TestReport single_decision(const BootstrapBank& bank, const KernelSpec& spec, double alpha);

/// KSD test with one kernel: rejects iff the statistic strictly exceeds the
/// ⌈(B₁+1)(1−α)⌉-th order statistic of the bootstrap bank.
TestReport single_test(const DataMatrix& x, const ScoreModel& model, const KernelSpec& spec,
                       double alpha, std::size_t b1, BootstrapKind kind, const RngStream& rng,
                       std::size_t workers = 1);

/// Aggregated KSD test over the configured bandwidth collection.
TestReport ksdagg_test(const DataMatrix& x, const ScoreModel& model, const AggConfig& config,
                       const RngStream& rng);

}  // namespace ksdagg
