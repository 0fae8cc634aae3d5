#pragma once

#include "ksdagg/rng.hpp"
#include "ksdagg/types.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace ksdagg {

/// A model density known through its score ∇log p, optionally sampleable.
///
/// Both callables must be safe to invoke concurrently.
class ScoreModel {
 public:
  /// Row-wise score: maps an N x d sample matrix to the N x d matrix of scores.
  using ScoreFn = std::function<DataMatrix(const DataMatrix&)>;
  using SamplerFn = std::function<DataMatrix(std::size_t, const RngStream&)>;

  ScoreModel(std::size_t dim, ScoreFn score, SamplerFn sampler = {});

  std::size_t dim() const noexcept { return dim_; }

  /// Scores of every row of `x`. Throws ModelEvaluationError naming the first
  /// row whose score is not finite.
  DataMatrix scores(const DataMatrix& x) const;
  Vector score(const Vector& x) const;

  bool has_sampler() const noexcept { return static_cast<bool>(sampler_); }

  /// Draws `n` samples from the model. Throws CapabilityError if the model
  /// cannot be sampled.
  DataMatrix sample(std::size_t n, const RngStream& rng) const;

 private:
  std::size_t dim_;
  ScoreFn score_;
  SamplerFn sampler_;
};

/// Stein kernel h(x, y) = sxᵀsy·k + syᵀ∇ₓk + sxᵀ∇ᵧk + Σᵢ∂ₓᵢ∂ᵧᵢk, where sx and sy
/// are the model scores at x and y.
double stein_kernel_entry(const Vector& x, const Vector& y, const Vector& sx, const Vector& sy,
                          const KernelSpec& spec);

/// Pair quantities of one dataset that every Stein kernel is built from:
/// squared distance, score inner product sᵢᵀsⱼ and (sⱼ − sᵢ)ᵀ(xᵢ − xⱼ).
///
/// Pairs are streamed in fixed-size blocks over the strict upper triangle in
/// row-major order, so evaluating a kernel needs no N²-sized temporaries.
class SteinPairs {
 public:
  SteinPairs(const DataMatrix& x, const DataMatrix& scores);
  /// Takes squared distances from a precomputed matrix instead of recomputing.
  SteinPairs(const DataMatrix& x, const DataMatrix& scores, const Eigen::MatrixXd& sq_dists);

  std::size_t sample_count() const noexcept { return static_cast<std::size_t>(x_.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(x_.cols()); }

  /// Full symmetric Gram matrix for `spec`.
  SteinGram gram(const KernelSpec& spec) const;

  /// KSD U-statistic for `spec`, without materialising the Gram matrix.
  double ustat(const KernelSpec& spec) const;
  /// U-statistics for several kernels in one pass over the pairs.
  std::vector<double> ustats(std::span<const KernelSpec> specs) const;

  /// h over the strict upper triangle, row-major.
  Eigen::ArrayXd upper_values(const KernelSpec& spec) const;
  /// h(x_i, x_i) for every i.
  Eigen::ArrayXd diagonal_values(const KernelSpec& spec) const;

 private:
  struct Block;
  template <typename Sink>
  void for_each_block(Sink&& sink) const;

  DataMatrix x_;
  DataMatrix scores_;
  const Eigen::MatrixXd* sq_dists_ = nullptr;
};

/// Gram matrix H[i][j] = h(x_i, x_j). Scores are evaluated once per point.
SteinGram stein_gram(const DataMatrix& x, const ScoreModel& model, const KernelSpec& spec,
                     const Eigen::MatrixXd& sq_dists);

/// (1 / (N(N−1))) Σ_{i≠j} H[i][j]. Off-diagonal entries are accumulated by
/// pairwise summation in a fixed order, so the result is deterministic.
double ksd_ustat(const SteinGram& h);

}  // namespace ksdagg
