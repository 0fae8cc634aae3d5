#pragma once

#include "ksdagg/types.hpp"

#include <cstddef>

namespace ksdagg {

/// Squared Euclidean distances between all rows of `x`.
///
/// Each entry is accumulated independently, so the result is bit-identical
/// for any `workers` value. Throws InvalidDataError on non-finite input.
Eigen::MatrixXd pairwise_sq_dists(const DataMatrix& x, std::size_t workers = 1);

/// Base kernel at squared distance `sq_dist`:
/// IMQ (1 + u/λ²)^(-β), Gaussian exp(-u/λ²), both times `spec.scale`.
double kernel_value(double sq_dist, const KernelSpec& spec);

/// Value and derivatives of a base kernel at a pair of points.
struct KernelDerivatives {
  double value = 0.0;
  Vector grad_x;            ///< ∇ₓ k(x, y)
  Vector grad_y;            ///< ∇ᵧ k(x, y)
  double mixed_trace = 0.0; ///< Σᵢ ∂²k / ∂xᵢ∂yᵢ
};

KernelDerivatives kernel_derivatives(const Vector& x, const Vector& y, const KernelSpec& spec);

/// Radial factors shared by every pair at squared distance `u` in dimension
/// `dim`: k = value, ∇ₓk = grad_coef·(x − y), ∇ᵧk = −grad_coef·(x − y),
/// Σᵢ∂ₓᵢ∂ᵧᵢk = mixed_trace.
struct RadialTerms {
  double value;
  double grad_coef;
  double mixed_trace;
};

RadialTerms radial_terms(double u, std::size_t dim, const KernelSpec& spec);

/// Median of the pairwise Euclidean distances ‖x_i − x_j‖, i < j. An even
/// number of pairs takes the mean of the two central order statistics.
double median_bandwidth(const DataMatrix& x);

/// Same, from a precomputed squared-distance matrix.
double median_bandwidth_from_sq_dists(const Eigen::MatrixXd& sq_dists);

/// {2^i · median : i = lo..hi} with uniform weights 1 / (hi − lo + 1).
BandwidthCollection power_of_two_collection(double median, int lo, int hi);

/// Parameter-free collection {d⁻¹ λ_max^((i−1)/(B−1)) : i = 1..B}, where
/// λ_max = max(max pairwise distance, 2) and d is the data dimension.
BandwidthCollection ksdagg_star_collection(const DataMatrix& x, int count = 10);

/// The same collection from the maximal inter-sample distance directly.
BandwidthCollection star_collection_from_extent(double max_distance, std::size_t dim,
                                                int count = 10);

}  // namespace ksdagg
