#include "ksdagg/kernels.hpp"

#include "ksdagg/errors.hpp"
#include "ksdagg/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace ksdagg {

std::string_view to_string(KernelFamily family) {
  return family == KernelFamily::imq ? "imq" : "gaussian";
}

KernelFamily parse_kernel_family(std::string_view name) {
  if (name == "imq") return KernelFamily::imq;
  if (name == "gaussian") return KernelFamily::gaussian;
  throw ConfigError("unknown kernel family '" + std::string(name) + "'");
}

void KernelSpec::validate() const {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw ConfigError("kernel bandwidth must be positive and finite");
  }
  if (family == KernelFamily::imq && !(imq_beta > 0.0 && imq_beta < 1.0)) {
    throw ConfigError("IMQ exponent must lie in (0, 1)");
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ConfigError("kernel scale must be positive and finite");
  }
}

void BandwidthCollection::validate() const {
  if (bandwidths.empty()) throw ConfigError("bandwidth collection is empty");
  if (bandwidths.size() != weights.size()) {
    throw ConfigError("bandwidth collection needs one weight per bandwidth");
  }
  for (double b : bandwidths) {
    if (!(b > 0.0) || !std::isfinite(b)) throw ConfigError("bandwidths must be positive");
  }
  for (double w : weights) {
    if (!(w > 0.0)) throw ConfigError("collection weights must be positive");
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (total > 1.0 + 1e-12) throw ConfigError("collection weights must sum to at most 1");
}

Eigen::MatrixXd pairwise_sq_dists(const DataMatrix& x, std::size_t workers) {
  if (!x.allFinite()) throw InvalidDataError("data contains non-finite entries");
  const auto n = static_cast<std::size_t>(x.rows());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(x.rows(), x.rows());
  parallel_for(n, workers, [&](std::size_t i) {
    const auto row_i = x.row(static_cast<Eigen::Index>(i));
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d2 = (row_i - x.row(static_cast<Eigen::Index>(j))).squaredNorm();
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d2;
      out(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = d2;
    }
  });
  return out;
}

RadialTerms radial_terms(double u, std::size_t dim, const KernelSpec& spec) {
  const double inv_l2 = 1.0 / (spec.bandwidth * spec.bandwidth);
  const double d = static_cast<double>(dim);
  if (spec.family == KernelFamily::gaussian) {
    const double k = spec.scale * std::exp(-u * inv_l2);
    return {k, -2.0 * inv_l2 * k, (2.0 * d * inv_l2 - 4.0 * u * inv_l2 * inv_l2) * k};
  }
  const double beta = spec.imq_beta;
  const double base = 1.0 + u * inv_l2;
  const double k = spec.scale * std::pow(base, -beta);
  const double k1 = k / base;   // base^(-β-1)
  const double k2 = k1 / base;  // base^(-β-2)
  return {k, -2.0 * beta * inv_l2 * k1,
          2.0 * beta * d * inv_l2 * k1 - 4.0 * beta * (beta + 1.0) * inv_l2 * inv_l2 * u * k2};
}

double kernel_value(double sq_dist, const KernelSpec& spec) {
  const double inv_l2 = 1.0 / (spec.bandwidth * spec.bandwidth);
  if (spec.family == KernelFamily::gaussian) return spec.scale * std::exp(-sq_dist * inv_l2);
  return spec.scale * std::pow(1.0 + sq_dist * inv_l2, -spec.imq_beta);
}

KernelDerivatives kernel_derivatives(const Vector& x, const Vector& y, const KernelSpec& spec) {
  const Vector diff = x - y;
  const auto terms = radial_terms(diff.squaredNorm(), static_cast<std::size_t>(x.size()), spec);
  KernelDerivatives out;
  out.value = terms.value;
  out.grad_x = terms.grad_coef * diff;
  out.grad_y = -terms.grad_coef * diff;
  out.mixed_trace = terms.mixed_trace;
  return out;
}

double median_bandwidth_from_sq_dists(const Eigen::MatrixXd& sq_dists) {
  const auto n = sq_dists.rows();
  if (n < 2) throw ConfigError("median bandwidth needs at least two samples");
  std::vector<double> upper;
  upper.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) upper.push_back(sq_dists(i, j));
  }
  // sqrt is monotone, so selecting on squared distances picks the same pairs
  const std::size_t mid = upper.size() / 2;
  std::nth_element(upper.begin(), upper.begin() + static_cast<std::ptrdiff_t>(mid), upper.end());
  double median = std::sqrt(upper[mid]);
  if (upper.size() % 2 == 0) {
    const double lower =
        *std::max_element(upper.begin(), upper.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (median + std::sqrt(lower));
  }
  if (!(median > 0.0)) {
    throw DegenerateDataError("median pairwise distance is zero; bandwidth undefined");
  }
  return median;
}

double median_bandwidth(const DataMatrix& x) {
  if (x.rows() < 2) throw ConfigError("median bandwidth needs at least two samples");
  return median_bandwidth_from_sq_dists(pairwise_sq_dists(x));
}

BandwidthCollection power_of_two_collection(double median, int lo, int hi) {
  if (lo >= hi) throw ConfigError("power-of-two collection needs lo < hi");
  if (!(median > 0.0) || !std::isfinite(median)) {
    throw ConfigError("reference bandwidth must be positive and finite");
  }
  BandwidthCollection out;
  const auto count = static_cast<std::size_t>(hi - lo + 1);
  out.bandwidths.reserve(count);
  for (int i = lo; i <= hi; ++i) out.bandwidths.push_back(std::ldexp(median, i));
  out.weights.assign(count, 1.0 / static_cast<double>(count));
  return out;
}

BandwidthCollection star_collection_from_extent(double max_distance, std::size_t dim, int count) {
  if (count < 2) throw ConfigError("star collection needs at least two bandwidths");
  if (dim == 0) throw ConfigError("data dimension must be positive");
  const double lambda_max = std::max(max_distance, 2.0);
  const double inv_dim = 1.0 / static_cast<double>(dim);
  BandwidthCollection out;
  out.bandwidths.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double exponent = static_cast<double>(i) / static_cast<double>(count - 1);
    out.bandwidths.push_back(inv_dim * std::pow(lambda_max, exponent));
  }
  out.weights.assign(static_cast<std::size_t>(count), 1.0 / static_cast<double>(count));
  return out;
}

BandwidthCollection ksdagg_star_collection(const DataMatrix& x, int count) {
  if (x.rows() < 2) throw ConfigError("star collection needs at least two samples");
  const double max_sq = pairwise_sq_dists(x).maxCoeff();
  return star_collection_from_extent(std::sqrt(max_sq), static_cast<std::size_t>(x.cols()), count);
}

}  // namespace ksdagg
