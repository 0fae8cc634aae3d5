#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string_view>
#include <vector>

namespace ksdagg {

using Vector = Eigen::VectorXd;

/// Samples stored one per row (N x d).
using DataMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// N x N matrix of Stein kernel values h(x_i, x_j).
using SteinGram = Eigen::MatrixXd;

enum class KernelFamily { imq, gaussian };

std::string_view to_string(KernelFamily family);
KernelFamily parse_kernel_family(std::string_view name);

/// Base kernel with its bandwidth.
///
/// `scale` multiplies the kernel (and therefore every Stein kernel value). It
/// is 1 in normal use; the tests use it to check scale invariance.
struct KernelSpec {
  KernelFamily family = KernelFamily::imq;
  double bandwidth = 1.0;
  double imq_beta = 0.5;
  double scale = 1.0;

  void validate() const;
};

/// Ordered bandwidths with positive weights summing to at most one.
struct BandwidthCollection {
  std::vector<double> bandwidths;
  std::vector<double> weights;

  std::size_t size() const { return bandwidths.size(); }
  bool empty() const { return bandwidths.empty(); }
  void validate() const;
};

}  // namespace ksdagg
