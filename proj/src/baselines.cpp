#include "ksdagg/baselines.hpp"

#include "ksdagg/errors.hpp"
#include "ksdagg/kernels.hpp"
#include "ksdagg/numeric.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <vector>

namespace ksdagg {

double power_proxy(const SteinGram& h, double regularizer) {
  const auto n = h.rows();
  if (n < 2 || h.cols() != n) throw ConfigError("power proxy needs a square Gram with N >= 2");
  std::vector<double> row_means(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    row_means[static_cast<std::size_t>(i)] =
        (h.row(i).sum() - h(i, i)) / static_cast<double>(n - 1);
  }
  const double dn = static_cast<double>(n);
  const double m1 = pairwise_sum(row_means) / dn;
  std::vector<double> squares(row_means.size());
  std::transform(row_means.begin(), row_means.end(), squares.begin(),
                 [](double r) { return r * r; });
  const double m2 = pairwise_sum(squares) / dn;
  const double variance = std::max(regularizer, 4.0 / dn * (m2 - m1 * m1));
  return ksd_ustat(h) / std::sqrt(variance);
}

std::size_t argmax_proxy(std::span<const double> bandwidths, std::span<const double> proxies) {
  if (bandwidths.empty() || bandwidths.size() != proxies.size()) {
    throw ConfigError("need one proxy value per bandwidth");
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < proxies.size(); ++k) {
    if (proxies[k] > proxies[best] ||
        (proxies[k] == proxies[best] && bandwidths[k] < bandwidths[best])) {
      best = k;
    }
  }
  return best;
}

KernelSpec select_bandwidth_by_proxy(const DataMatrix& x_select, const ScoreModel& model,
                                     const BandwidthCollection& collection, KernelFamily family,
                                     double imq_beta) {
  if (collection.empty()) throw ConfigError("bandwidth collection is empty");
  if (x_select.rows() < 2) throw ConfigError("bandwidth selection needs at least two samples");
  const Eigen::MatrixXd sq_dists = pairwise_sq_dists(x_select);
  const SteinPairs pairs(x_select, model.scores(x_select), sq_dists);

  std::vector<KernelSpec> specs;
  std::vector<double> proxies;
  for (double bandwidth : collection.bandwidths) {
    KernelSpec spec{family, bandwidth, imq_beta, 1.0};
    spec.validate();
    proxies.push_back(power_proxy(pairs.gram(spec)));
    specs.push_back(spec);
  }
  return specs[argmax_proxy(collection.bandwidths, proxies)];
}

TestReport median_test(const DataMatrix& x, const ScoreModel& model, double alpha,
                       std::size_t b1, BootstrapKind kind, KernelFamily family, double imq_beta,
                       const RngStream& rng, std::size_t workers) {
  const KernelSpec spec{family, median_bandwidth(x), imq_beta, 1.0};
  TestReport report = single_test(x, model, spec, alpha, b1, kind, rng, workers);
  report.method = "median";
  return report;
}

DataMatrix split_selection_rows(const DataMatrix& x) { return x.topRows(x.rows() / 2); }

TestReport split_test(const DataMatrix& x, const ScoreModel& model,
                      const BandwidthCollection& collection, KernelFamily family,
                      double imq_beta, double alpha, std::size_t b1, BootstrapKind kind,
                      const std::optional<DataMatrix>& extra, const RngStream& rng,
                      std::size_t workers) {
  const auto start = std::chrono::steady_clock::now();
  TestReport report;
  if (extra) {
    const KernelSpec spec = select_bandwidth_by_proxy(*extra, model, collection, family, imq_beta);
    report = single_test(x, model, spec, alpha, b1, kind, rng, workers);
    report.method = "split_extra";
  } else {
    if (x.rows() < 4) throw ConfigError("in-sample split test needs at least four samples");
    const Eigen::Index half = x.rows() / 2;
    const KernelSpec spec =
        select_bandwidth_by_proxy(x.topRows(half), model, collection, family, imq_beta);
    const DataMatrix test_rows = x.bottomRows(x.rows() - half);
    report = single_test(test_rows, model, spec, alpha, b1, kind, rng, workers);
    report.method = "split";
  }
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace ksdagg
