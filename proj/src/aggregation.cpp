#include "ksdagg/aggregation.hpp"

#include "ksdagg/errors.hpp"
#include "ksdagg/kernels.hpp"
#include "ksdagg/parallel.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <limits>

namespace ksdagg {

namespace {

double elapsed_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void check_banks(std::span<const BootstrapBank> banks, std::span<const double> weights) {
  if (banks.empty()) throw ConfigError("aggregation needs at least one kernel");
  if (banks.size() != weights.size()) throw ConfigError("one weight per kernel is required");
  for (const auto& bank : banks) {
    if (bank.b1() != banks.front().b1() || bank.level().size() != banks.front().level().size()) {
      throw ConfigError("all kernels must share B1 and B2");
    }
  }
}

}  // namespace

void AggConfig::validate() const {
  if (!(alpha > 0.0 && alpha < std::exp(-1.0))) throw ConfigError("alpha must lie in (0, 1/e)");
  if (b1 < 1 || b2 < 1 || b3 < 1) throw ConfigError("B1, B2 and B3 must be positive");
  collection.validate();
  if (!kernel_scales.empty() && kernel_scales.size() != collection.size()) {
    throw ConfigError("kernel_scales needs one entry per bandwidth");
  }
  for (const auto& spec : kernel_specs()) spec.validate();
}

std::vector<KernelSpec> AggConfig::kernel_specs() const {
  std::vector<KernelSpec> specs;
  specs.reserve(collection.size());
  for (std::size_t k = 0; k < collection.size(); ++k) {
    KernelSpec spec;
    spec.family = family;
    spec.bandwidth = collection.bandwidths[k];
    spec.imq_beta = imq_beta;
    spec.scale = kernel_scales.empty() ? 1.0 : kernel_scales[k];
    specs.push_back(spec);
  }
  return specs;
}

std::vector<BootstrapBank> build_banks(const DataMatrix& x, const ScoreModel& model,
                                       std::span<const KernelSpec> specs, std::size_t b1,
                                       std::size_t b2, BootstrapKind kind, const RngStream& rng,
                                       std::size_t workers) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (n < 2) throw ConfigError("a KSD test needs at least two samples");
  if (specs.empty()) throw ConfigError("no kernels to test");
  for (const auto& spec : specs) spec.validate();

  const Eigen::MatrixXd sq_dists = pairwise_sq_dists(x);
  const SteinPairs pairs(x, model.scores(x), sq_dists);

  std::vector<std::vector<double>> quantile_stats(specs.size());
  std::vector<std::vector<double>> level_stats(specs.size());
  if (kind == BootstrapKind::wild) {
    const Eigen::MatrixXd signs_quantile = rademacher_matrix(n, b1, rng.child(1));
    const Eigen::MatrixXd signs_level = rademacher_matrix(n, b2, rng.child(2));
    parallel_for(specs.size(), workers, [&](std::size_t k) {
      const SteinGram h = pairs.gram(specs[k]);
      quantile_stats[k] = wild_bootstrap_stats(h, signs_quantile);
      level_stats[k] = wild_bootstrap_stats(h, signs_level);
    });
  } else {
    quantile_stats = parametric_bootstrap_stats(model, specs, n, b1, rng.child(1), workers);
    level_stats = parametric_bootstrap_stats(model, specs, n, b2, rng.child(2), workers);
  }

  const auto observed = pairs.ustats(specs);
  std::vector<BootstrapBank> banks;
  banks.reserve(specs.size());
  for (std::size_t k = 0; k < specs.size(); ++k) {
    banks.emplace_back(observed[k], std::move(quantile_stats[k]),
                       std::move(level_stats[k]));
  }
  return banks;
}

double estimated_level(std::span<const BootstrapBank> banks, std::span<const double> weights,
                       double u) {
  check_banks(banks, weights);
  const std::size_t b2 = banks.front().level().size();
  if (b2 == 0) throw ConfigError("level estimation needs B2 > 0");
  std::vector<double> thresholds(banks.size());
  for (std::size_t k = 0; k < banks.size(); ++k) {
    thresholds[k] = banks[k].sorted()[quantile_rank(banks[k].b1(), u * weights[k]) - 1];
  }
  std::size_t exceed = 0;
  for (std::size_t b = 0; b < b2; ++b) {
    for (std::size_t k = 0; k < banks.size(); ++k) {
      if (banks[k].level()[b] > thresholds[k]) {
        ++exceed;
        break;
      }
    }
  }
  return static_cast<double>(exceed) / static_cast<double>(b2);
}

UAlphaResult compute_u_alpha(std::span<const BootstrapBank> banks,
                             std::span<const double> weights, double alpha, std::size_t b3) {
  check_banks(banks, weights);
  if (b3 < 1) throw ConfigError("B3 must be positive");
  double u_max = std::numeric_limits<double>::infinity();
  for (double w : weights) {
    if (!(w > 0.0)) throw ConfigError("weights must be positive");
    u_max = std::min(u_max, 1.0 / w);
  }
  double lo = 0.0;
  double hi = u_max;
  for (std::size_t t = 0; t < b3; ++t) {
    const double u = 0.5 * (lo + hi);
    if (estimated_level(banks, weights, u) <= alpha) {
      lo = u;
    } else {
      hi = u;
    }
    assert(lo == 0.0 || estimated_level(banks, weights, lo) <= alpha);
  }
  UAlphaResult out;
  out.u_alpha = lo;
  out.search_upper = u_max;
  out.at_lower_boundary = lo == 0.0;
  out.at_upper_boundary = hi == u_max;
  return out;
}

TestReport aggregate(std::span<const BootstrapBank> banks, std::span<const KernelSpec> specs,
                     std::span<const double> weights, double alpha, std::size_t b3) {
  if (specs.size() != banks.size()) throw ConfigError("one kernel spec per bank is required");
  const auto u = compute_u_alpha(banks, weights, alpha, b3);
  TestReport report;
  report.method = "ksdagg";
  report.u_alpha = u.u_alpha;
  report.u_alpha_at_boundary = u.at_lower_boundary || u.at_upper_boundary;
  for (std::size_t k = 0; k < banks.size(); ++k) {
    KernelOutcome outcome;
    outcome.spec = specs[k];
    outcome.weight = weights[k];
    outcome.statistic = banks[k].observed();
    outcome.quantile_rank = quantile_rank(banks[k].b1(), u.u_alpha * weights[k]);
    outcome.threshold = banks[k].sorted()[outcome.quantile_rank - 1];
    outcome.reject = outcome.statistic > outcome.threshold;
    report.reject = report.reject || outcome.reject;
    report.kernels.push_back(outcome);
  }
  return report;
}

TestReport single_decision(const BootstrapBank& bank, const KernelSpec& spec, double alpha) {
  const auto quantile = empirical_quantile(bank, alpha);
  TestReport report;
  report.method = "single";
  report.u_alpha = alpha;
  KernelOutcome outcome;
  outcome.spec = spec;
  outcome.statistic = bank.observed();
  outcome.threshold = quantile.value;
  outcome.quantile_rank = quantile.index;
  outcome.reject = outcome.statistic > outcome.threshold;
  report.kernels.push_back(outcome);
  report.reject = outcome.reject;
  report.quantile_clamped = quantile.clamped;
  return report;
}

TestReport single_test(const DataMatrix& x, const ScoreModel& model, const KernelSpec& spec,
                       double alpha, std::size_t b1, BootstrapKind kind, const RngStream& rng,
                       std::size_t workers) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (b1 < 1) throw ConfigError("B1 must be positive");
  const auto start = std::chrono::steady_clock::now();
  const KernelSpec specs[] = {spec};
  const auto banks = build_banks(x, model, specs, b1, 0, kind, rng, workers);
  TestReport report = single_decision(banks[0], spec, alpha);
  report.bootstrap = kind;
  report.seed = rng.seed();
  report.stream = rng.stream();
  report.sample_count = static_cast<std::size_t>(x.rows());
  report.lipschitz_assumed = kind == BootstrapKind::wild;
  report.seconds = elapsed_since(start);
  return report;
}

TestReport ksdagg_test(const DataMatrix& x, const ScoreModel& model, const AggConfig& config,
                       const RngStream& rng) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto specs = config.kernel_specs();
  const auto banks = build_banks(x, model, specs, config.b1, config.b2, config.bootstrap, rng,
                                 config.workers);
  TestReport report = aggregate(banks, specs, config.collection.weights, config.alpha, config.b3);
  report.bootstrap = config.bootstrap;
  report.seed = rng.seed();
  report.stream = rng.stream();
  report.sample_count = static_cast<std::size_t>(x.rows());
  report.lipschitz_assumed = config.bootstrap == BootstrapKind::wild;
  report.seconds = elapsed_since(start);
  return report;
}

}  // namespace ksdagg
