#include "ksdagg/bootstrap.hpp"

#include "ksdagg/errors.hpp"
#include "ksdagg/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <string>

namespace ksdagg {

std::string_view to_string(BootstrapKind kind) {
  return kind == BootstrapKind::wild ? "wild" : "parametric";
}

BootstrapKind parse_bootstrap_kind(std::string_view name) {
  if (name == "wild") return BootstrapKind::wild;
  if (name == "parametric") return BootstrapKind::parametric;
  throw ConfigError("unknown bootstrap kind '" + std::string(name) + "'");
}

BootstrapBank::BootstrapBank(double observed, std::vector<double> quantile_stats,
                             std::vector<double> level_stats)
    : observed_(observed), sorted_(std::move(quantile_stats)), level_(std::move(level_stats)) {
  sorted_.push_back(observed);
  std::stable_sort(sorted_.begin(), sorted_.end());
}

std::size_t quantile_rank(std::size_t b1, double level_complement, bool* clamped) {
  const double total = static_cast<double>(b1 + 1);
  const double raw = std::ceil(total * (1.0 - level_complement));
  const double bounded = std::clamp(raw, 1.0, total);
  if (clamped != nullptr) *clamped = bounded != raw;
  return static_cast<std::size_t>(bounded);
}

QuantileResult empirical_quantile(const BootstrapBank& bank, double level_complement) {
  if (!(level_complement > 0.0 && level_complement < 1.0)) {
    throw ConfigError("quantile level must lie in (0, 1)");
  }
  QuantileResult out;
  out.index = quantile_rank(bank.b1(), level_complement, &out.clamped);
  if (out.clamped) {
    std::clog << "warning: quantile rank clamped to " << out.index << " for level "
              << level_complement << '\n';
  }
  out.value = bank.sorted()[out.index - 1];
  return out;
}

double wild_bootstrap_stat(const SteinGram& h, std::span<const double> eps) {
  const auto n = h.rows();
  if (static_cast<Eigen::Index>(eps.size()) != n) {
    throw ConfigError("sign vector length must equal the sample count");
  }
  if (n < 2) throw ConfigError("wild bootstrap needs at least two samples");
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) row += h(i, j) * eps[static_cast<std::size_t>(j)];
    }
    total += eps[static_cast<std::size_t>(i)] * row;
  }
  return total / (static_cast<double>(n) * static_cast<double>(n - 1));
}

Eigen::MatrixXd rademacher_matrix(std::size_t n, std::size_t count, const RngStream& rng) {
  Eigen::MatrixXd signs(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(count));
  for (std::size_t b = 0; b < count; ++b) {
    auto engine = rng.child(b).engine();
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i % 64 == 0) bits = engine();
      signs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b)) =
          (bits & 1U) != 0 ? 1.0 : -1.0;
      bits >>= 1;
    }
  }
  return signs;
}

std::vector<double> wild_bootstrap_stats(const SteinGram& h, const Eigen::MatrixXd& signs) {
  const auto n = h.rows();
  if (signs.rows() != n) throw ConfigError("sign vectors must have one entry per sample");
  if (n < 2) throw ConfigError("wild bootstrap needs at least two samples");
  SteinGram off = h;
  off.diagonal().setZero();
  const Eigen::MatrixXd weighted = off * signs;
  const double norm = static_cast<double>(n) * static_cast<double>(n - 1);
  std::vector<double> out(static_cast<std::size_t>(signs.cols()));
  for (Eigen::Index b = 0; b < signs.cols(); ++b) {
    out[static_cast<std::size_t>(b)] = signs.col(b).dot(weighted.col(b)) / norm;
  }
  return out;
}

namespace {

std::vector<double> stats_on_fresh_sample(const ScoreModel& model,
                                          std::span<const KernelSpec> specs, std::size_t n,
                                          const RngStream& rng) {
  const DataMatrix sample = model.sample(n, rng);
  if (static_cast<std::size_t>(sample.rows()) != n) {
    throw ModelEvaluationError("model sampler returned the wrong number of rows", 0);
  }
  const SteinPairs pairs(sample, model.scores(sample));
  return pairs.ustats(specs);
}

}  // namespace

double parametric_bootstrap_stat(const ScoreModel& model, const KernelSpec& spec, std::size_t n,
                                 const RngStream& rng) {
  spec.validate();
  const KernelSpec specs[] = {spec};
  return stats_on_fresh_sample(model, specs, n, rng)[0];
}

std::vector<std::vector<double>> parametric_bootstrap_stats(const ScoreModel& model,
                                                            std::span<const KernelSpec> specs,
                                                            std::size_t n, std::size_t count,
                                                            const RngStream& rng,
                                                            std::size_t workers) {
  if (!model.has_sampler()) {
    throw CapabilityError(
        "model has no sampler; parametric bootstrap is unavailable, use the wild bootstrap");
  }
  if (n < 2) throw ConfigError("parametric bootstrap needs at least two samples");
  for (const auto& spec : specs) spec.validate();
  std::vector<std::vector<double>> out(specs.size(), std::vector<double>(count));
  parallel_for(count, workers, [&](std::size_t b) {
    const auto stats = stats_on_fresh_sample(model, specs, n, rng.child(b));
    for (std::size_t k = 0; k < specs.size(); ++k) out[k][b] = stats[k];
  });
  return out;
}

}  // namespace ksdagg
