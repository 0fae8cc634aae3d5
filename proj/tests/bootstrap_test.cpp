#include "ksdagg/bootstrap.hpp"
#include "ksdagg/errors.hpp"
#include "ksdagg/kernels.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace ksdagg;
using ksdagg::testing::random_normal;
using ksdagg::testing::rel_error;
using ksdagg::testing::standard_normal;

namespace {

SteinGram random_gram(int n, std::uint64_t seed) {
  const auto x = random_normal(n, 2, seed);
  return stein_gram(x, standard_normal(2), KernelSpec{}, pairwise_sq_dists(x));
}

double naive_wild(const SteinGram& h, const std::vector<double>& eps) {
  const auto n = h.rows();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j) sum += eps[i] * eps[j] * h(i, j);
    }
  }
  return sum / static_cast<double>(n * (n - 1));
}

}  // namespace

TEST(WildBootstrap, ConstantSignsGiveUstat) {
  const auto h = random_gram(7, 1);
  EXPECT_DOUBLE_EQ(wild_bootstrap_stat(h, std::vector<double>(7, 1.0)), ksd_ustat(h));
  EXPECT_DOUBLE_EQ(wild_bootstrap_stat(h, std::vector<double>(7, -1.0)), ksd_ustat(h));
}

TEST(WildBootstrap, TwoPointSignFlip) {
  DataMatrix x(2, 1);
  x << 0.0, 1.0;
  const auto h = stein_gram(x, standard_normal(1), KernelSpec{}, pairwise_sq_dists(x));
  EXPECT_NEAR(h(0, 1), -0.530330, 1e-6);
  EXPECT_NEAR(wild_bootstrap_stat(h, std::vector<double>{1.0, -1.0}), 0.530330, 1e-6);
  EXPECT_EQ(wild_bootstrap_stat(h, std::vector<double>{1.0, -1.0}), -ksd_ustat(h));
}

TEST(WildBootstrap, LengthMismatch) {
  const auto h = random_gram(4, 2);
  EXPECT_THROW(wild_bootstrap_stat(h, std::vector<double>(3, 1.0)), ConfigError);
  EXPECT_THROW(wild_bootstrap_stats(h, Eigen::MatrixXd::Ones(5, 2)), ConfigError);
}

TEST(WildBootstrap, GlobalSignFlipIsExact) {
  for (int t = 0; t < 50; ++t) {
    const int n = 2 + t % 30;
    const auto h = random_gram(n, 100 + t);
    const auto signs = rademacher_matrix(n, 20, RngStream(t));
    const auto a = wild_bootstrap_stats(h, signs);
    const auto b = wild_bootstrap_stats(h, -signs);
    EXPECT_EQ(a, b);
    for (int c = 0; c < 20; ++c) {
      std::vector<double> eps(signs.col(c).data(), signs.col(c).data() + n), neg(eps);
      for (auto& e : neg) e = -e;
      EXPECT_EQ(wild_bootstrap_stat(h, eps), wild_bootstrap_stat(h, neg));
    }
  }
}

TEST(WildBootstrap, ExhaustiveSignAverageIsZero) {
  for (int n : {2, 5, 10}) {
    const auto h = random_gram(n, 300 + n);
    double total = 0.0, scale = 0.0;
    std::vector<double> eps(n);
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      for (int i = 0; i < n; ++i) eps[i] = (mask >> i) & 1u ? 1.0 : -1.0;
      const double v = wild_bootstrap_stat(h, eps);
      total += v;
      scale += std::abs(v);
    }
    EXPECT_NEAR(total / (1u << n), 0.0, 1e-15 * scale);
  }
}

TEST(WildBootstrap, MatrixProductMatchesLoopAndNaive) {
  for (int n : {2, 3, 8, 33}) {
    const auto h = random_gram(n, 400 + n);
    const auto signs = rademacher_matrix(n, 64, RngStream(n, 5));
    const auto stats = wild_bootstrap_stats(h, signs);
    for (int b = 0; b < 64; ++b) {
      std::vector<double> eps(signs.col(b).data(), signs.col(b).data() + n);
      EXPECT_LE(rel_error(stats[b], wild_bootstrap_stat(h, eps), 1e-300), 1e-12);
      EXPECT_LE(rel_error(stats[b], naive_wild(h, eps), 1e-300), 1e-12);
    }
  }
}

TEST(Rademacher, SignsAreBalancedAndDeterministic) {
  const auto s = rademacher_matrix(100, 200, RngStream(3));
  EXPECT_TRUE((s.array().abs() == 1.0).all());
  EXPECT_LE(std::abs(s.mean()), 4.0 / std::sqrt(20000.0));
  EXPECT_EQ(s, rademacher_matrix(100, 200, RngStream(3)));
  EXPECT_NE(s, rademacher_matrix(100, 200, RngStream(4)));
  // column b depends only on (stream, b)
  EXPECT_EQ(rademacher_matrix(100, 50, RngStream(3)), s.leftCols(50));
}

TEST(ParametricBootstrap, StubSamplerComposes) {
  const auto fixed = random_normal(12, 2, 9);
  ScoreModel stub(
      2, [](const DataMatrix& x) { return DataMatrix(-x); },
      [fixed](std::size_t, const RngStream&) { return fixed; });
  const KernelSpec spec{KernelFamily::gaussian, 0.7};
  const auto h = stein_gram(fixed, stub, spec, pairwise_sq_dists(fixed));
  EXPECT_LE(rel_error(parametric_bootstrap_stat(stub, spec, 12, RngStream(1)), ksd_ustat(h),
                      1e-300),
            1e-12);
}

TEST(ParametricBootstrap, NullMeanIsZero) {
  const auto model = standard_normal(1);
  const KernelSpec specs[] = {KernelSpec{}};
  const auto stats = parametric_bootstrap_stats(model, specs, 1000, 500, RngStream(17))[0];
  double s = 0.0, s2 = 0.0;
  for (double v : stats) {
    s += v;
    s2 += v * v;
  }
  const double mean = s / 500.0;
  const double se = std::sqrt((s2 / 500.0 - mean * mean) / 500.0);
  EXPECT_LE(std::abs(mean), 4 * se);
}

TEST(ParametricBootstrap, DeterministicPerStream) {
  const auto model = standard_normal(2);
  const KernelSpec spec;
  const double a = parametric_bootstrap_stat(model, spec, 50, RngStream(5, 1));
  EXPECT_EQ(a, parametric_bootstrap_stat(model, spec, 50, RngStream(5, 1)));
  EXPECT_NE(a, parametric_bootstrap_stat(model, spec, 50, RngStream(5, 2)));
  const KernelSpec specs[] = {spec};
  const auto one = parametric_bootstrap_stats(model, specs, 50, 30, RngStream(5), 1);
  const auto many = parametric_bootstrap_stats(model, specs, 50, 30, RngStream(5), 4);
  EXPECT_EQ(one, many);
  EXPECT_EQ(one[0][3], parametric_bootstrap_stat(model, spec, 50, RngStream(5).child(3)));
}

TEST(ParametricBootstrap, SharedSampleAcrossKernels) {
  const auto model = standard_normal(2);
  const std::vector<KernelSpec> specs{KernelSpec{}, KernelSpec{KernelFamily::gaussian, 2.0}};
  const auto stats = parametric_bootstrap_stats(model, specs, 40, 5, RngStream(8));
  for (int b = 0; b < 5; ++b) {
    for (int k = 0; k < 2; ++k) {
      EXPECT_EQ(stats[k][b], parametric_bootstrap_stat(model, specs[k], 40, RngStream(8).child(b)));
    }
  }
}

TEST(ParametricBootstrap, RequiresSampler) {
  ScoreModel no_sampler(1, [](const DataMatrix& x) { return DataMatrix(-x); });
  const KernelSpec specs[] = {KernelSpec{}};
  EXPECT_THROW(parametric_bootstrap_stat(no_sampler, KernelSpec{}, 10, RngStream(1)),
               CapabilityError);
  EXPECT_THROW(parametric_bootstrap_stats(no_sampler, specs, 10, 3, RngStream(1)),
               CapabilityError);
}

TEST(BootstrapBank, SortedWithObservedMember) {
  const BootstrapBank bank(0.25, {0.4, 0.1, 0.3}, {0.2});
  EXPECT_EQ(bank.b1(), 3u);
  EXPECT_EQ(std::vector<double>(bank.sorted().begin(), bank.sorted().end()),
            (std::vector<double>{0.1, 0.25, 0.3, 0.4}));
  EXPECT_EQ(bank.observed(), 0.25);
  EXPECT_EQ(bank.level().size(), 1u);
}

TEST(EmpiricalQuantile, Examples) {
  const BootstrapBank bank(0.5, {0.1, 0.2, 0.3, 0.4});
  auto q = empirical_quantile(bank, 0.05);
  EXPECT_EQ(q.index, 5u);
  EXPECT_EQ(q.value, 0.5);
  q = empirical_quantile(bank, 0.4);
  EXPECT_EQ(q.index, 3u);
  EXPECT_EQ(q.value, 0.3);
  EXPECT_FALSE(q.clamped);
  EXPECT_THROW(empirical_quantile(bank, 0.0), ConfigError);
  EXPECT_THROW(empirical_quantile(bank, 1.0), ConfigError);
}

TEST(EmpiricalQuantile, MonotoneInLevel) {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> normal;
  for (int t = 0; t < 50; ++t) {
    std::vector<double> sims(1 + t * 7);
    for (auto& v : sims) v = normal(gen);
    const BootstrapBank bank(normal(gen), sims);
    double prev = INFINITY;
    for (double a = 0.001; a < 1.0; a += 0.001) {
      const double q = empirical_quantile(bank, a).value;
      EXPECT_LE(q, prev);
      prev = q;
    }
    EXPECT_EQ(empirical_quantile(bank, 1e-9).value, bank.sorted().back());
  }
}

TEST(EmpiricalQuantile, RankClamping) {
  bool clamped = false;
  EXPECT_EQ(quantile_rank(4, 0.999999, &clamped), 1u);
  EXPECT_FALSE(clamped);
  EXPECT_EQ(quantile_rank(4, 1.5, &clamped), 1u);
  EXPECT_TRUE(clamped);
  EXPECT_EQ(quantile_rank(4, -0.5, &clamped), 5u);
  EXPECT_TRUE(clamped);
}

TEST(BootstrapKind, Parse) {
  EXPECT_EQ(parse_bootstrap_kind("wild"), BootstrapKind::wild);
  EXPECT_EQ(to_string(BootstrapKind::parametric), "parametric");
  EXPECT_THROW(parse_bootstrap_kind("permutation"), ConfigError);
}
