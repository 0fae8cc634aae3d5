#include "ksdagg/errors.hpp"
#include "ksdagg/kernels.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace ksdagg;
using ksdagg::testing::random_normal;
using ksdagg::testing::rel_error;

namespace {

DataMatrix column(std::initializer_list<double> values) {
  DataMatrix x(static_cast<Eigen::Index>(values.size()), 1);
  Eigen::Index i = 0;
  for (double v : values) x(i++, 0) = v;
  return x;
}

double sq_norm(const Vector& v) { return v.squaredNorm(); }

}  // namespace

TEST(PairwiseSqDists, OneDimensional) {
  const auto d = pairwise_sq_dists(column({0.0, 3.0}));
  EXPECT_EQ(d(0, 0), 0.0);
  EXPECT_EQ(d(0, 1), 9.0);
  EXPECT_EQ(d(1, 0), 9.0);
  EXPECT_EQ(d(1, 1), 0.0);
}

TEST(PairwiseSqDists, SinglePoint) {
  const auto d = pairwise_sq_dists(column({5.0}));
  ASSERT_EQ(d.rows(), 1);
  EXPECT_EQ(d(0, 0), 0.0);
}

TEST(PairwiseSqDists, TwoDimensional) {
  DataMatrix x(3, 2);
  x << 0, 0, 1, 1, 0, 2;
  const auto d = pairwise_sq_dists(x);
  EXPECT_EQ(d(0, 1), 2.0);
  EXPECT_EQ(d(0, 2), 4.0);
  EXPECT_EQ(d(1, 2), 2.0);
}

TEST(PairwiseSqDists, NonFiniteInputRejected) {
  auto x = column({0.0, 1.0});
  x(1, 0) = std::nan("");
  EXPECT_THROW(pairwise_sq_dists(x), InvalidDataError);
  x(1, 0) = INFINITY;
  EXPECT_THROW(pairwise_sq_dists(x), InvalidDataError);
}

TEST(PairwiseSqDists, MatchesDoubleLoopAndIgnoresWorkerCount) {
  for (std::size_t n = 1; n <= 20; ++n) {
    const auto x = random_normal(n, 3, 100 + n);
    const auto d = pairwise_sq_dists(x);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double naive = 0.0;
        for (int k = 0; k < 3; ++k) naive += std::pow(x(i, k) - x(j, k), 2);
        if (i == j) {
          EXPECT_EQ(d(i, j), 0.0);
        } else {
          EXPECT_LE(rel_error(d(i, j), naive, 1e-300), 1e-12);
        }
        EXPECT_EQ(d(i, j), d(j, i));
        EXPECT_GE(d(i, j), 0.0);
      }
    }
    for (std::size_t workers : {2u, 3u, 7u}) {
      EXPECT_EQ(pairwise_sq_dists(x, workers), d) << "workers=" << workers;
    }
  }
}

TEST(KernelValue, Examples) {
  KernelSpec imq;
  KernelSpec gauss{KernelFamily::gaussian, 2.0};
  EXPECT_EQ(kernel_value(0.0, imq), 1.0);
  EXPECT_EQ(kernel_value(0.0, gauss), 1.0);
  EXPECT_DOUBLE_EQ(kernel_value(3.0, imq), 0.5);
  EXPECT_NEAR(kernel_value(4.0, gauss), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(kernel_value(4.0, gauss), 0.367879, 1e-6);
}

TEST(KernelValue, MonotoneNonincreasing) {
  for (auto family : {KernelFamily::imq, KernelFamily::gaussian}) {
    for (double lambda : {0.1, 1.0, 7.0}) {
      KernelSpec spec{family, lambda, 0.3};
      double prev = kernel_value(0.0, spec);
      EXPECT_EQ(prev, 1.0);
      for (double u = 0.01; u < 100.0; u *= 1.3) {
        const double v = kernel_value(u, spec);
        EXPECT_LE(v, prev);
        EXPECT_GE(v, 0.0);
        prev = v;
      }
    }
  }
}

TEST(KernelSpec, Validation) {
  EXPECT_THROW((KernelSpec{KernelFamily::imq, 0.0}.validate()), ConfigError);
  EXPECT_THROW((KernelSpec{KernelFamily::imq, 1.0, 1.0}.validate()), ConfigError);
  EXPECT_THROW((KernelSpec{KernelFamily::imq, 1.0, 0.0}.validate()), ConfigError);
  EXPECT_NO_THROW((KernelSpec{KernelFamily::gaussian, 1.0, 0.5}.validate()));
  EXPECT_EQ(parse_kernel_family("gaussian"), KernelFamily::gaussian);
  EXPECT_EQ(to_string(KernelFamily::imq), "imq");
  EXPECT_THROW(parse_kernel_family("laplace"), ConfigError);
}

// Central differences: gradients from kernel values, the mixed trace from the
// analytic gradient, and a value-only second difference as a coarser check.
TEST(KernelDerivatives, MatchFiniteDifferences) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> lam(0.3, 3.0);
  std::uniform_real_distribution<double> beta(0.1, 0.9);
  std::uniform_int_distribution<int> dim(1, 4);
  const double h = 1e-5;
  for (int trial = 0; trial < 200; ++trial) {
    const int d = dim(gen);
    const auto pts = random_normal(2, d, 1000 + trial);
    const Vector x = pts.row(0).transpose();
    const Vector y = pts.row(1).transpose();
    KernelSpec spec{trial % 2 == 0 ? KernelFamily::imq : KernelFamily::gaussian, lam(gen),
                    beta(gen)};
    const auto der = kernel_derivatives(x, y, spec);
    EXPECT_EQ(der.value, kernel_value(sq_norm(x - y), spec));
    double mixed_fd = 0.0;
    for (int i = 0; i < d; ++i) {
      Vector e = Vector::Zero(d);
      e(i) = h;
      const double gx = (kernel_value(sq_norm(x + e - y), spec) -
                         kernel_value(sq_norm(x - e - y), spec)) / (2 * h);
      const double gy = (kernel_value(sq_norm(x - y - e), spec) -
                         kernel_value(sq_norm(x - y + e), spec)) / (2 * h);
      EXPECT_LE(rel_error(der.grad_x(i), gx), 1e-6) << "trial " << trial;
      EXPECT_LE(rel_error(der.grad_y(i), gy), 1e-6) << "trial " << trial;
      const double dgx = (kernel_derivatives(x, y + e, spec).grad_x(i) -
                          kernel_derivatives(x, y - e, spec).grad_x(i)) / (2 * h);
      mixed_fd += dgx;
    }
    EXPECT_LE(rel_error(der.mixed_trace, mixed_fd), 1e-6) << "trial " << trial;

    double mixed_values = 0.0;
    const double h2 = 1e-4;
    for (int i = 0; i < d; ++i) {
      Vector e = Vector::Zero(d);
      e(i) = h2;
      auto k = [&](const Vector& a, const Vector& b) { return kernel_value(sq_norm(a - b), spec); };
      mixed_values += (k(x + e, y + e) - k(x + e, y - e) - k(x - e, y + e) + k(x - e, y - e)) /
                      (4 * h2 * h2);
    }
    EXPECT_LE(rel_error(der.mixed_trace, mixed_values), 1e-4) << "trial " << trial;
  }
}

TEST(KernelDerivatives, RadialTermsAgree) {
  const auto pts = random_normal(2, 3, 5);
  const Vector x = pts.row(0).transpose();
  const Vector y = pts.row(1).transpose();
  for (auto family : {KernelFamily::imq, KernelFamily::gaussian}) {
    KernelSpec spec{family, 1.7, 0.4, 2.5};
    const auto der = kernel_derivatives(x, y, spec);
    const auto rad = radial_terms(sq_norm(x - y), 3, spec);
    EXPECT_DOUBLE_EQ(der.value, rad.value);
    EXPECT_DOUBLE_EQ(der.mixed_trace, rad.mixed_trace);
    EXPECT_TRUE(der.grad_x.isApprox(rad.grad_coef * (x - y)));
    EXPECT_TRUE(der.grad_y.isApprox(-der.grad_x));
  }
}

TEST(MedianBandwidth, Examples) {
  EXPECT_DOUBLE_EQ(median_bandwidth(column({0.0, 3.0, 4.0})), 3.0);
  EXPECT_DOUBLE_EQ(median_bandwidth(column({0.0, 1.0})), 1.0);
  EXPECT_DOUBLE_EQ(median_bandwidth(column({0.0, 1.0, 2.0, 10.0})), 5.0);
}

TEST(MedianBandwidth, MatchesSortedDistances) {
  for (std::size_t n : {2u, 3u, 6u, 11u}) {
    const auto x = random_normal(n, 2, 40 + n);
    std::vector<double> dist;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) dist.push_back((x.row(i) - x.row(j)).norm());
    }
    std::sort(dist.begin(), dist.end());
    const std::size_t m = dist.size();
    const double expected = m % 2 == 1 ? dist[m / 2] : 0.5 * (dist[m / 2 - 1] + dist[m / 2]);
    EXPECT_NEAR(median_bandwidth(x), expected, 1e-12 * expected);
  }
}

TEST(MedianBandwidth, Errors) {
  EXPECT_THROW(median_bandwidth(column({2.0, 2.0, 2.0})), DegenerateDataError);
  EXPECT_THROW(median_bandwidth(column({2.0})), ConfigError);
}

TEST(MedianBandwidth, PermutationAndTranslationInvariant) {
  auto x = random_normal(15, 3, 9);
  const double base = median_bandwidth(x);
  std::vector<int> perm(15);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(3));
  DataMatrix permuted(15, 3);
  for (int i = 0; i < 15; ++i) permuted.row(i) = x.row(perm[i]);
  EXPECT_EQ(median_bandwidth(permuted), base);
  DataMatrix shifted = x.rowwise() + Eigen::RowVector3d(0.25, -1.5, 3.0);
  EXPECT_NEAR(median_bandwidth(shifted), base, 1e-12 * base);
}

TEST(PowerOfTwoCollection, Examples) {
  auto c = power_of_two_collection(1.0, 0, 2);
  EXPECT_EQ(c.bandwidths, (std::vector<double>{1.0, 2.0, 4.0}));
  for (double w : c.weights) EXPECT_DOUBLE_EQ(w, 1.0 / 3.0);

  c = power_of_two_collection(2437.0, -20, 0);
  ASSERT_EQ(c.size(), 21u);
  EXPECT_NEAR(c.bandwidths.front(), 0.0023241, 1e-7);
  EXPECT_EQ(c.bandwidths.back(), 2437.0);

  c = power_of_two_collection(1.0, -1, 0);
  EXPECT_EQ(c.bandwidths, (std::vector<double>{0.5, 1.0}));
  EXPECT_EQ(c.weights, (std::vector<double>{0.5, 0.5}));
}

TEST(PowerOfTwoCollection, IncreasingWithUnitWeightSum) {
  for (int lo = -5; lo < 3; ++lo) {
    for (int hi = lo + 1; hi < 8; ++hi) {
      const auto c = power_of_two_collection(0.37, lo, hi);
      EXPECT_NO_THROW(c.validate());
      EXPECT_TRUE(std::is_sorted(c.bandwidths.begin(), c.bandwidths.end(), std::less_equal<>{}) &&
                  std::adjacent_find(c.bandwidths.begin(), c.bandwidths.end()) ==
                      c.bandwidths.end());
      EXPECT_NEAR(std::accumulate(c.weights.begin(), c.weights.end(), 0.0), 1.0, 1e-12);
    }
  }
  EXPECT_THROW(power_of_two_collection(1.0, 2, 2), ConfigError);
  EXPECT_THROW(power_of_two_collection(1.0, 3, 2), ConfigError);
}

TEST(StarCollection, Examples) {
  auto c = star_collection_from_extent(3.0, 2, 3);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_DOUBLE_EQ(c.bandwidths[0], 0.5);
  EXPECT_NEAR(c.bandwidths[1], 0.5 * std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(c.bandwidths[2], 1.5, 1e-12);

  c = star_collection_from_extent(1.0, 1, 2);
  EXPECT_DOUBLE_EQ(c.bandwidths[0], 1.0);
  EXPECT_DOUBLE_EQ(c.bandwidths[1], 2.0);
  for (double w : c.weights) EXPECT_DOUBLE_EQ(w, 0.5);

  EXPECT_EQ(ksdagg_star_collection(random_normal(10, 2, 1)).size(), 10u);
  EXPECT_THROW(ksdagg_star_collection(random_normal(1, 2, 1)), ConfigError);
}

TEST(StarCollection, UsesMaximalDistanceAndGeometricSpacing) {
  DataMatrix x(3, 2);
  x << 0, 0, 3, 4, 1, 1;  // largest distance 5
  const auto c = ksdagg_star_collection(x, 6);
  EXPECT_DOUBLE_EQ(c.bandwidths.front(), 0.5);
  EXPECT_NEAR(c.bandwidths.back(), 2.5, 1e-12);
  const double ratio = c.bandwidths[1] / c.bandwidths[0];
  for (std::size_t i = 1; i < c.size(); ++i) {
    EXPECT_NEAR(c.bandwidths[i] / c.bandwidths[i - 1], ratio, 1e-12);
  }
}
