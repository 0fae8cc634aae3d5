#include "ksdagg/stein.hpp"

#include "ksdagg/errors.hpp"
#include "ksdagg/kernels.hpp"
#include "ksdagg/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace ksdagg {

ScoreModel::ScoreModel(std::size_t dim, ScoreFn score, SamplerFn sampler)
    : dim_(dim), score_(std::move(score)), sampler_(std::move(sampler)) {
  if (dim_ == 0) throw ConfigError("model dimension must be positive");
  if (!score_) throw ConfigError("model needs a score function");
}

DataMatrix ScoreModel::scores(const DataMatrix& x) const {
  if (static_cast<std::size_t>(x.cols()) != dim_) {
    throw InvalidDataError("data dimension " + std::to_string(x.cols()) +
                           " does not match model dimension " + std::to_string(dim_));
  }
  DataMatrix s = score_(x);
  if (s.rows() != x.rows() || s.cols() != x.cols()) {
    throw ModelEvaluationError("score function returned a matrix of the wrong shape", 0);
  }
  if (!s.allFinite()) {
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      if (!s.row(i).allFinite()) {
        throw ModelEvaluationError("non-finite score at row " + std::to_string(i),
                                   static_cast<std::size_t>(i));
      }
    }
  }
  return s;
}

Vector ScoreModel::score(const Vector& x) const {
  DataMatrix row = x.transpose();
  return scores(row).row(0).transpose();
}

DataMatrix ScoreModel::sample(std::size_t n, const RngStream& rng) const {
  if (!sampler_) {
    throw CapabilityError(
        "model has no sampler; parametric bootstrap is unavailable, use the wild bootstrap");
  }
  return sampler_(n, rng);
}

double stein_kernel_entry(const Vector& x, const Vector& y, const Vector& sx, const Vector& sy,
                          const KernelSpec& spec) {
  const Vector diff = x - y;
  const auto t = radial_terms(diff.squaredNorm(), static_cast<std::size_t>(x.size()), spec);
  // syᵀ∇ₓk + sxᵀ∇ᵧk = g·(sy − sx)ᵀ(x − y)
  return sx.dot(sy) * t.value + t.grad_coef * (sy - sx).dot(diff) + t.mixed_trace;
}

namespace {

constexpr Eigen::Index kBlockSize = 512;
// Blocks are evaluated over whole SIMD packets so that every pair takes the same
// code path, whatever its position or the buffer's stack address.
constexpr Eigen::Index kPad = 8;

Eigen::Index padded(Eigen::Index count) { return (count + kPad - 1) / kPad * kPad; }

// Evaluates h for `count` pairs of one block into `out`; all buffers are
// 64-byte aligned and hold at least padded(count) entries.
void evaluate_block(const KernelSpec& spec, double dim, Eigen::Index count, const double* sq_dist,
                    const double* score_dot, const double* cross, double* scratch, double* out) {
  using Map = Eigen::Map<Eigen::ArrayXd, Eigen::Aligned64>;
  using ConstMap = Eigen::Map<const Eigen::ArrayXd, Eigen::Aligned64>;
  count = padded(count);
  const ConstMap u(sq_dist, count);
  const ConstMap dot(score_dot, count);
  const ConstMap cr(cross, count);
  Map h(out, count);
  Map tmp(scratch, count);
  const double c = 1.0 / (spec.bandwidth * spec.bandwidth);
  if (spec.family == KernelFamily::gaussian) {
    tmp = spec.scale * (-c * u).exp();
    h = tmp * (dot - 2.0 * c * cr + (2.0 * dim * c - 4.0 * c * c * u));
    return;
  }
  const double beta = spec.imq_beta;
  tmp = (1.0 + c * u).inverse();  // 1 / base
  if (beta == 0.5) {
    h = spec.scale * tmp.sqrt();
  } else {
    h = spec.scale * (beta * tmp.log()).exp();
  }
  // h·dot + k₁·(2βdc − 2βc·cross − 4β(β+1)c²·u/base), with k₁ = k / base
  h = h * dot + (h * tmp) * (2.0 * beta * dim * c - 2.0 * beta * c * cr -
                             4.0 * beta * (beta + 1.0) * c * c * u * tmp);
}

}  // namespace

struct SteinPairs::Block {
  Eigen::Index first = 0;  // index of the first pair in the block
  Eigen::Index count = 0;
  alignas(64) double sq_dist[kBlockSize] = {};
  alignas(64) double score_dot[kBlockSize] = {};
  alignas(64) double cross[kBlockSize] = {};
};

SteinPairs::SteinPairs(const DataMatrix& x, const DataMatrix& scores) : x_(x), scores_(scores) {
  if (scores.rows() != x.rows() || scores.cols() != x.cols()) {
    throw InvalidDataError("scores do not match the data shape");
  }
}

SteinPairs::SteinPairs(const DataMatrix& x, const DataMatrix& scores,
                       const Eigen::MatrixXd& sq_dists)
    : SteinPairs(x, scores) {
  if (sq_dists.rows() != x.rows() || sq_dists.cols() != x.rows()) {
    throw InvalidDataError("distance matrix does not match the data");
  }
  sq_dists_ = &sq_dists;
}

template <typename Sink>
void SteinPairs::for_each_block(Sink&& sink) const {
  const Eigen::Index n = x_.rows();
  const Eigen::Index d = x_.cols();
  const double* xd = x_.data();
  const double* sd = scores_.data();
  Block block;
  Eigen::Index pair = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double* xi = xd + i * d;
    const double* si = sd + i * d;
    // pairs (i, j) for j > i, in runs that fit the current block
    for (Eigen::Index j = i + 1; j < n;) {
      const Eigen::Index run = std::min(n - j, kBlockSize - block.count);
      double* u = block.sq_dist + block.count;
      double* dot = block.score_dot + block.count;
      double* cross = block.cross + block.count;
      if (d == 1) {
        for (Eigen::Index r = 0; r < run; ++r) {
          const double diff = xi[0] - xd[j + r];
          u[r] = diff * diff;
          dot[r] = si[0] * sd[j + r];
          cross[r] = (sd[j + r] - si[0]) * diff;
        }
      } else {
        for (Eigen::Index r = 0; r < run; ++r) {
          const double* xj = xd + (j + r) * d;
          const double* sj = sd + (j + r) * d;
          double uu = 0.0, dd = 0.0, cc = 0.0;
          for (Eigen::Index k = 0; k < d; ++k) {
            const double diff = xi[k] - xj[k];
            uu += diff * diff;
            dd += si[k] * sj[k];
            cc += (sj[k] - si[k]) * diff;
          }
          u[r] = uu;
          dot[r] = dd;
          cross[r] = cc;
        }
      }
      if (sq_dists_ != nullptr) {
        const double* column = sq_dists_->data() + i * n;  // symmetric: (j, i) is contiguous
        std::copy(column + j, column + j + run, u);
      }
      block.count += run;
      pair += run;
      j += run;
      if (block.count == kBlockSize) {
        sink(static_cast<const Block&>(block));
        block.first = pair;
        block.count = 0;
      }
    }
  }
  if (block.count > 0) {
    for (Eigen::Index p = block.count; p < padded(block.count); ++p) {
      block.sq_dist[p] = block.score_dot[p] = block.cross[p] = 0.0;
    }
    sink(static_cast<const Block&>(block));
  }
}

Eigen::ArrayXd SteinPairs::upper_values(const KernelSpec& spec) const {
  const Eigen::Index n = x_.rows();
  Eigen::ArrayXd out(n < 2 ? 0 : n * (n - 1) / 2);
  alignas(64) double scratch[kBlockSize];
  alignas(64) double values[kBlockSize];
  const double dim = static_cast<double>(x_.cols());
  for_each_block([&](const Block& b) {
    evaluate_block(spec, dim, b.count, b.sq_dist, b.score_dot, b.cross, scratch, values);
    std::copy(values, values + b.count, out.data() + b.first);
  });
  return out;
}

Eigen::ArrayXd SteinPairs::diagonal_values(const KernelSpec& spec) const {
  const auto at_zero = radial_terms(0.0, dim(), spec);
  return scores_.rowwise().squaredNorm().array() * at_zero.value + at_zero.mixed_trace;
}

SteinGram SteinPairs::gram(const KernelSpec& spec) const {
  const Eigen::Index n = x_.rows();
  SteinGram h(n, n);
  h.diagonal() = diagonal_values(spec).matrix();
  alignas(64) double scratch[kBlockSize];
  alignas(64) double values[kBlockSize];
  const double dim = static_cast<double>(x_.cols());
  Eigen::Index row = 0, col = 1;  // pair cursor, blocks arrive in row-major order
  for_each_block([&](const Block& b) {
    evaluate_block(spec, dim, b.count, b.sq_dist, b.score_dot, b.cross, scratch, values);
    for (Eigen::Index p = 0; p < b.count; ++p) {
      h(row, col) = values[p];
      h(col, row) = values[p];
      if (++col == n) {
        ++row;
        col = row + 1;
      }
    }
  });
  return h;
}

std::vector<double> SteinPairs::ustats(std::span<const KernelSpec> specs) const {
  const Eigen::Index n = x_.rows();
  if (n < 2) throw ConfigError("KSD U-statistic needs at least two samples");
  std::vector<std::vector<double>> block_sums(specs.size());
  alignas(64) double scratch[kBlockSize];
  alignas(64) double values[kBlockSize];
  const double dim = static_cast<double>(x_.cols());
  for_each_block([&](const Block& b) {
    for (std::size_t k = 0; k < specs.size(); ++k) {
      evaluate_block(specs[k], dim, b.count, b.sq_dist, b.score_dot, b.cross, scratch, values);
      block_sums[k].push_back(
          pairwise_sum(std::span<const double>(values, static_cast<std::size_t>(b.count))));
    }
  });
  const double norm = static_cast<double>(n) * static_cast<double>(n - 1);
  std::vector<double> out;
  out.reserve(specs.size());
  for (const auto& sums : block_sums) out.push_back(2.0 * pairwise_sum(sums) / norm);
  return out;
}

double SteinPairs::ustat(const KernelSpec& spec) const {
  const KernelSpec specs[] = {spec};
  return ustats(specs)[0];
}

SteinGram stein_gram(const DataMatrix& x, const ScoreModel& model, const KernelSpec& spec,
                     const Eigen::MatrixXd& sq_dists) {
  spec.validate();
  return SteinPairs(x, model.scores(x), sq_dists).gram(spec);
}

double ksd_ustat(const SteinGram& h) {
  const auto n = h.rows();
  if (n < 2 || h.cols() != n) throw ConfigError("KSD U-statistic needs a square Gram with N >= 2");
  std::vector<double> off;
  off.reserve(static_cast<std::size_t>(n * (n - 1)));
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i != j) off.push_back(h(i, j));
    }
  }
  return pairwise_sum(off) / (static_cast<double>(n) * static_cast<double>(n - 1));
}

}  // namespace ksdagg
