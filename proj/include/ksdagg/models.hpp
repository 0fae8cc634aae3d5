#pragma once

#include "ksdagg/rng.hpp"
#include "ksdagg/stein.hpp"
#include "ksdagg/types.hpp"

#include <cstddef>

namespace ksdagg {

/// Isotropic Gaussian N(mean, sigma² I).
struct GaussianModel {
  Vector mean;
  double sigma = 1.0;
};

/// One-dimensional Gamma distribution with shape κ and scale θ.
struct GammaModel {
  double shape = 5.0;
  double scale = 5.0;
};

/// Gaussian-Bernoulli RBM with hidden units h ∈ {−1, 1}^{d_h} and joint density
/// p(x, h) ∝ exp(½ xᵀBh + bᵀx + cᵀh − ½‖x‖²).
struct RbmModel {
  Eigen::MatrixXd weights;  ///< B, d x d_h
  Vector visible_bias;      ///< b, length d
  Vector hidden_bias;       ///< c, length d_h
  std::size_t burn_in = 2000;

  std::size_t dim() const { return static_cast<std::size_t>(weights.rows()); }
  std::size_t hidden_dim() const { return static_cast<std::size_t>(weights.cols()); }
  void validate() const;
};

double gamma_score(const GammaModel& model, double x);
DataMatrix gamma_sample(const GammaModel& model, std::size_t n, const RngStream& rng);

DataMatrix gaussian_sample(const GaussianModel& model, std::size_t n, const RngStream& rng);

/// ∇log p(x) = b − x + ½ B tanh(½ Bᵀx + c).
Vector rbm_score(const RbmModel& model, const Vector& x);
DataMatrix rbm_scores(const RbmModel& model, const DataMatrix& x);

/// One independent blocked Gibbs chain per sample (chain i uses
/// `rng.child(i)`), each run for `burn_in` sweeps. Conditionals:
/// P(h_j = 1 | x) = σ((Bᵀx)_j + 2c_j) and x | h ~ N(b + ½Bh, I).
DataMatrix rbm_gibbs_sample(const RbmModel& model, std::size_t n, const RngStream& rng,
                            std::size_t workers = 1);

/// Copy of `model` with i.i.d. N(0, sigma²) noise added to every entry of B.
RbmModel perturb_rbm(const RbmModel& model, double sigma, const RngStream& rng);

/// b, c standard normal; B Rademacher.
RbmModel random_rbm(std::size_t dim, std::size_t hidden_dim, const RngStream& rng,
                    std::size_t burn_in = 2000);

ScoreModel make_score_model(const GaussianModel& model);
ScoreModel make_score_model(const GammaModel& model);
ScoreModel make_score_model(const RbmModel& model);

}  // namespace ksdagg
