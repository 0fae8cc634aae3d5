#include "ksdagg/models.hpp"

#include "ksdagg/errors.hpp"
#include "ksdagg/parallel.hpp"

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include <cmath>
#include <string>

namespace ksdagg {

namespace {

void check_gamma(const GammaModel& model) {
  if (!(model.shape > 0.0) || !(model.scale > 0.0) || !std::isfinite(model.shape) ||
      !std::isfinite(model.scale)) {
    throw ConfigError("Gamma shape and scale must be positive and finite");
  }
}

void check_gaussian(const GaussianModel& model) {
  if (model.mean.size() == 0) throw ConfigError("Gaussian model needs a nonempty mean");
  if (!(model.sigma > 0.0) || !std::isfinite(model.sigma) || !model.mean.allFinite()) {
    throw ConfigError("Gaussian parameters must be finite with sigma > 0");
  }
}

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

void RbmModel::validate() const {
  if (weights.rows() == 0 || weights.cols() == 0) throw ConfigError("RBM needs d, d_h > 0");
  if (visible_bias.size() != weights.rows() || hidden_bias.size() != weights.cols()) {
    throw ConfigError("RBM bias lengths must match the weight matrix");
  }
  if (!weights.allFinite() || !visible_bias.allFinite() || !hidden_bias.allFinite()) {
    throw ConfigError("RBM parameters must be finite");
  }
}

double gamma_score(const GammaModel& model, double x) {
  if (!(x > 0.0)) {
    throw DomainError("Gamma score is only defined for x > 0, got " + std::to_string(x));
  }
  return (model.shape - 1.0) / x - 1.0 / model.scale;
}

DataMatrix gamma_sample(const GammaModel& model, std::size_t n, const RngStream& rng) {
  check_gamma(model);
  auto engine = rng.engine();
  boost::random::gamma_distribution<double> dist(model.shape, model.scale);
  DataMatrix out(static_cast<Eigen::Index>(n), 1);
  for (Eigen::Index i = 0; i < out.rows(); ++i) out(i, 0) = dist(engine);
  return out;
}

DataMatrix gaussian_sample(const GaussianModel& model, std::size_t n, const RngStream& rng) {
  check_gaussian(model);
  auto engine = rng.engine();
  boost::random::normal_distribution<double> normal;
  DataMatrix out(static_cast<Eigen::Index>(n), model.mean.size());
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index k = 0; k < out.cols(); ++k) {
      out(i, k) = model.mean[k] + model.sigma * normal(engine);
    }
  }
  return out;
}

DataMatrix rbm_scores(const RbmModel& model, const DataMatrix& x) {
  const Eigen::MatrixXd activation =
      (0.5 * (x * model.weights)).rowwise() + model.hidden_bias.transpose();
  const Eigen::MatrixXd squashed = activation.array().tanh().matrix();
  DataMatrix out = (-x).rowwise() + model.visible_bias.transpose();
  out += 0.5 * squashed * model.weights.transpose();
  return out;
}

Vector rbm_score(const RbmModel& model, const Vector& x) {
  const DataMatrix row = x.transpose();
  return rbm_scores(model, row).row(0).transpose();
}

DataMatrix rbm_gibbs_sample(const RbmModel& model, std::size_t n, const RngStream& rng,
                            std::size_t workers) {
  model.validate();
  const auto d = model.weights.rows();
  const auto dh = model.weights.cols();
  DataMatrix out(static_cast<Eigen::Index>(n), d);
  parallel_for(n, workers, [&](std::size_t chain) {
    auto engine = rng.child(chain).engine();
    boost::random::normal_distribution<double> normal;
    boost::random::uniform_01<double> uniform;
    Vector hidden(dh);
    for (Eigen::Index j = 0; j < dh; ++j) hidden[j] = uniform(engine) < 0.5 ? -1.0 : 1.0;
    Vector visible(d);
    auto draw_visible = [&] {
      visible = model.visible_bias + 0.5 * (model.weights * hidden);
      for (Eigen::Index k = 0; k < d; ++k) visible[k] += normal(engine);
    };
    for (std::size_t sweep = 0; sweep < model.burn_in; ++sweep) {
      draw_visible();
      const Vector logits = model.weights.transpose() * visible + 2.0 * model.hidden_bias;
      for (Eigen::Index j = 0; j < dh; ++j) {
        hidden[j] = uniform(engine) < logistic(logits[j]) ? 1.0 : -1.0;
      }
    }
    draw_visible();
    out.row(static_cast<Eigen::Index>(chain)) = visible.transpose();
  });
  return out;
}

RbmModel perturb_rbm(const RbmModel& model, double sigma, const RngStream& rng) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw ConfigError("perturbation sigma must be nonnegative");
  }
  RbmModel out = model;
  if (sigma == 0.0) return out;
  auto engine = rng.engine();
  boost::random::normal_distribution<double> normal(0.0, sigma);
  for (Eigen::Index j = 0; j < out.weights.cols(); ++j) {
    for (Eigen::Index i = 0; i < out.weights.rows(); ++i) out.weights(i, j) += normal(engine);
  }
  return out;
}

RbmModel random_rbm(std::size_t dim, std::size_t hidden_dim, const RngStream& rng,
                    std::size_t burn_in) {
  if (dim == 0 || hidden_dim == 0) throw ConfigError("RBM needs d, d_h > 0");
  auto engine = rng.engine();
  boost::random::normal_distribution<double> normal;
  RbmModel model;
  model.weights.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(hidden_dim));
  model.visible_bias.resize(static_cast<Eigen::Index>(dim));
  model.hidden_bias.resize(static_cast<Eigen::Index>(hidden_dim));
  for (Eigen::Index i = 0; i < model.visible_bias.size(); ++i) model.visible_bias[i] = normal(engine);
  for (Eigen::Index j = 0; j < model.hidden_bias.size(); ++j) model.hidden_bias[j] = normal(engine);
  for (Eigen::Index j = 0; j < model.weights.cols(); ++j) {
    for (Eigen::Index i = 0; i < model.weights.rows(); ++i) {
      model.weights(i, j) = (engine() & 1U) != 0 ? 1.0 : -1.0;
    }
  }
  model.burn_in = burn_in;
  return model;
}

ScoreModel make_score_model(const GaussianModel& model) {
  check_gaussian(model);
  const double inv_var = 1.0 / (model.sigma * model.sigma);
  return ScoreModel(
      static_cast<std::size_t>(model.mean.size()),
      [model, inv_var](const DataMatrix& x) -> DataMatrix {
        return -inv_var * (x.rowwise() - model.mean.transpose());
      },
      [model](std::size_t n, const RngStream& rng) { return gaussian_sample(model, n, rng); });
}

ScoreModel make_score_model(const GammaModel& model) {
  check_gamma(model);
  return ScoreModel(
      1,
      [model](const DataMatrix& x) -> DataMatrix {
        DataMatrix out(x.rows(), 1);
        for (Eigen::Index i = 0; i < x.rows(); ++i) out(i, 0) = gamma_score(model, x(i, 0));
        return out;
      },
      [model](std::size_t n, const RngStream& rng) { return gamma_sample(model, n, rng); });
}

ScoreModel make_score_model(const RbmModel& model) {
  model.validate();
  return ScoreModel(
      model.dim(), [model](const DataMatrix& x) { return rbm_scores(model, x); },
      [model](std::size_t n, const RngStream& rng) { return rbm_gibbs_sample(model, n, rng); });
}

}  // namespace ksdagg
