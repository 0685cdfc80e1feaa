#include "fairpsy/models.hpp"

#include <cmath>

namespace fairpsy {

void LogisticConfig::validate() const {
  if (!(l2_lambda >= 0.0) || !std::isfinite(l2_lambda)) throw ConfigError("l2_lambda must be >= 0");
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ConfigError("eta must be >= 0");
  if (max_iters <= 0) throw ConfigError("max_iters must be positive");
  if (!(step_size > 0.0)) throw ConfigError("step_size must be positive");
  if (!(tol > 0.0)) throw ConfigError("tol must be positive");
}

void standardization(const Matrix& x, Vector& mean, Vector& scale) {
  const auto n = static_cast<double>(x.rows());
  mean = x.colwise().mean().transpose();
  scale.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double var = (x.col(j).array() - mean[j]).square().sum() / n;
    const double sd = std::sqrt(var);
    scale[j] = sd > 1e-12 ? sd : 1.0;
  }
}

TrainedModel train_logistic(const LabeledDataset& ds, const LogisticConfig& cfg, const Vector* initial) {
  cfg.validate();
  if (ds.n_rows() < 2) throw DataError("logistic regression needs at least two rows");
  const Eigen::Index positives = ds.labels().sum();
  if (positives == 0 || positives == ds.n_rows()) throw DataError("logistic regression needs both classes");

  LogisticModel model;
  model.feature_names = ds.feature_names();
  standardization(ds.features(), model.mean, model.scale);
  Matrix design = (ds.features().rowwise() - model.mean.transpose()).array().rowwise() /
                  model.scale.transpose().array();

  const LogisticObjective<double> objective(std::move(design), ds.labels().cast<double>(), ds.protected_attr(),
                                            ds.weights(), cfg.l2_lambda, cfg.eta);
  const Eigen::Index dim = objective.dimension();
  Vector params = Vector::Zero(dim);
  if (initial) {
    if (initial->size() != dim) throw DataError("initial iterate has the wrong dimension");
    params = *initial;
  }

  constexpr double kArmijo = 1e-4;
  Vector grad;
  double value = objective.value_and_gradient(params, grad);
  double step = cfg.step_size;
  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    if (grad.lpNorm<Eigen::Infinity>() < cfg.tol) {
      model.converged = true;
      break;
    }
    const double g2 = grad.squaredNorm();
    Vector trial;
    double trial_value = 0.0;
    bool accepted = false;
    while (step > 1e-20) {
      trial = params - step * grad;
      trial_value = objective.value(trial);
      if (std::isfinite(trial_value) && trial_value <= value - kArmijo * step * g2) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no descent possible at machine precision
    params = std::move(trial);
    value = objective.value_and_gradient(params, grad);
    step *= 2.0;
  }
  if (!model.converged && grad.lpNorm<Eigen::Infinity>() < cfg.tol) model.converged = true;

  model.iterations = it;
  model.coef = params.head(dim - 1);
  model.intercept = params[dim - 1];
  if (!model.coef.allFinite() || !std::isfinite(model.intercept))
    throw DataError("logistic regression diverged to non-finite parameters");
  return TrainedModel(std::move(model));
}

}  // namespace fairpsy
