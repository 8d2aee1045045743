#include "mkteff/learners/logistic.hpp"

#include <cmath>

#include <fmt/format.h>

namespace mkteff {

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Vector logits(const LogisticParams& p, const Matrix& x) { return (x * p.weights).array() + p.bias; }

}  // namespace

double logistic_loss(const LogisticParams& p, const Matrix& x, std::span<const std::uint8_t> y, double l2) {
  if (x.rows() == 0) throw TrainingError("empty batch");
  const Vector z = logits(p, x);
  double nll = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) nll += softplus(z[i]) - (y[static_cast<std::size_t>(i)] ? z[i] : 0.0);
  return nll / static_cast<double>(x.rows()) + l2 * p.weights.squaredNorm();
}

LogisticGradient logistic_gradient(const LogisticParams& p, const Matrix& x, std::span<const std::uint8_t> y,
                                   double l2) {
  if (x.rows() == 0) throw TrainingError("empty batch");
  const double n = static_cast<double>(x.rows());
  const Vector z = logits(p, x);
  Vector residual(z.size());
  double nll = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double t = y[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
    residual[i] = (sigmoid(z[i]) - t) / n;
    nll += softplus(z[i]) - t * z[i];
  }
  LogisticGradient g;
  g.weights = x.transpose() * residual + 2.0 * l2 * p.weights;
  g.bias = residual.sum();
  g.loss = nll / n + l2 * p.weights.squaredNorm();
  return g;
}

Matrix LogisticClassifier::predict_proba(const Matrix& batch) const {
  check_width(batch);
  const Vector z = logits(params_, scaler_.apply(batch));
  Matrix out(z.size(), 2);
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    out(i, 1) = sigmoid(z[i]);
    out(i, 0) = sigmoid(-z[i]);
  }
  return out;
}

std::vector<Matrix> LogisticClassifier::parameters() const {
  Matrix w = params_.weights;
  Matrix b(1, 1);
  b(0, 0) = params_.bias;
  return {scaler_.mean, scaler_.scale, w, b};
}

Matrix logistic_predict(const LogisticClassifier& model, const Matrix& batch) { return model.predict_proba(batch); }

std::unique_ptr<LogisticClassifier> logistic_train(const Examples& train, std::uint64_t seed,
                                                   const TrainingConfig& config) {
  if (train.empty() || train.x == nullptr) throw TrainingError("empty training set");
  if (static_cast<std::size_t>(train.x->rows()) != train.size()) throw UsageError("training labels misaligned");
  require_both_classes(train.y);

  auto scaler = config.standardize ? Standardizer::fit(*train.x) : Standardizer::identity(train.x->cols());
  const Matrix xs = scaler.apply(*train.x);

  LogisticParams params;
  params.weights = Vector::Zero(xs.cols());
  // Start the intercept at the base-rate log-odds; the optimum is symmetric otherwise.
  double positives = 0.0;
  for (auto v : train.y) positives += v;
  const double rate = positives / static_cast<double>(train.size());
  params.bias = std::log(rate / (1.0 - rate));

  Matrix w = params.weights;
  Matrix b(1, 1);
  b(0, 0) = params.bias;
  std::vector<Matrix*> blocks{&w, &b};
  AdamConfig adam_config = config.adam;
  adam_config.step = config.logistic_step;
  AdamState adam(adam_config, blocks);

  TrainingMeta meta;
  meta.seed = seed;
  std::vector<Matrix> grads(2);
  for (int iter = 1; iter <= config.logistic_max_iters; ++iter) {
    params.weights = w.col(0);
    params.bias = b(0, 0);
    const auto g = logistic_gradient(params, xs, train.y, config.l2);
    if (!std::isfinite(g.loss)) throw TrainingError(fmt::format("logistic loss diverged at iteration {}", iter));
    meta.train_loss.push_back(g.loss);
    meta.epochs_run = iter;
    const double norm = std::sqrt(g.weights.squaredNorm() + g.bias * g.bias);
    if (norm < config.logistic_tolerance) break;
    grads[0] = g.weights;
    grads[1] = Matrix::Constant(1, 1, g.bias);
    adam.apply(blocks, grads);
  }
  params.weights = w.col(0);
  params.bias = b(0, 0);
  meta.best_epoch = meta.epochs_run;
  meta.best_validation_loss = meta.train_loss.empty() ? 0.0 : meta.train_loss.back();

  auto model = std::make_unique<LogisticClassifier>(std::move(params), std::move(scaler));
  model->meta = std::move(meta);
  return model;
}

}  // namespace mkteff
