#include "mkteff/learners/network.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "mkteff/rng.hpp"

namespace mkteff {

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < layers(); ++l) n += weights[l].size() + biases[l].size();
  return n;
}

Network Network::zeros(std::vector<int> sizes) {
  if (sizes.size() < 2 || sizes.back() != 2) throw UsageError("network needs an input size and a 2-unit output");
  Network net;
  net.sizes = std::move(sizes);
  for (std::size_t l = 1; l < net.sizes.size(); ++l) {
    if (net.sizes[l - 1] < 1 || net.sizes[l] < 1) throw UsageError("layer sizes must be positive");
    net.weights.push_back(Matrix::Zero(net.sizes[l - 1], net.sizes[l]));
    net.biases.push_back(Matrix::Zero(1, net.sizes[l]));
  }
  return net;
}

Network Network::initialize(std::vector<int> sizes, std::uint64_t seed) {
  Network net = zeros(std::move(sizes));
  Rng rng(seed);
  for (auto& w : net.weights) {
    const double limit = std::sqrt(6.0 / static_cast<double>(w.rows()));
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-limit, limit);
  }
  return net;
}

std::vector<double> Network::flatten() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (std::size_t l = 0; l < layers(); ++l) {
    flat.insert(flat.end(), weights[l].data(), weights[l].data() + weights[l].size());
    flat.insert(flat.end(), biases[l].data(), biases[l].data() + biases[l].size());
  }
  return flat;
}

void Network::assign(std::span<const double> flat) {
  if (flat.size() != parameter_count()) throw UsageError("flat parameter vector has the wrong length");
  std::size_t pos = 0;
  for (std::size_t l = 0; l < layers(); ++l) {
    std::copy_n(flat.data() + pos, weights[l].size(), weights[l].data());
    pos += static_cast<std::size_t>(weights[l].size());
    std::copy_n(flat.data() + pos, biases[l].size(), biases[l].data());
    pos += static_cast<std::size_t>(biases[l].size());
  }
}

std::vector<double> NetworkGradient::flatten() const {
  std::vector<double> flat;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    flat.insert(flat.end(), weights[l].data(), weights[l].data() + weights[l].size());
    flat.insert(flat.end(), biases[l].data(), biases[l].data() + biases[l].size());
  }
  return flat;
}

Matrix one_hot(std::span<const std::uint8_t> labels) {
  Matrix t = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), 2);
  for (std::size_t i = 0; i < labels.size(); ++i) t(static_cast<Eigen::Index>(i), labels[i] ? 1 : 0) = 1.0;
  return t;
}

namespace {

struct Activations {
  std::vector<Matrix> pre;   // pre-activation per layer
  std::vector<Matrix> post;  // post[0] is the input; post[l+1] = relu(pre[l]) for hidden layers
  Matrix log_proba;
};

Activations forward(const Network& net, const Matrix& x) {
  if (x.cols() != net.input_size()) {
    throw UsageError(fmt::format("input width {} does not match network input {}", x.cols(), net.input_size()));
  }
  Activations a;
  a.post.reserve(net.layers());
  a.post.push_back(x);
  for (std::size_t l = 0; l < net.layers(); ++l) {
    Matrix z = a.post.back() * net.weights[l];
    z.rowwise() += net.biases[l].row(0);
    a.pre.push_back(std::move(z));
    if (l + 1 < net.layers()) a.post.push_back(a.pre.back().cwiseMax(0.0));
  }
  const Matrix& logits = a.pre.back();
  if (!logits.allFinite()) throw TrainingError("non-finite network activations");
  a.log_proba.resize(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double mx = logits.row(i).maxCoeff();
    const double lse = mx + std::log((logits.row(i).array() - mx).exp().sum());
    a.log_proba.row(i) = logits.row(i).array() - lse;
  }
  return a;
}

}  // namespace

Matrix nn_forward(const Network& net, const Matrix& x) { return forward(net, x).log_proba.array().exp(); }

double nn_loss(const Network& net, const Matrix& x, const Matrix& targets) {
  if (x.rows() == 0) throw TrainingError("empty batch");
  const auto a = forward(net, x);
  return -(targets.array() * a.log_proba.array()).sum() / static_cast<double>(x.rows());
}

NetworkGradient nn_gradient(const Network& net, const Matrix& x, const Matrix& targets) {
  if (x.rows() == 0) throw TrainingError("empty batch");
  if (targets.rows() != x.rows() || targets.cols() != 2) throw UsageError("targets must be batch x 2");
  const auto a = forward(net, x);
  const double n = static_cast<double>(x.rows());

  NetworkGradient g;
  g.loss = -(targets.array() * a.log_proba.array()).sum() / n;
  g.weights.resize(net.layers());
  g.biases.resize(net.layers());

  // Softmax with cross-entropy: dL/dz = (p - t) / n.
  Matrix delta = (a.log_proba.array().exp() - targets.array()) / n;
  for (std::size_t l = net.layers(); l-- > 0;) {
    g.weights[l].noalias() = a.post[l].transpose() * delta;
    g.biases[l] = delta.colwise().sum();
    if (l > 0) {
      Matrix back = delta * net.weights[l].transpose();
      delta = (a.pre[l - 1].array() > 0.0).select(back, 0.0);
    }
  }
  return g;
}

Matrix NeuralClassifier::predict_proba(const Matrix& batch) const {
  check_width(batch);
  return nn_forward(net_, scaler_.apply(batch));
}

std::vector<Matrix> NeuralClassifier::parameters() const {
  std::vector<Matrix> out{scaler_.mean, scaler_.scale};
  for (std::size_t l = 0; l < net_.layers(); ++l) {
    out.push_back(net_.weights[l]);
    out.push_back(net_.biases[l]);
  }
  return out;
}

Matrix nn_predict(const NeuralClassifier& model, const Matrix& batch) { return model.predict_proba(batch); }

std::unique_ptr<NeuralClassifier> nn_train(const Examples& train, const Examples& validation, std::uint64_t seed,
                                           const TrainingConfig& config) {
  if (train.empty() || train.x == nullptr) throw TrainingError("empty training set");
  if (static_cast<std::size_t>(train.x->rows()) != train.size()) throw UsageError("training labels misaligned");
  require_both_classes(train.y);
  const bool has_validation = !validation.empty() && validation.x != nullptr;
  if (has_validation && validation.x->cols() != train.x->cols()) throw UsageError("validation width mismatch");

  auto scaler = config.standardize ? Standardizer::fit(*train.x) : Standardizer::identity(train.x->cols());
  const Matrix xs = scaler.apply(*train.x);
  const Matrix targets = one_hot(train.y);
  Matrix vx, vt;
  if (has_validation) {
    vx = scaler.apply(*validation.x);
    vt = one_hot(validation.y);
  }

  std::vector<int> sizes{static_cast<int>(train.x->cols())};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(2);
  Network net = Network::initialize(sizes, derive_seed(seed, {1}));

  std::vector<Matrix*> params;
  for (std::size_t l = 0; l < net.layers(); ++l) {
    params.push_back(&net.weights[l]);
    params.push_back(&net.biases[l]);
  }
  AdamState adam(config.adam, params);
  Rng shuffle_rng(derive_seed(seed, {2}));

  const auto n = static_cast<std::int64_t>(train.size());
  const std::int64_t batch = std::max(1, config.batch_size);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  TrainingMeta meta;
  meta.seed = seed;
  meta.best_validation_loss = std::numeric_limits<double>::infinity();
  Network best = net;
  double reference = std::numeric_limits<double>::infinity();
  int since_improvement = 0;
  std::vector<Matrix> grads(params.size());

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    shuffle_rng.shuffle(std::span(order));
    double loss_sum = 0.0;
    for (std::int64_t start = 0; start < n; start += batch) {
      const auto stop = std::min(n, start + batch);
      const std::vector<Eigen::Index> rows(order.begin() + start, order.begin() + stop);
      const Matrix xb = xs(rows, Eigen::all);
      const Matrix tb = targets(rows, Eigen::all);
      auto g = nn_gradient(net, xb, tb);
      if (!std::isfinite(g.loss)) {
        throw TrainingError(fmt::format("loss diverged at epoch {} (batch starting {})", epoch, start));
      }
      loss_sum += g.loss * static_cast<double>(stop - start);
      for (std::size_t l = 0; l < net.layers(); ++l) {
        grads[2 * l] = std::move(g.weights[l]);
        grads[2 * l + 1] = std::move(g.biases[l]);
      }
      adam.apply(params, grads);
    }
    const double train_loss = loss_sum / static_cast<double>(n);
    const double val_loss = has_validation ? nn_loss(net, vx, vt) : train_loss;
    if (!std::isfinite(val_loss)) {
      throw TrainingError(fmt::format("validation loss diverged at epoch {} (train loss {})", epoch, train_loss));
    }
    meta.train_loss.push_back(train_loss);
    meta.validation_loss.push_back(val_loss);
    meta.epochs_run = epoch;
    if (val_loss < meta.best_validation_loss) {
      meta.best_validation_loss = val_loss;
      meta.best_epoch = epoch;
      best = net;
    }
    if (val_loss < reference - config.min_delta) {
      reference = val_loss;
      since_improvement = 0;
    } else if (++since_improvement >= config.patience) {
      break;
    }
  }

  auto model = std::make_unique<NeuralClassifier>(std::move(best), std::move(scaler));
  model->meta = std::move(meta);
  return model;
}

}  // namespace mkteff
