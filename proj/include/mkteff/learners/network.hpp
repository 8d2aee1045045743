#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mkteff/learners/classifier.hpp"

namespace mkteff {

/// Fully connected ReLU network with a two-unit softmax output.
/// Weights are (fan_in x fan_out); biases are 1 x fan_out.
struct Network {
  std::vector<int> sizes;  // input, hidden..., 2
  std::vector<Matrix> weights;
  std::vector<Matrix> biases;

  int input_size() const { return sizes.front(); }
  std::size_t layers() const { return weights.size(); }
  std::size_t parameter_count() const;

  /// Uniform(-sqrt(6/fan_in), +sqrt(6/fan_in)) weights, zero biases.
  static Network initialize(std::vector<int> sizes, std::uint64_t seed);
  static Network zeros(std::vector<int> sizes);

  /// Flat view helpers for numerical checks.
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);
};

struct NetworkGradient {
  std::vector<Matrix> weights;
  std::vector<Matrix> biases;
  double loss = 0.0;

  std::vector<double> flatten() const;
};

/// One-hot targets: column 0 negative, column 1 positive.
Matrix one_hot(std::span<const std::uint8_t> labels);

/// Softmax probabilities for each row of `x`.
Matrix nn_forward(const Network& net, const Matrix& x);

/// Mean categorical cross-entropy against one-hot (or soft) targets.
double nn_loss(const Network& net, const Matrix& x, const Matrix& targets);

/// Backpropagated gradient of the mean categorical cross-entropy.
/// Throws TrainingError on an empty batch or non-finite activations.
NetworkGradient nn_gradient(const Network& net, const Matrix& x, const Matrix& targets);

class NeuralClassifier final : public Classifier {
 public:
  NeuralClassifier(Network net, Standardizer scaler) : net_(std::move(net)), scaler_(std::move(scaler)) {}

  LearnerKind kind() const override { return LearnerKind::Neural; }
  int input_size() const override { return net_.input_size(); }
  Matrix predict_proba(const Matrix& batch) const override;
  std::vector<Matrix> parameters() const override;

  const Network& network() const { return net_; }
  const Standardizer& scaler() const { return scaler_; }

 private:
  Network net_;
  Standardizer scaler_;
};

/// Mini-batch Adam with early stopping on validation loss; returns the best epoch's weights.
std::unique_ptr<NeuralClassifier> nn_train(const Examples& train, const Examples& validation, std::uint64_t seed,
                                           const TrainingConfig& config);

Matrix nn_predict(const NeuralClassifier& model, const Matrix& batch);

}  // namespace mkteff
