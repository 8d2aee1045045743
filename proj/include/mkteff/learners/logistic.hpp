#pragma once

#include <cstdint>
#include <span>

#include "mkteff/learners/classifier.hpp"

namespace mkteff {

struct LogisticParams {
  Vector weights;
  double bias = 0.0;
};

struct LogisticGradient {
  Vector weights;
  double bias = 0.0;
  double loss = 0.0;
};

/// Mean negative log-likelihood plus l2 * |w|^2; the bias is not penalised.
double logistic_loss(const LogisticParams& p, const Matrix& x, std::span<const std::uint8_t> y, double l2);
LogisticGradient logistic_gradient(const LogisticParams& p, const Matrix& x, std::span<const std::uint8_t> y,
                                   double l2);

class LogisticClassifier final : public Classifier {
 public:
  LogisticClassifier(LogisticParams params, Standardizer scaler)
      : params_(std::move(params)), scaler_(std::move(scaler)) {}

  LearnerKind kind() const override { return LearnerKind::Logistic; }
  int input_size() const override { return static_cast<int>(params_.weights.size()); }
  Matrix predict_proba(const Matrix& batch) const override;
  std::vector<Matrix> parameters() const override;

  const LogisticParams& params() const { return params_; }

 private:
  LogisticParams params_;
  Standardizer scaler_;
};

/// Full-batch Adam until the gradient norm drops below the tolerance or the iteration cap.
std::unique_ptr<LogisticClassifier> logistic_train(const Examples& train, std::uint64_t seed,
                                                   const TrainingConfig& config);
Matrix logistic_predict(const LogisticClassifier& model, const Matrix& batch);

}  // namespace mkteff
