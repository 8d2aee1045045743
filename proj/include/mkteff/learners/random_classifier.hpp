#pragma once

#include <cstdint>

#include "mkteff/learners/classifier.hpp"

namespace mkteff {

/// Control learner: predicts positive with the training set's positive-class rate.
/// Each row's draw is keyed by (seed, row contents), so predictions are pure and
/// a batch predicts exactly as its rows would one at a time.
class RandomClassifier final : public Classifier {
 public:
  RandomClassifier(double positive_rate, int input_size, std::uint64_t seed)
      : rate_(positive_rate), input_size_(input_size), seed_(seed) {}

  LearnerKind kind() const override { return LearnerKind::Random; }
  int input_size() const override { return input_size_; }
  Matrix predict_proba(const Matrix& batch) const override;
  std::vector<std::uint8_t> predict(const Matrix& batch) const override;
  std::vector<Matrix> parameters() const override;

  double positive_rate() const { return rate_; }
  std::uint64_t seed() const { return seed_; }

 private:
  double rate_;
  int input_size_;
  std::uint64_t seed_;
};

std::unique_ptr<RandomClassifier> random_train(const Examples& train, std::uint64_t seed);
std::vector<std::uint8_t> random_predict(const RandomClassifier& model, const Matrix& batch);

}  // namespace mkteff
