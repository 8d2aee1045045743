#include "mkteff/learners/random_classifier.hpp"

#include "mkteff/rng.hpp"

namespace mkteff {

Matrix RandomClassifier::predict_proba(const Matrix& batch) const {
  check_width(batch);
  Matrix out(batch.rows(), 2);
  out.col(0).setConstant(1.0 - rate_);
  out.col(1).setConstant(rate_);
  return out;
}

std::vector<std::uint8_t> RandomClassifier::predict(const Matrix& batch) const {
  check_width(batch);
  std::vector<std::uint8_t> out(static_cast<std::size_t>(batch.rows()));
  for (Eigen::Index i = 0; i < batch.rows(); ++i) {
    const auto row = batch.row(i);
    const auto key = fnv1a(std::as_bytes(std::span(row.data(), static_cast<std::size_t>(row.size()))));
    const double u = static_cast<double>(splitmix64(seed_ ^ key) >> 11) * 0x1.0p-53;
    out[static_cast<std::size_t>(i)] = u < rate_ ? 1 : 0;
  }
  return out;
}

std::vector<Matrix> RandomClassifier::parameters() const {
  return {Matrix::Constant(1, 1, rate_), Matrix::Constant(1, 1, static_cast<double>(input_size_))};
}

std::unique_ptr<RandomClassifier> random_train(const Examples& train, std::uint64_t seed) {
  if (train.empty() || train.x == nullptr) throw TrainingError("empty training set");
  double positives = 0.0;
  for (auto v : train.y) positives += v;
  auto model = std::make_unique<RandomClassifier>(positives / static_cast<double>(train.size()),
                                                  static_cast<int>(train.x->cols()), seed);
  model->meta.seed = seed;
  return model;
}

std::vector<std::uint8_t> random_predict(const RandomClassifier& model, const Matrix& batch) {
  return model.predict(batch);
}

}  // namespace mkteff
