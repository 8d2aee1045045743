#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "mkteff/common.hpp"
#include "mkteff/dataset.hpp"
#include "mkteff/learners/adam.hpp"

namespace mkteff {

enum class LearnerKind : std::uint8_t { Neural = 0, Logistic = 1, Random = 2 };

std::string_view to_string(LearnerKind k);
/// Accepts neural|logistic|random. Throws UsageError otherwise.
LearnerKind parse_learner(std::string_view name);

struct TrainingConfig {
  // Network
  AdamConfig adam{};
  std::vector<int> hidden = {180, 20};
  int batch_size = 256;
  int max_epochs = 200;
  int patience = 5;
  double min_delta = 1e-4;

  // Logistic regression
  double l2 = 1e-3;
  double logistic_step = 0.05;
  int logistic_max_iters = 500;
  double logistic_tolerance = 1e-5;

  // Both gradient-trained learners standardise inputs with training-set statistics.
  bool standardize = true;
};

struct TrainingMeta {
  std::uint64_t seed = 0;
  int epochs_run = 0;
  int best_epoch = 0;
  double best_validation_loss = 0.0;
  std::vector<double> train_loss;
  std::vector<double> validation_loss;
};

/// Labelled examples. Labels are 1 for the positive class.
struct Examples {
  const Matrix* x = nullptr;
  std::span<const std::uint8_t> y;

  std::size_t size() const { return y.size(); }
  bool empty() const { return y.empty(); }
};

/// Per-feature affine standardisation fitted on training data.
struct Standardizer {
  RowVector mean;
  RowVector scale;  // 1 / std, or 1 for constant features

  static Standardizer fit(const Matrix& x);
  static Standardizer identity(Eigen::Index width);
  Matrix apply(const Matrix& x) const;
};

class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual LearnerKind kind() const = 0;
  virtual int input_size() const = 0;
  /// Rows of (negative, positive) class probabilities.
  virtual Matrix predict_proba(const Matrix& batch) const = 0;
  /// Class per row; 1 means positive. Default: positive iff p(positive) > p(negative).
  virtual std::vector<std::uint8_t> predict(const Matrix& batch) const;

  /// Parameter blocks in a fixed order; used by the model file format.
  virtual std::vector<Matrix> parameters() const = 0;

  Direction direction = Direction::Up;
  Hyperparams hyperparams{};
  TrainingMeta meta{};

 protected:
  void check_width(const Matrix& batch) const;
};

/// Trains the requested learner. Throws TrainingError on a single-class training set
/// or a divergent loss; the caller decides how to fall back.
std::unique_ptr<Classifier> train_classifier(LearnerKind kind, const Examples& train, const Examples& validation,
                                             std::uint64_t seed, const TrainingConfig& config);

/// Rebuilds a classifier from its parameter blocks and training seed.
std::unique_ptr<Classifier> make_classifier(LearnerKind kind, std::vector<Matrix> parameters, std::uint64_t seed);

// Model file layout (little-endian):
//   "MKTMODEL", u8 version(1), u8 kind, u8 direction, u8 reserved,
//   i32 end_x, i32 bps, u64 seed, i32 epochs_run, i32 best_epoch, f64 best_validation_loss,
//   u32 block count B, B x (u32 rows, u32 cols), then every block's f64 values row-major.
void save_model(std::ostream& out, const Classifier& model);
std::unique_ptr<Classifier> load_model(std::istream& in);
void save_model(const std::filesystem::path& path, const Classifier& model);
std::unique_ptr<Classifier> load_model(const std::filesystem::path& path);

/// Throws TrainingError unless both classes occur.
void require_both_classes(std::span<const std::uint8_t> labels);

/// Mean binary cross-entropy of predicted probabilities, clipped away from 0.
double mean_cross_entropy(const Matrix& proba, std::span<const std::uint8_t> labels);

}  // namespace mkteff
