#include "mkteff/learners/classifier.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "mkteff/learners/logistic.hpp"
#include "mkteff/learners/network.hpp"
#include "mkteff/learners/random_classifier.hpp"

namespace mkteff {

std::string_view to_string(LearnerKind k) {
  switch (k) {
    case LearnerKind::Neural:
      return "neural";
    case LearnerKind::Logistic:
      return "logistic";
    case LearnerKind::Random:
      return "random";
  }
  return "unknown";
}

LearnerKind parse_learner(std::string_view name) {
  if (name == "neural" || name == "nn") return LearnerKind::Neural;
  if (name == "logistic" || name == "lr") return LearnerKind::Logistic;
  if (name == "random") return LearnerKind::Random;
  throw UsageError(fmt::format("unknown learner '{}' (expected neural, logistic or random)", name));
}

Standardizer Standardizer::fit(const Matrix& x) {
  Standardizer s;
  const double n = static_cast<double>(std::max<Eigen::Index>(x.rows(), 1));
  s.mean = x.colwise().sum() / n;
  s.scale.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double var = (x.col(j).array() - s.mean[j]).square().sum() / n;
    s.scale[j] = var > 1e-300 ? 1.0 / std::sqrt(var) : 1.0;
  }
  return s;
}

Standardizer Standardizer::identity(Eigen::Index width) {
  return {RowVector::Zero(width), RowVector::Ones(width)};
}

Matrix Standardizer::apply(const Matrix& x) const {
  return (x.rowwise() - mean).array().rowwise() * scale.array();
}

std::vector<std::uint8_t> Classifier::predict(const Matrix& batch) const {
  const Matrix p = predict_proba(batch);
  std::vector<std::uint8_t> out(static_cast<std::size_t>(p.rows()));
  for (Eigen::Index i = 0; i < p.rows(); ++i) out[static_cast<std::size_t>(i)] = p(i, 1) > p(i, 0) ? 1 : 0;
  return out;
}

void Classifier::check_width(const Matrix& batch) const {
  if (batch.cols() != input_size()) {
    throw UsageError(fmt::format("{} model expects {} inputs, got {}", to_string(kind()), input_size(), batch.cols()));
  }
}

void require_both_classes(std::span<const std::uint8_t> labels) {
  const auto positives = std::count(labels.begin(), labels.end(), std::uint8_t{1});
  if (positives == 0 || positives == static_cast<std::ptrdiff_t>(labels.size())) {
    throw TrainingError(fmt::format("training set has a single class ({} of {} positive)", positives, labels.size()));
  }
}

double mean_cross_entropy(const Matrix& proba, std::span<const std::uint8_t> labels) {
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double p = std::clamp(proba(static_cast<Eigen::Index>(i), labels[i] ? 1 : 0), 1e-15, 1.0);
    total -= std::log(p);
  }
  return labels.empty() ? 0.0 : total / static_cast<double>(labels.size());
}

std::unique_ptr<Classifier> train_classifier(LearnerKind kind, const Examples& train, const Examples& validation,
                                             std::uint64_t seed, const TrainingConfig& config) {
  switch (kind) {
    case LearnerKind::Neural:
      return nn_train(train, validation, seed, config);
    case LearnerKind::Logistic:
      return logistic_train(train, seed, config);
    case LearnerKind::Random:
      return random_train(train, seed);
  }
  throw UsageError("unknown learner kind");
}

std::unique_ptr<Classifier> make_classifier(LearnerKind kind, std::vector<Matrix> p, std::uint64_t seed) {
  auto bad = [&] { return DataError(fmt::format("{} model: unexpected parameter blocks", to_string(kind))); };
  switch (kind) {
    case LearnerKind::Neural: {
      if (p.size() < 4 || p.size() % 2 != 0 || p[0].rows() != 1) throw bad();
      Standardizer scaler{p[0].row(0), p[1].row(0)};
      Network net;
      net.sizes.push_back(static_cast<int>(p[2].rows()));
      for (std::size_t i = 2; i < p.size(); i += 2) {
        if (p[i].rows() != net.sizes.back() || p[i + 1].rows() != 1 || p[i + 1].cols() != p[i].cols()) throw bad();
        net.sizes.push_back(static_cast<int>(p[i].cols()));
        net.weights.push_back(std::move(p[i]));
        net.biases.push_back(std::move(p[i + 1]));
      }
      if (net.sizes.back() != 2 || scaler.mean.size() != net.sizes.front()) throw bad();
      auto model = std::make_unique<NeuralClassifier>(std::move(net), std::move(scaler));
      model->meta.seed = seed;
      return model;
    }
    case LearnerKind::Logistic: {
      if (p.size() != 4 || p[2].cols() != 1 || p[3].size() != 1 || p[0].cols() != p[2].rows()) throw bad();
      LogisticParams params{p[2].col(0), p[3](0, 0)};
      auto model = std::make_unique<LogisticClassifier>(std::move(params), Standardizer{p[0].row(0), p[1].row(0)});
      model->meta.seed = seed;
      return model;
    }
    case LearnerKind::Random: {
      if (p.size() != 2 || p[0].size() != 1 || p[1].size() != 1) throw bad();
      auto model = std::make_unique<RandomClassifier>(p[0](0, 0), static_cast<int>(p[1](0, 0)), seed);
      model->meta.seed = seed;
      return model;
    }
  }
  throw bad();
}

namespace {

constexpr char kModelMagic[8] = {'M', 'K', 'T', 'M', 'O', 'D', 'E', 'L'};

template <typename T>
void write_pod(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw DataError("truncated model file");
  return v;
}

}  // namespace

void save_model(std::ostream& out, const Classifier& model) {
  out.write(kModelMagic, sizeof(kModelMagic));
  write_pod<std::uint8_t>(out, 1);
  write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(model.kind()));
  write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(model.direction));
  write_pod<std::uint8_t>(out, 0);
  write_pod<std::int32_t>(out, model.hyperparams.end_x);
  write_pod<std::int32_t>(out, model.hyperparams.bps);
  write_pod<std::uint64_t>(out, model.meta.seed);
  write_pod<std::int32_t>(out, model.meta.epochs_run);
  write_pod<std::int32_t>(out, model.meta.best_epoch);
  write_pod<double>(out, model.meta.best_validation_loss);
  const auto blocks = model.parameters();
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(blocks.size()));
  for (const auto& b : blocks) {
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(b.rows()));
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(b.cols()));
  }
  for (const auto& b : blocks) {
    out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size() * sizeof(double)));
  }
  if (!out) throw DataError("model write failed");
}

std::unique_ptr<Classifier> load_model(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kModelMagic, sizeof(magic)) != 0) throw DataError("not a model file");
  if (read_pod<std::uint8_t>(in) != 1) throw DataError("unsupported model file version");
  const auto kind_tag = read_pod<std::uint8_t>(in);
  if (kind_tag > 2) throw DataError("unknown model kind");
  const auto direction = read_pod<std::uint8_t>(in);
  if (direction > 1) throw DataError("unknown model direction");
  (void)read_pod<std::uint8_t>(in);
  Hyperparams hp;
  hp.end_x = read_pod<std::int32_t>(in);
  hp.bps = read_pod<std::int32_t>(in);
  TrainingMeta meta;
  meta.seed = read_pod<std::uint64_t>(in);
  meta.epochs_run = read_pod<std::int32_t>(in);
  meta.best_epoch = read_pod<std::int32_t>(in);
  meta.best_validation_loss = read_pod<double>(in);
  const auto count = read_pod<std::uint32_t>(in);
  if (count > 1024) throw DataError("implausible parameter block count");
  std::vector<Matrix> blocks;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> shapes(count);
  for (auto& s : shapes) {
    s.first = read_pod<std::uint32_t>(in);
    s.second = read_pod<std::uint32_t>(in);
  }
  for (const auto& [r, c] : shapes) {
    Matrix m(r, c);
    in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
    if (!in) throw DataError("truncated model payload");
    blocks.push_back(std::move(m));
  }
  auto model = make_classifier(static_cast<LearnerKind>(kind_tag), std::move(blocks), meta.seed);
  model->direction = static_cast<Direction>(direction);
  model->hyperparams = hp;
  model->meta = std::move(meta);
  return model;
}

void save_model(const std::filesystem::path& path, const Classifier& model) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
  save_model(out, model);
}

std::unique_ptr<Classifier> load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot read {}", path.string()));
  return load_model(in);
}

}  // namespace mkteff
