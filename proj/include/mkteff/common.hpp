#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mkteff {

// Prices are carried as integer ten-thousandths of a currency unit.
using Price = std::int64_t;
inline constexpr Price kPriceScale = 10000;

inline double to_double(Price p) { return static_cast<double>(p) / kPriceScale; }
inline Price to_price(double v) { return static_cast<Price>(std::llround(v * kPriceScale)); }

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

// Error hierarchy. The CLI maps each to an exit code.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public UsageError {
 public:
  using UsageError::UsageError;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CheckFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mkteff
