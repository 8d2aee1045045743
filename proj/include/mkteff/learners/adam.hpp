#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "mkteff/common.hpp"

namespace mkteff {

struct AdamConfig {
  double step = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam moment accumulators for a list of parameter blocks.
class AdamState {
 public:
  AdamState(const AdamConfig& config, std::span<Matrix* const> params);

  /// One update with bias-corrected moments. `grads` is aligned with the parameter list.
  void apply(std::span<Matrix* const> params, std::span<const Matrix> grads);

  long step_count() const { return step_; }
  const AdamConfig& config() const { return config_; }
  const std::vector<Matrix>& first_moments() const { return m_; }
  const std::vector<Matrix>& second_moments() const { return v_; }

 private:
  AdamConfig config_;
  long step_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

}  // namespace mkteff
