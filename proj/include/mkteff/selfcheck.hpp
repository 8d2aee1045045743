#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mkteff/learners/logistic.hpp"
#include "mkteff/learners/network.hpp"

namespace mkteff {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Replaceable implementations, so tests can confirm that a broken one is caught.
struct SelfcheckHooks {
  std::function<NetworkGradient(const Network&, const Matrix&, const Matrix&)> nn_gradient = mkteff::nn_gradient;
  std::function<LogisticGradient(const LogisticParams&, const Matrix&, std::span<const std::uint8_t>, double)>
      logistic_gradient = mkteff::logistic_gradient;
};

/// Relative error |a - b| / max(|a|, |b|) over whole vectors; 0 when both vanish.
double relative_error(std::span<const double> a, std::span<const double> b);

/// Central finite-difference gradient check on random [5,4,3,2] networks.
CheckResult check_network_gradient(const SelfcheckHooks& hooks, int instances = 20, std::uint64_t seed = 7);
/// Central finite-difference gradient check on random logistic problems.
CheckResult check_logistic_gradient(const SelfcheckHooks& hooks, int instances = 20, std::uint64_t seed = 11);

/// Every built-in check, in a fixed order, each listed exactly once.
std::vector<CheckResult> run_selfcheck(const SelfcheckHooks& hooks = {});

}  // namespace mkteff
