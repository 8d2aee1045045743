#include "mkteff/selfcheck.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "mkteff/dataset.hpp"
#include "mkteff/rng.hpp"
#include "mkteff/strategy.hpp"

namespace mkteff {

double relative_error(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) return INFINITY;
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double scale = std::sqrt(std::max(na, nb));
  return scale == 0.0 ? 0.0 : std::sqrt(diff) / scale;
}

namespace {

constexpr double kStep = 1e-5;

Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

std::vector<std::uint8_t> random_labels(Rng& rng, std::size_t n) {
  std::vector<std::uint8_t> y(n);
  for (auto& v : y) v = rng.uniform() < 0.5 ? 1 : 0;
  y[0] = 0;
  y[1] = 1;
  return y;
}

CheckResult check_decide() {
  const bool ok = decide(true, false) == Action::Long && decide(false, true) == Action::Short &&
                  decide(false, false) == Action::NoOpinion && decide(true, true) == Action::Conflict;
  return {"decide_truth_table", ok, ok ? "4 of 4 rows" : "truth table mismatch"};
}

CheckResult check_allocation(std::uint64_t seed) {
  Rng rng(seed);
  const Action actions[] = {Action::Long, Action::Short, Action::NoOpinion, Action::Conflict};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<TradeDecision> decisions(rng.below(12));
    int longs = 0, shorts = 0;
    for (std::size_t i = 0; i < decisions.size(); ++i) {
      decisions[i].symbol = fmt::format("X{}", i);
      decisions[i].action = actions[rng.below(4)];
      longs += decisions[i].action == Action::Long;
      shorts += decisions[i].action == Action::Short;
    }
    const auto p = allocate(Date{}, decisions);
    try {
      p.check_balance();
    } catch (const CheckFailure& e) {
      return {"allocation_balance", false, e.what()};
    }
    const bool trading = longs > 0 && shorts > 0;
    if (p.trading() != trading || (trading && (p.long_total != 0.5 || p.short_total != 0.5))) {
      return {"allocation_balance", false, fmt::format("trial {}: wrong side totals", trial)};
    }
  }
  return {"allocation_balance", true, "200 random decision sets"};
}

CheckResult check_zero_anchor(std::uint64_t seed) {
  Rng rng(seed);
  std::int64_t rows_checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    CloseRows rows;
    rows.minutes = 40;
    const int symbols = 2 + static_cast<int>(rng.below(6));
    for (int s = 0; s < symbols; ++s) {
      rows.symbols.push_back(fmt::format("X{}", s));
      double p = rng.uniform(5.0, 100.0);
      for (int m = 0; m < rows.minutes; ++m) {
        p *= std::exp(0.001 * rng.normal());
        rows.closes.push_back(p);
      }
    }
    for (int end_x : {-2, -5, -10, -30}) {
      const auto ex = build_day_examples(rows, end_x, false);
      const auto last = ex.observations.cols() - 1;
      if (ex.observations.cols() != rows.minutes + end_x) {
        return {"observation_zero_anchor", false, fmt::format("width {} for end_x {}", ex.observations.cols(), end_x)};
      }
      for (Eigen::Index i = 0; i < ex.observations.rows(); ++i) {
        ++rows_checked;
        if (ex.observations(i, last) != 0.0) {
          return {"observation_zero_anchor", false, fmt::format("trial {} row {} anchor {}", trial, i,
                                                                ex.observations(i, last))};
        }
      }
    }
  }
  return {"observation_zero_anchor", true, fmt::format("{} rows", rows_checked)};
}

}  // namespace

CheckResult check_network_gradient(const SelfcheckHooks& hooks, int instances, std::uint64_t seed) {
  double worst = 0.0;
  for (int k = 0; k < instances; ++k) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(k)}));
    auto net = Network::initialize({5, 4, 3, 2}, rng.next());
    for (auto& b : net.biases) b = 0.1 * random_matrix(rng, b.rows(), b.cols());
    const Matrix x = random_matrix(rng, 6, 5);
    const Matrix t = one_hot(random_labels(rng, 6));
    const auto analytic = hooks.nn_gradient(net, x, t).flatten();
    auto flat = net.flatten();
    std::vector<double> numeric(flat.size());
    Network probe = net;
    for (std::size_t i = 0; i < flat.size(); ++i) {
      const double saved = flat[i];
      flat[i] = saved + kStep;
      probe.assign(flat);
      const double up = nn_loss(probe, x, t);
      flat[i] = saved - kStep;
      probe.assign(flat);
      const double down = nn_loss(probe, x, t);
      flat[i] = saved;
      numeric[i] = (up - down) / (2.0 * kStep);
    }
    worst = std::max(worst, relative_error(analytic, numeric));
  }
  return {"network_gradient", worst <= 1e-5, fmt::format("{} instances, worst relative error {:.3e}", instances, worst)};
}

CheckResult check_logistic_gradient(const SelfcheckHooks& hooks, int instances, std::uint64_t seed) {
  double worst = 0.0;
  constexpr double l2 = 1e-3;
  for (int k = 0; k < instances; ++k) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(k)}));
    const Matrix x = random_matrix(rng, 10, 6);
    const auto y = random_labels(rng, 10);
    LogisticParams p{Vector(6), 0.3 * rng.normal()};
    for (Eigen::Index i = 0; i < p.weights.size(); ++i) p.weights[i] = 0.5 * rng.normal();
    const auto g = hooks.logistic_gradient(p, x, y, l2);
    std::vector<double> analytic(g.weights.data(), g.weights.data() + g.weights.size());
    analytic.push_back(g.bias);
    std::vector<double> numeric;
    for (Eigen::Index i = 0; i <= p.weights.size(); ++i) {
      auto probe = p;
      double& v = i < p.weights.size() ? probe.weights[i] : probe.bias;
      const double saved = v;
      v = saved + kStep;
      const double up = logistic_loss(probe, x, y, l2);
      v = saved - kStep;
      const double down = logistic_loss(probe, x, y, l2);
      numeric.push_back((up - down) / (2.0 * kStep));
    }
    worst = std::max(worst, relative_error(analytic, numeric));
  }
  return {"logistic_gradient", worst <= 1e-6,
          fmt::format("{} instances, worst relative error {:.3e}", instances, worst)};
}

std::vector<CheckResult> run_selfcheck(const SelfcheckHooks& hooks) {
  std::vector<CheckResult> out;
  auto guarded = [&](const char* name, auto&& fn) {
    try {
      out.push_back(fn());
    } catch (const std::exception& e) {
      out.push_back({name, false, e.what()});
    }
  };
  guarded("network_gradient", [&] { return check_network_gradient(hooks); });
  guarded("logistic_gradient", [&] { return check_logistic_gradient(hooks); });
  guarded("decide_truth_table", [] { return check_decide(); });
  guarded("allocation_balance", [] { return check_allocation(3); });
  guarded("observation_zero_anchor", [] { return check_zero_anchor(5); });
  return out;
}

}  // namespace mkteff
