#pragma once

// Independent reference computations. They follow the definitions literally, in
// long double, and share no code with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace oracle {

using Path = std::vector<double>;

// Mean one-minute simple return over symbols; minute 0 has none and is 0.
inline std::vector<long double> universe_mean(const std::vector<Path>& symbols) {
  const std::size_t minutes = symbols.front().size();
  std::vector<long double> mean(minutes, 0.0L);
  for (std::size_t m = 1; m < minutes; ++m) {
    long double s = 0.0L;
    for (const auto& p : symbols) s += static_cast<long double>(p[m]) / p[m - 1] - 1.0L;
    mean[m] = s / symbols.size();
  }
  return mean;
}

// Compounds gross returns of minutes first..last one at a time, in forward order.
inline long double compound(const Path& closes, int first, int last) {
  long double c = 1.0L;
  for (int m = first; m <= last; ++m) c *= 1.0L + (static_cast<long double>(closes[m]) / closes[m - 1] - 1.0L);
  return c;
}

inline long double compound(const std::vector<long double>& returns, int first, int last) {
  long double c = 1.0L;
  for (int m = first; m <= last; ++m) c *= 1.0L + returns[m];
  return c;
}

// obs[k] = -[(C_sym(k->E) - 1) - (C_univ(k->E) - 1)], E = minutes + end_x - 1.
inline std::vector<long double> observation(const Path& closes, const std::vector<long double>& mean, int end_x) {
  const int e = static_cast<int>(closes.size()) + end_x - 1;
  std::vector<long double> out(e + 1);
  for (int k = 0; k <= e; ++k) {
    const long double sym = compound(closes, k + 1, e);
    const long double uni = compound(mean, k + 1, e);
    out[k] = -((sym - 1.0L) - (uni - 1.0L));
  }
  return out;
}

// Relative return from the close of minute E+1 to the last close.
inline long double forward(const Path& closes, const std::vector<long double>& mean, int end_x) {
  const int last = static_cast<int>(closes.size()) - 1;
  const int entry = static_cast<int>(closes.size()) + end_x;
  return (compound(closes, entry + 1, last) - 1.0L) - (compound(mean, entry + 1, last) - 1.0L);
}

// Equal-weight long/short day in bps: half the capital split over each side.
inline long double long_short_bps(const std::vector<double>& long_returns, const std::vector<double>& short_returns) {
  if (long_returns.empty() || short_returns.empty()) return 0.0L;
  long double l = 0.0L, s = 0.0L;
  for (double r : long_returns) l += (0.5L / long_returns.size()) * r;
  for (double r : short_returns) s += (0.5L / short_returns.size()) * r;
  return 1e4L * (l - s);
}

// Scale for comparing forward returns: the size of the two terms before they cancel.
inline long double forward_scale(const Path& closes, const std::vector<long double>& mean, int end_x) {
  const int last = static_cast<int>(closes.size()) - 1;
  const int entry = static_cast<int>(closes.size()) + end_x;
  return std::abs(compound(closes, entry + 1, last) - 1.0L) + std::abs(compound(mean, entry + 1, last) - 1.0L);
}

inline std::vector<long double> cumulative(const std::vector<double>& bps) {
  std::vector<long double> out;
  for (std::size_t k = 0; k < bps.size(); ++k) {
    long double c = 1.0L;
    for (std::size_t i = 0; i <= k; ++i) c *= 1.0L + bps[i] / 1e4L;
    out.push_back(c - 1.0L);
  }
  return out;
}

inline std::vector<long double> smooth(const std::vector<double>& v, int window) {
  const int n = static_cast<int>(v.size());
  std::vector<long double> out(n);
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - window / 2);
    const int hi = std::min(n - 1, i + window - window / 2 - 1);
    long double s = 0.0L;
    for (int j = lo; j <= hi; ++j) s += v[j];
    out[i] = s / (hi - lo + 1);
  }
  return out;
}

// Per-entry size of the two compounded terms an observation is the difference of.
inline std::vector<long double> observation_scale(const Path& closes, const std::vector<long double>& mean,
                                                  int end_x) {
  const int e = static_cast<int>(closes.size()) + end_x - 1;
  std::vector<long double> out(e + 1);
  for (int k = 0; k <= e; ++k) {
    out[k] = std::abs(compound(closes, k + 1, e) - 1.0L) + std::abs(compound(mean, k + 1, e) - 1.0L);
  }
  return out;
}

// |a - b| over the norm of `scale`: relative error of a difference, before cancellation.
template <typename A, typename B>
double scaled_error(const A& a, const B& b, const std::vector<long double>& scale) {
  long double diff = 0.0L, ns = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const long double d = static_cast<long double>(a[i]) - static_cast<long double>(b[i]);
    diff += d * d;
    ns += scale[i] * scale[i];
  }
  return ns == 0.0L ? static_cast<double>(std::sqrt(diff)) : static_cast<double>(std::sqrt(diff / ns));
}

// Relative error between vectors, measured against the larger norm.
template <typename A, typename B>
double norm_relative(const A& a, const B& b) {
  long double diff = 0.0L, na = 0.0L, nb = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const long double x = a[i], y = b[i];
    diff += (x - y) * (x - y);
    na += x * x;
    nb += y * y;
  }
  const long double scale = std::sqrt(std::max(na, nb));
  return scale == 0.0L ? static_cast<double>(std::sqrt(diff)) : static_cast<double>(std::sqrt(diff) / scale);
}

}  // namespace oracle
