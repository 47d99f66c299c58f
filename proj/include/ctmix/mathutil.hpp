#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace ctmix {

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

// log(sum exp(x_i)) without overflow; empty input yields -inf.
inline double logsumexp(std::span<const double> xs) {
  double m = neg_inf;
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

inline std::vector<double> linspace(double lo, double hi, int points) {
  std::vector<double> out(static_cast<std::size_t>(points));
  if (points == 1) {
    out[0] = lo;
    return out;
  }
  double step = (hi - lo) / (points - 1);
  for (int i = 0; i < points; ++i) out[static_cast<std::size_t>(i)] = lo + step * i;
  out.back() = hi;
  return out;
}

// Log-spaced grid; endpoints exact.
inline std::vector<double> logspace(double lo, double hi, int points) {
  std::vector<double> out(static_cast<std::size_t>(points));
  if (points == 1) {
    out[0] = lo;
    return out;
  }
  double llo = std::log(lo), lhi = std::log(hi);
  double step = (lhi - llo) / (points - 1);
  for (int i = 0; i < points; ++i)
    out[static_cast<std::size_t>(i)] = std::exp(llo + step * i);
  out.front() = lo;
  out.back() = hi;
  return out;
}

// Shortest round-trippable decimal rendering used for every numeric artifact.
inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

} // namespace ctmix
