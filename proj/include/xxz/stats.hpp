#pragma once

#include "xxz/core.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace xxz {

inline double mean(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean: empty input");
  long double acc = 0;
  for (double v : values) acc += v;
  return static_cast<double>(acc / values.size());
}

inline double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty input");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  if (values.size() % 2 == 1) return values[mid];
  const double hi = values[mid];
  const double lo = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lo + hi);
}

// Linearly interpolated quantile, q in [0, 1].
inline double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile: empty input");
  if (q < 0 || q > 1) throw std::invalid_argument("quantile: q outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1 - frac) + values[lo + 1] * frac;
}

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double rms = 0;  // root-mean-square residual
  Index n = 0;
};

inline LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("linear_fit: length mismatch");
  if (x.size() < 2) throw InsufficientDataError("linear_fit: need at least two points");
  const auto n = static_cast<double>(x.size());
  long double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const long double det = n * sxx - sx * sx;
  if (det == 0) throw std::invalid_argument("linear_fit: degenerate abscissae");
  LinearFit fit;
  fit.n = static_cast<Index>(x.size());
  fit.slope = static_cast<double>((n * sxy - sx * sy) / det);
  fit.intercept = static_cast<double>((sy - fit.slope * sx) / n);
  long double ss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss += r * r;
  }
  fit.rms = std::sqrt(static_cast<double>(ss / n));
  return fit;
}

// Geometric-mean level spacing of an ascending energy array; zero gaps are skipped.
inline double typical_level_spacing(std::span<const double> energies) {
  if (energies.size() < 2) throw std::invalid_argument("typical_level_spacing: need at least two levels");
  long double acc = 0;
  Index used = 0;
  for (std::size_t i = 0; i + 1 < energies.size(); ++i) {
    const double gap = energies[i + 1] - energies[i];
    if (gap < 0) throw std::invalid_argument("typical_level_spacing: energies not ascending");
    if (gap > 0) {
      acc += std::log(gap);
      ++used;
    }
  }
  if (used == 0) throw std::domain_error("typical_level_spacing: fully degenerate spectrum");
  return std::exp(static_cast<double>(acc / used));
}

}  // namespace xxz
