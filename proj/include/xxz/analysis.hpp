#pragma once

#include "xxz/core.hpp"
#include "xxz/probes.hpp"
#include "xxz/stats.hpp"

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace xxz {

struct SlopeFit {
  double slope = 0;
  double intercept = 0;
  double omega_lo = 0;
  double omega_hi = 0;
  double rms = 0;
  Index n_bins = 0;
};

// Least-squares line through (log omega_center, log density) using bins with
// signal inside the window. Throws InsufficientDataError below four bins.
inline SlopeFit loglog_slope(const SpectralHistogram& hist, double omega_lo, double omega_hi) {
  if (!(omega_lo > 0) || !(omega_lo < omega_hi))
    throw std::invalid_argument("loglog_slope: need 0 < omega_lo < omega_hi");
  std::vector<double> xs, ys;
  for (Index b = 0; b < hist.bins(); ++b) {
    const double c = hist.center(b);
    const double d = hist.density[static_cast<std::size_t>(b)];
    if (d > 0 && c >= omega_lo && c <= omega_hi) {
      xs.push_back(std::log(c));
      ys.push_back(std::log(d));
    }
  }
  if (xs.size() < 4)
    throw InsufficientDataError("loglog_slope: fewer than four populated bins in window");
  const LinearFit fit = linear_fit(xs, ys);
  return {fit.slope, fit.intercept, omega_lo, omega_hi, fit.rms, fit.n};
}

// Median over window bins of density * omega * W; only defined when the window
// actually shows inverse-frequency scaling.
inline double one_over_omega_prefactor(const SpectralHistogram& hist, double disorder, double omega_lo,
                                       double omega_hi) {
  const SlopeFit fit = loglog_slope(hist, omega_lo, omega_hi);
  if (fit.slope < -1.3 || fit.slope > -0.7)
    throw NotInRegimeError("one_over_omega_prefactor: spectral slope " + std::to_string(fit.slope) +
                           " outside the 1/omega regime");
  std::vector<double> values;
  for (Index b = 0; b < hist.bins(); ++b) {
    const double c = hist.center(b);
    const double d = hist.density[static_cast<std::size_t>(b)];
    if (d > 0 && c >= omega_lo && c <= omega_hi) values.push_back(d * c * disorder);
  }
  return median(std::move(values));
}

struct ThoulessEstimate {
  enum class Method { max_curvature, sum_rule };
  double omega_th = 0;
  Method method = Method::max_curvature;
  double alpha_fit = std::numeric_limits<double>::quiet_NaN();  // from omega_th(W) ~ e^{-alpha W} fits
};

// Crossover frequency located at the point of strongest downward curvature of
// log density vs log omega. A sliding cubic fit smooths the binned curve before
// differentiating; a pure power law has no curvature maximum.
inline ThoulessEstimate thouless_max_curvature(const SpectralHistogram& hist,
                                               double omega_max = std::numeric_limits<double>::infinity(),
                                               double curvature_threshold = 0.05) {
  std::vector<double> xs, ys;
  for (Index b = 0; b < hist.bins(); ++b) {
    const double c = hist.center(b);
    const double d = hist.density[static_cast<std::size_t>(b)];
    if (d > 0 && c <= omega_max) {
      xs.push_back(std::log(c));
      ys.push_back(std::log(d));
    }
  }
  const auto n = static_cast<Index>(xs.size());
  if (n < 10) throw InsufficientDataError("thouless_max_curvature: fewer than ten populated bins");

  constexpr Index half = 3;  // seven-point window
  double best = -std::numeric_limits<double>::infinity();
  Index best_i = -1;
  for (Index i = half; i + half < n; ++i) {
    // cubic least squares in centered coordinates; y'' at the center is 2 c2
    long double s[7] = {0, 0, 0, 0, 0, 0, 0};
    long double t0 = 0, t1 = 0, t2 = 0, t3 = 0;
    for (Index j = i - half; j <= i + half; ++j) {
      const long double dx = xs[static_cast<std::size_t>(j)] - xs[static_cast<std::size_t>(i)];
      long double p = 1;
      for (int k = 0; k <= 6; ++k, p *= dx) s[k] += p;
      const long double y = ys[static_cast<std::size_t>(j)];
      t0 += y;
      t1 += y * dx;
      t2 += y * dx * dx;
      t3 += y * dx * dx * dx;
    }
    Eigen::Matrix<long double, 4, 4> normal;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) normal(r, c) = s[r + c];
    Eigen::Matrix<long double, 4, 1> rhs;
    rhs << t0, t1, t2, t3;
    const Eigen::Matrix<long double, 4, 1> coeff = normal.fullPivLu().solve(rhs);
    const double concavity = static_cast<double>(-2.0L * coeff[2]);  // downward curvature positive
    if (concavity > best) {
      best = concavity;
      best_i = i;
    }
  }
  if (best_i < 0 || best < curvature_threshold)
    throw NotFoundError("thouless_max_curvature: no interior curvature maximum");
  return {std::exp(xs[static_cast<std::size_t>(best_i)]), ThoulessEstimate::Method::max_curvature,
          std::numeric_limits<double>::quiet_NaN()};
}

// Spectral-weight budget: 2 int_{w_th}^{w_uv} C/(W w) dw = 1/4
// => w_th = w_uv exp(-W / (8C)).
inline double thouless_from_prefactor(double prefactor, double disorder, double omega_uv) {
  if (!(prefactor > 0)) throw NotInRegimeError("thouless_from_prefactor: prefactor unavailable");
  return omega_uv * std::exp(-disorder / (8.0 * prefactor));
}

// Decay constant alpha in w_th = w_uv e^{-alpha W}.
inline double decay_constant(double prefactor) {
  if (!(prefactor > 0)) throw NotInRegimeError("decay_constant: prefactor unavailable");
  return 1.0 / (8.0 * prefactor);
}

inline double thouless_sum_rule(const SpectralHistogram& hist, double disorder, double omega_uv,
                                double omega_lo) {
  const double c = one_over_omega_prefactor(hist, disorder, omega_lo, omega_uv);
  return thouless_from_prefactor(c, disorder, omega_uv);
}

// Fraction of the accumulated spectral weight above omega_uv; the straddled
// bin contributes pro rata, the overflow sink counts in full.
inline double uv_weight_fraction(const SpectralHistogram& hist, double omega_uv) {
  if (omega_uv < hist.edges.front() || omega_uv > hist.edges.back())
    throw std::invalid_argument("uv_weight_fraction: omega_uv outside the binned range");
  long double above = hist.overflow;
  for (Index b = 0; b < hist.bins(); ++b) {
    const double lo = hist.edges[static_cast<std::size_t>(b)];
    const double hi = hist.edges[static_cast<std::size_t>(b) + 1];
    const double w = hist.weight[static_cast<std::size_t>(b)];
    if (lo >= omega_uv)
      above += w;
    else if (hi > omega_uv)
      above += w * (hi - omega_uv) / (hi - lo);
  }
  const double total = hist.total_weight();
  return total > 0 ? static_cast<double>(above) / total : 0.0;
}

// W*(L) = (L log 2 - log ratio_uv) / alpha.
inline double critical_disorder(double length, double alpha, double ratio_uv) {
  if (!(alpha > 0)) throw std::invalid_argument("critical_disorder: alpha must be positive");
  if (!(ratio_uv >= 1)) throw std::invalid_argument("critical_disorder: ratio_uv must be >= 1");
  return (length * std::log(2.0) - std::log(ratio_uv)) / alpha;
}

// Predicted tail slope of the log-susceptibility distribution:
// level repulsion Q(s) ~ s^beta and spectral divergence |f(s)|^2 ~ s^-alpha
// combine to P(z) ~ exp[-z (1+beta)/(2+alpha)].
inline double tail_slope_prediction(double beta, double alpha) {
  if (beta < -1) throw std::invalid_argument("tail_slope_prediction: beta must be >= -1");
  if (alpha < 0) throw std::invalid_argument("tail_slope_prediction: alpha must be >= 0");
  return (1.0 + beta) / (2.0 + alpha);
}

struct TailModel {
  double beta = 1;   // level-repulsion exponent
  double alpha = 0;  // spectral-divergence exponent
  double predicted_slope() const { return tail_slope_prediction(beta, alpha); }
};

struct TailFit {
  double slope = 0;
  double intercept = 0;
  double z_lo = 0;
  double z_hi = 0;
  double rms = 0;
  Index n_bins = 0;
};

// Tail of P(z): least squares on log density from the 95th percentile up to the
// last bin holding at least min_count samples.
inline TailFit fit_zeta_tail(std::span<const double> zetas, double bin_width = 0.5, Index min_count = 20) {
  const Histogram1D hist = zeta_distribution(zetas, bin_width);
  const double z95 = quantile(std::vector<double>(zetas.begin(), zetas.end()), 0.95);
  Index hi_bin = -1;
  for (Index b = 0; b < static_cast<Index>(hist.counts.size()); ++b)
    if (hist.counts[static_cast<std::size_t>(b)] >= min_count) hi_bin = b;
  std::vector<double> xs, ys;
  for (Index b = 0; b <= hi_bin; ++b) {
    if (hist.center(b) < z95) continue;
    if (hist.counts[static_cast<std::size_t>(b)] < 1) continue;
    xs.push_back(hist.center(b));
    ys.push_back(std::log(hist.density[static_cast<std::size_t>(b)]));
  }
  if (xs.size() < 3) throw InsufficientDataError("fit_zeta_tail: fewer than three populated tail bins");
  const LinearFit fit = linear_fit(xs, ys);
  return {fit.slope, fit.intercept, xs.front(), xs.back(), fit.rms, fit.n};
}

struct PeakEstimate {
  double location = 0;  // disorder strength of the maximum
  Index grid_index = 0;
  double value = 0;
};

// Location of an interior maximum on a disorder grid, refined by a quadratic
// fit in (log W, value) around the grid argmax.
inline PeakEstimate peak_location(std::span<const double> disorders, std::span<const double> values,
                                  Index half_window = 2) {
  if (disorders.size() != values.size() || disorders.size() < 3)
    throw std::invalid_argument("peak_location: need matching grids with at least three points");
  const auto n = static_cast<Index>(values.size());
  Index imax = 0;
  for (Index i = 1; i < n; ++i)
    if (values[static_cast<std::size_t>(i)] > values[static_cast<std::size_t>(imax)]) imax = i;

  const Index lo = std::max<Index>(0, imax - half_window);
  const Index hi = std::min<Index>(n - 1, imax + half_window);
  PeakEstimate peak{disorders[static_cast<std::size_t>(imax)], imax, values[static_cast<std::size_t>(imax)]};
  if (hi - lo + 1 < 3) return peak;

  // quadratic y = a x^2 + b x + c on x = log W
  long double s0 = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0, t0 = 0, t1 = 0, t2 = 0;
  for (Index i = lo; i <= hi; ++i) {
    const long double x = std::log(disorders[static_cast<std::size_t>(i)]);
    const long double y = values[static_cast<std::size_t>(i)];
    s0 += 1;
    s1 += x;
    s2 += x * x;
    s3 += x * x * x;
    s4 += x * x * x * x;
    t0 += y;
    t1 += y * x;
    t2 += y * x * x;
  }
  Eigen::Matrix<long double, 3, 3> normal;
  normal << s0, s1, s2, s1, s2, s3, s2, s3, s4;
  Eigen::Matrix<long double, 3, 1> rhs;
  rhs << t0, t1, t2;
  const Eigen::Matrix<long double, 3, 1> coeff = normal.fullPivLu().solve(rhs);
  const double a = static_cast<double>(coeff[2]);
  const double b = static_cast<double>(coeff[1]);
  if (a < 0) {
    const double x_lo = std::log(disorders[static_cast<std::size_t>(lo)]);
    const double x_hi = std::log(disorders[static_cast<std::size_t>(hi)]);
    const double vertex = std::clamp(-b / (2 * a), x_lo, x_hi);
    peak.location = std::exp(vertex);
  }
  return peak;
}

}  // namespace xxz
