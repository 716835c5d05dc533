#pragma once

#include "xxz/basis.hpp"
#include "xxz/core.hpp"

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace xxz {

// First-order susceptibility of a z-product state at strong disorder: only the
// two bonds touching the probe site contribute, and only when the neighbor is
// anti-aligned. Periodic neighbor indexing.
inline double first_order_chi(SpinConfig config, std::span<const double> fields, double disorder,
                              int site) {
  const int length = config.length;
  if (!(disorder > 0)) throw std::invalid_argument("first_order_chi: disorder strength must be positive");
  if (static_cast<int>(fields.size()) != length)
    throw std::invalid_argument("first_order_chi: field array length mismatch");
  if (site < 0 || site >= length) throw std::invalid_argument("first_order_chi: site out of range");

  const int neighbors[2] = {(site + 1) % length, (site + length - 1) % length};
  double chi = 0;
  for (int nb : neighbors) {
    const double ds = sz_at(config, site) - sz_at(config, nb);
    if (ds == 0) continue;
    const double dh = fields[static_cast<std::size_t>(site)] - fields[static_cast<std::size_t>(nb)];
    if (dh == 0) throw std::domain_error("first_order_chi: exact field resonance on an anti-aligned bond");
    chi += ds * ds / (dh * dh * dh * dh);
  }
  return chi / (4.0 * disorder * disorder);
}

// Probability that step i of growing a polarized region is blocked by the
// zero-magnetization constraint; clamped to zero once the sector runs out of
// aligned spins.
inline double sector_probability(int length, int i) {
  if (length < 2 || length % 2 != 0)
    throw std::invalid_argument("sector_probability: length must be even and >= 2");
  if (i < 1) throw std::invalid_argument("sector_probability: step index must be >= 1");
  const double half = length / 2.0;
  const double a = half - (2 * i - 1);
  const double c = half - 2 * i;
  if (a <= 0 || c <= 0) return 0.0;
  return (a / (length - (2 * i - 1))) * (c / (length - 2 * i));
}

// Finite-size prefactor of -log W in the typical log-susceptibility:
// C(L) = sum_{i=1}^{L/4} [prod_{j<i} p_j] (1 - p_i) 2i, with p_0 = 1.
struct PrefactorCurve {
  int length = 0;
  double value = 0;
  std::vector<double> terms;  // contribution of each growth step
};

inline PrefactorCurve log_w_prefactor(int length) {
  if (length < 4 || length % 2 != 0)
    throw std::invalid_argument("log_w_prefactor: length must be even and >= 4");
  PrefactorCurve curve;
  curve.length = length;
  double survive = 1.0;  // p_0 = 1
  for (int i = 1; i <= length / 4; ++i) {
    const double p = sector_probability(length, i);
    const double term = survive * (1.0 - p) * 2.0 * i;
    curve.terms.push_back(term);
    curve.value += term;
    survive *= p;
  }
  return curve;
}

// Unconstrained limit: every growth step survives with probability 1/4, and
// sum_i (3/4)(1/4)^{i-1} 2i = 8/3.
inline double unconstrained_prefactor(int n_terms = 50) {
  if (n_terms < 1) throw std::invalid_argument("unconstrained_prefactor: need at least one term");
  double survive = 1.0, value = 0.0;
  for (int i = 1; i <= n_terms; ++i) {
    value += survive * 0.75 * 2.0 * i;
    survive *= 0.25;
  }
  return value;
}

// Strong-disorder prediction zeta = B - C(L) log W.
inline double asymptote_zeta(double disorder, int length, double intercept) {
  if (!(disorder > 0)) throw std::invalid_argument("asymptote_zeta: disorder strength must be positive");
  return intercept - log_w_prefactor(length).value * std::log(disorder);
}

}  // namespace xxz
