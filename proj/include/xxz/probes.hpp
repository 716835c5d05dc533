#pragma once

#include "xxz/core.hpp"
#include "xxz/spectrum.hpp"
#include "xxz/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace xxz {

// chi_n = sum_{m != n} w^2 M_nm^2 / (w^2 + mu^2)^2 with w = E_m - E_n.
// mu = 0 is the bare susceptibility; an exact resonance (w = 0, M_nm != 0)
// at mu = 0 yields +inf, which callers count rather than propagate blindly.
template <typename Scalar>
Scalar fidelity_susceptibility(const MatrixX<Scalar>& observable, const VectorX<Scalar>& energies,
                               Index n, Scalar cutoff = Scalar(0)) {
  const Index dim = energies.size();
  if (observable.rows() != dim || observable.cols() != dim)
    throw std::invalid_argument("fidelity_susceptibility: observable/energy size mismatch");
  if (n < 0 || n >= dim) throw std::invalid_argument("fidelity_susceptibility: state index out of range");
  if (cutoff < Scalar(0)) throw std::invalid_argument("fidelity_susceptibility: cutoff must be >= 0");
  const Scalar mu2 = cutoff * cutoff;
  Scalar chi = 0;
  for (Index m = 0; m < dim; ++m) {
    if (m == n) continue;
    const Scalar w = energies[m] - energies[n];
    const Scalar a = observable(n, m);
    if (w == Scalar(0)) {
      if (a != Scalar(0) && mu2 == Scalar(0)) return std::numeric_limits<Scalar>::infinity();
      continue;
    }
    const Scalar w2 = w * w;
    const Scalar denom = (w2 + mu2) * (w2 + mu2);
    chi += w2 * a * a / denom;
  }
  return chi;
}

template <typename Scalar>
VectorX<Scalar> all_susceptibilities(const MatrixX<Scalar>& observable, const VectorX<Scalar>& energies,
                                     Scalar cutoff = Scalar(0)) {
  VectorX<Scalar> chi(energies.size());
  for (Index n = 0; n < energies.size(); ++n)
    chi[n] = fidelity_susceptibility(observable, energies, n, cutoff);
  return chi;
}

struct SusceptibilityStats {
  double zeta = 0;      // mean of log chi over the used entries
  double chi_mean = 0;  // arithmetic mean over the used entries
  Index n_used = 0;
  Index n_zero = 0;
  Index n_infinite = 0;
};

// Typical (log-averaged) susceptibility over eigenstates and realizations.
// Zero and non-finite entries are excluded and counted, never folded into logs.
inline SusceptibilityStats typical_log_susceptibility(std::span<const double> chis) {
  SusceptibilityStats s;
  long double acc_log = 0, acc = 0;
  for (double c : chis) {
    if (c < 0) throw std::invalid_argument("typical_log_susceptibility: negative susceptibility");
    if (c == 0) {
      ++s.n_zero;
    } else if (!std::isfinite(c)) {
      ++s.n_infinite;
    } else {
      acc_log += std::log(c);
      acc += c;
      ++s.n_used;
    }
  }
  if (s.n_used == 0) throw std::invalid_argument("typical_log_susceptibility: no positive finite entries");
  s.zeta = static_cast<double>(acc_log / s.n_used);
  s.chi_mean = static_cast<double>(acc / s.n_used);
  return s;
}

// Log-binned density of squared matrix elements versus frequency.
// weight[b] accumulates M_nm^2 / D for |E_m - E_n| in [edges[b], edges[b+1]);
// density[b] = weight[b] / (2 width n_realizations), so that twice the integral
// over positive frequencies reproduces the accumulated weight per realization.
struct SpectralHistogram {
  std::vector<double> edges;
  std::vector<double> weight;
  std::vector<double> density;
  double underflow = 0;  // weight below edges.front()
  double overflow = 0;   // weight at or above edges.back()
  double dimension = 0;  // normalization D
  int n_realizations = 0;

  Index bins() const { return static_cast<Index>(weight.size()); }
  double center(Index b) const {
    return std::sqrt(edges[static_cast<std::size_t>(b)] * edges[static_cast<std::size_t>(b) + 1]);
  }
  double width(Index b) const {
    return edges[static_cast<std::size_t>(b) + 1] - edges[static_cast<std::size_t>(b)];
  }
  double total_weight() const {
    long double acc = underflow;
    for (double w : weight) acc += w;
    return static_cast<double>(acc + overflow);
  }
  void refresh_density() {
    density.resize(weight.size());
    for (Index b = 0; b < bins(); ++b)
      density[static_cast<std::size_t>(b)] =
          weight[static_cast<std::size_t>(b)] / (2.0 * width(b) * n_realizations);
  }
};

inline std::vector<double> log_spaced_edges(double lo, double hi, int bins_per_decade) {
  if (!(lo > 0) || !(hi > lo)) throw std::invalid_argument("log_spaced_edges: need 0 < lo < hi");
  if (bins_per_decade < 1) throw std::invalid_argument("log_spaced_edges: bins_per_decade must be >= 1");
  const double decades = std::log10(hi / lo);
  auto n_bins = static_cast<Index>(std::ceil(decades * bins_per_decade));
  std::vector<double> edges;
  while (true) {
    edges.clear();
    edges.reserve(static_cast<std::size_t>(n_bins) + 1);
    for (Index i = 0; i <= n_bins; ++i)
      edges.push_back(lo * std::pow(10.0, static_cast<double>(i) / bins_per_decade));
    if (edges.back() >= hi) break;
    ++n_bins;  // guard against pow rounding just below hi
  }
  return edges;
}

// Bin every ordered pair n != m at |E_m - E_n| with weight M_nm^2 / D.
// Rows may be restricted to an eigenstate window; columns always run over the
// full spectrum. Pairs outside the edge range land in the underflow/overflow
// sinks so no spectral weight is ever dropped.
template <typename Scalar>
SpectralHistogram spectral_histogram(const MatrixX<Scalar>& observable, const VectorX<Scalar>& energies,
                                     const std::vector<double>& edges, double dimension,
                                     std::span<const Index> rows = {}) {
  const Index dim = energies.size();
  if (observable.rows() != dim || observable.cols() != dim)
    throw std::invalid_argument("spectral_histogram: observable/energy size mismatch");
  if (edges.size() < 2 || !(edges.front() > 0) || !std::is_sorted(edges.begin(), edges.end()))
    throw std::invalid_argument("spectral_histogram: edges must be ascending and positive");
  if (!(dimension > 0)) throw std::invalid_argument("spectral_histogram: dimension must be positive");

  const auto n_bins = static_cast<std::size_t>(edges.size() - 1);
  std::vector<long double> acc(n_bins, 0.0L);
  long double under = 0, over = 0;
  const double lo = edges.front(), hi = edges.back();

  auto accumulate_row = [&](Index n) {
    for (Index m = 0; m < dim; ++m) {
      if (m == n) continue;
      const double w = std::abs(static_cast<double>(energies[m] - energies[n]));
      const double a = static_cast<double>(observable(n, m));
      const double x = a * a / dimension;
      if (w < lo) {
        under += x;
      } else if (w >= hi) {
        over += x;
      } else {
        const auto it = std::upper_bound(edges.begin(), edges.end(), w);
        acc[static_cast<std::size_t>(it - edges.begin()) - 1] += x;
      }
    }
  };
  if (rows.empty()) {
    for (Index n = 0; n < dim; ++n) accumulate_row(n);
  } else {
    for (Index n : rows) accumulate_row(n);
  }

  SpectralHistogram hist;
  hist.edges = edges;
  hist.weight.resize(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b) hist.weight[b] = static_cast<double>(acc[b]);
  hist.underflow = static_cast<double>(under);
  hist.overflow = static_cast<double>(over);
  hist.dimension = dimension;
  hist.n_realizations = 1;
  hist.refresh_density();
  return hist;
}

struct SumRuleReport {
  double lhs = 0;       // integrated spectral weight, sinks included
  double rhs = 0;       // (1/D) sum_n (1/4 - M_nn^2)
  double residual = 0;  // |lhs - rhs|
};

// The accumulated spectral weight must equal the averaged decaying part of the
// probe, exactly as an algebraic identity of the decomposition.
template <typename Scalar>
SumRuleReport sum_rule_report(const SpectralHistogram& hist, const MatrixX<Scalar>& observable,
                              std::span<const Index> rows = {}) {
  long double lhs = hist.underflow;
  for (double w : hist.weight) lhs += w;
  lhs += hist.overflow;

  long double rhs = 0;
  auto add_state = [&](Index n) {
    const long double d = static_cast<long double>(observable(n, n));
    rhs += (0.25L - d * d) / hist.dimension;
  };
  if (rows.empty()) {
    for (Index n = 0; n < observable.rows(); ++n) add_state(n);
  } else {
    for (Index n : rows) add_state(n);
  }

  SumRuleReport report;
  report.lhs = static_cast<double>(lhs);
  report.rhs = static_cast<double>(rhs);
  report.residual = std::abs(static_cast<double>(lhs - rhs));
  return report;
}

// Geometric-mean spectral curve over disorder realizations.
struct SpectralCurve {
  std::vector<double> edges;
  std::vector<double> density;  // exp(mean log density) over realizations with signal; 0 if none
  std::vector<int> n_empty;     // realizations with no weight in the bin
  int n_realizations = 0;
};

inline SpectralCurve typical_spectral_histogram(std::span<const SpectralHistogram> hists) {
  if (hists.size() < 2)
    throw std::invalid_argument("typical_spectral_histogram: need at least two realizations");
  const auto& edges = hists.front().edges;
  for (const auto& h : hists)
    if (h.edges != edges) throw std::invalid_argument("typical_spectral_histogram: mismatched bin edges");

  SpectralCurve curve;
  curve.edges = edges;
  curve.n_realizations = static_cast<int>(hists.size());
  const std::size_t n_bins = edges.size() - 1;
  curve.density.assign(n_bins, 0.0);
  curve.n_empty.assign(n_bins, 0);
  for (std::size_t b = 0; b < n_bins; ++b) {
    long double acc = 0;
    int used = 0;
    for (const auto& h : hists) {
      const double d = h.density[b];
      if (d > 0) {
        acc += std::log(d);
        ++used;
      } else {
        ++curve.n_empty[b];
      }
    }
    if (used > 0) curve.density[b] = std::exp(static_cast<double>(acc / used));
  }
  return curve;
}

struct ConservedFraction {
  double value = 0;  // 4 exp(<log <n|S^z|n>^2>); 1 when fully polarized
  Index n_used = 0;
  Index n_zero = 0;
};

inline ConservedFraction conserved_fraction(std::span<const double> diag_sz) {
  if (diag_sz.empty()) throw std::invalid_argument("conserved_fraction: empty input");
  ConservedFraction f;
  long double acc = 0;
  for (double v : diag_sz) {
    if (v == 0) {
      ++f.n_zero;
    } else {
      acc += std::log(v * v);
      ++f.n_used;
    }
  }
  if (f.n_used == 0) throw std::domain_error("conserved_fraction: all probe expectations vanish");
  f.value = 4.0 * std::exp(static_cast<double>(acc / f.n_used));
  return f;
}

struct GapRatios {
  std::vector<double> ratios;  // r_n = min(d_n, d_{n+1}) / max(d_n, d_{n+1}), n = 1 .. dim-2
  Index n_degenerate = 0;      // entries touching an exactly zero gap
};

inline GapRatios gap_ratios(std::span<const double> energies) {
  const auto dim = static_cast<Index>(energies.size());
  if (dim < 3) throw std::invalid_argument("gap_ratios: need at least three levels");
  GapRatios g;
  g.ratios.reserve(static_cast<std::size_t>(dim) - 2);
  for (Index n = 1; n + 1 < dim; ++n) {
    const double d0 = energies[static_cast<std::size_t>(n)] - energies[static_cast<std::size_t>(n) - 1];
    const double d1 = energies[static_cast<std::size_t>(n) + 1] - energies[static_cast<std::size_t>(n)];
    if (d0 < 0 || d1 < 0) throw std::invalid_argument("gap_ratios: energies not ascending");
    const double mn = std::min(d0, d1), mx = std::max(d0, d1);
    if (mn == 0) ++g.n_degenerate;
    g.ratios.push_back(mx == 0 ? 0.0 : mn / mx);
  }
  return g;
}

// Normalized density over uniform bins; integrates to one.
struct Histogram1D {
  double lo = 0;
  double bin_width = 0;
  std::vector<Index> counts;
  std::vector<double> density;
  Index n_samples = 0;
  double center(Index b) const { return lo + (static_cast<double>(b) + 0.5) * bin_width; }
};

inline Histogram1D zeta_distribution(std::span<const double> zetas, double bin_width = 0.5) {
  if (zetas.empty()) throw std::invalid_argument("zeta_distribution: empty input");
  if (!(bin_width > 0)) throw std::invalid_argument("zeta_distribution: bin width must be positive");
  const auto [mn, mx] = std::minmax_element(zetas.begin(), zetas.end());
  Histogram1D h;
  h.bin_width = bin_width;
  h.lo = std::floor(*mn / bin_width) * bin_width;
  const auto n_bins = static_cast<Index>(std::floor((*mx - h.lo) / bin_width)) + 1;
  h.counts.assign(static_cast<std::size_t>(n_bins), 0);
  for (double z : zetas) {
    auto b = static_cast<Index>(std::floor((z - h.lo) / bin_width));
    b = std::clamp<Index>(b, 0, n_bins - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  }
  h.n_samples = static_cast<Index>(zetas.size());
  h.density.resize(h.counts.size());
  for (std::size_t b = 0; b < h.counts.size(); ++b)
    h.density[b] = static_cast<double>(h.counts[b]) / (static_cast<double>(h.n_samples) * bin_width);
  return h;
}

}  // namespace xxz
