#include "xxz/analysis.hpp"

#include "doctest.h"

#include <cmath>
#include <random>

using namespace xxz;

namespace {

// histogram whose density follows a prescribed curve exactly
SpectralHistogram synthetic_histogram(double lo, double hi, int bins_per_decade,
                                      const std::function<double(double)>& density_of) {
  SpectralHistogram hist;
  hist.edges = log_spaced_edges(lo, hi, bins_per_decade);
  hist.dimension = 1.0;
  hist.n_realizations = 1;
  hist.weight.resize(hist.edges.size() - 1);
  for (Index b = 0; b < hist.bins(); ++b)
    hist.weight[static_cast<std::size_t>(b)] = density_of(hist.center(b)) * 2.0 * hist.width(b);
  hist.refresh_density();
  return hist;
}

}  // namespace

TEST_CASE("log-log slope recovers exact power laws") {
  const auto inverse = synthetic_histogram(1e-4, 10.0, 20, [](double w) { return 0.3 / w; });
  CHECK(loglog_slope(inverse, 1e-3, 1.0).slope == doctest::Approx(-1.0).epsilon(1e-6));
  const auto diffusive = synthetic_histogram(1e-4, 10.0, 20, [](double w) { return 2.0 / std::sqrt(w); });
  CHECK(loglog_slope(diffusive, 1e-3, 1.0).slope == doctest::Approx(-0.5).epsilon(1e-6));
  CHECK_THROWS_AS(loglog_slope(inverse, 1e-3, 1.35e-3), InsufficientDataError);
  CHECK_THROWS_AS(loglog_slope(inverse, -1.0, 1.0), std::invalid_argument);
}

TEST_CASE("inverse-frequency prefactor round-trips") {
  const double disorder = 2.0;
  const auto hist = synthetic_histogram(1e-5, 1.0, 20,
                                        [&](double w) { return 0.0179 / (disorder * w); });
  CHECK(one_over_omega_prefactor(hist, disorder, 1e-4, 0.05) == doctest::Approx(0.0179).epsilon(1e-12));
  const auto flat = synthetic_histogram(1e-5, 1.0, 20, [](double) { return 1.0; });
  CHECK_THROWS_AS(one_over_omega_prefactor(flat, disorder, 1e-4, 0.05), NotInRegimeError);
}

TEST_CASE("max-curvature Thouless frequency finds a crossover") {
  const double omega_0 = 1e-3;
  const auto crossover = synthetic_histogram(1e-6, 1.0, 20, [&](double w) {
    return 1.0 / (1.0 + w / omega_0);  // plateau, then 1/w
  });
  const auto est = thouless_max_curvature(crossover);
  // within one bin width on the log axis
  CHECK(std::abs(std::log10(est.omega_th / omega_0)) <= 1.0 / 20.0 + 1e-12);

  const auto pure = synthetic_histogram(1e-6, 1.0, 20, [](double w) { return 0.5 / w; });
  CHECK_THROWS_AS(thouless_max_curvature(pure), NotFoundError);

  const auto narrow = synthetic_histogram(1e-2, 2e-2, 10, [](double) { return 1.0; });
  CHECK_THROWS_AS(thouless_max_curvature(narrow), InsufficientDataError);
}

TEST_CASE("sum-rule Thouless frequency in closed form") {
  CHECK(decay_constant(0.0179) == doctest::Approx(6.98).epsilon(0.001));
  CHECK(decay_constant(2 * 0.0179) == doctest::Approx(0.5 * decay_constant(0.0179)).epsilon(1e-15));

  const double omega_uv = 0.1 / 3.0;
  const double omega_th = thouless_from_prefactor(0.0179, 3.0, omega_uv);
  CHECK(omega_th == doctest::Approx(omega_uv * std::exp(-20.949)).epsilon(1e-3));
  CHECK(omega_th == doctest::Approx(2.7e-11).epsilon(0.05));

  // the closed form satisfies its defining spectral-weight budget identically
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> uni(0.5, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double c = 0.01 * uni(rng), w = 3.0 * uni(rng), uv = 0.05 * uni(rng);
    const double th = thouless_from_prefactor(c, w, uv);
    const double integral = 2.0 * (c / w) * std::log(uv / th);
    CHECK(integral == doctest::Approx(0.25).epsilon(1e-12));
  }

  const auto hist = synthetic_histogram(1e-6, 1.0, 20, [](double w) { return 0.0179 / (2.0 * w); });
  CHECK(thouless_sum_rule(hist, 2.0, 0.05, 1e-4) ==
        doctest::Approx(0.05 * std::exp(-2.0 / (8 * 0.0179))).epsilon(1e-9));
}

TEST_CASE("uv weight fraction") {
  SpectralHistogram hist;
  hist.edges = {0.1, 1.0, 10.0};
  hist.weight = {0.3, 0.1};
  hist.dimension = 1.0;
  hist.n_realizations = 1;
  hist.refresh_density();
  CHECK(uv_weight_fraction(hist, 1.0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(uv_weight_fraction(hist, 10.0) == doctest::Approx(0.0).epsilon(1e-14));
  // pro-rata share of the straddled bin
  CHECK(uv_weight_fraction(hist, 0.55) == doctest::Approx((0.3 * 0.5 + 0.1) / 0.4).epsilon(1e-12));
  CHECK_THROWS_AS(uv_weight_fraction(hist, 0.01), std::invalid_argument);
  hist.overflow = 0.2;
  CHECK(uv_weight_fraction(hist, 10.0) == doctest::Approx(0.2 / 0.6).epsilon(1e-14));
}

TEST_CASE("critical disorder prediction") {
  CHECK(critical_disorder(0, 6.98, 1.0) == 0.0);
  CHECK(critical_disorder(18, 6.98, 1.0) == doctest::Approx(1.787).epsilon(1e-3));
  const double slope = std::log(2.0) / 6.98;
  CHECK(slope == doctest::Approx(0.0993).epsilon(1e-3));
  double prev = 0;
  for (int length : {4, 8, 12, 16, 20}) {
    const double w = critical_disorder(length, 6.98, 2.0);
    CHECK(critical_disorder(length, 6.98, 1.0) == doctest::Approx(length * slope).epsilon(1e-12));
    CHECK(w > prev);
    prev = w;
  }
  CHECK_THROWS_AS(critical_disorder(10, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(critical_disorder(10, 6.98, 0.5), std::invalid_argument);
}

TEST_CASE("tail slope prediction") {
  CHECK(tail_slope_prediction(1, 0) == 1.0);
  CHECK(tail_slope_prediction(0, 0) == 0.5);
  CHECK(tail_slope_prediction(0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(TailModel{0, 1}.predicted_slope() == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(tail_slope_prediction(-1.5, 0), std::invalid_argument);
  CHECK_THROWS_AS(tail_slope_prediction(1, -0.1), std::invalid_argument);
}

TEST_CASE("tail fit recovers a synthetic exponential rate") {
  std::mt19937_64 rng(5);
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> zs;
  for (int i = 0; i < 200000; ++i) zs.push_back(expo(rng));
  const TailFit fit = fit_zeta_tail(zs, 0.5);
  CHECK(fit.slope == doctest::Approx(-1.0).epsilon(0.05));
  CHECK(fit.z_lo >= quantile(zs, 0.95) - 0.5);
  CHECK_THROWS_AS(fit_zeta_tail(std::vector<double>{1.0, 1.0, 1.0}, 0.5), InsufficientDataError);
}

TEST_CASE("peak location with quadratic refinement") {
  std::vector<double> ws, values;
  const double w_peak = 2.6;
  for (int i = 0; i < 20; ++i) {
    const double w = 0.5 * std::pow(30.0, i / 19.0);
    ws.push_back(w);
    values.push_back(10.0 - 1.5 * std::pow(std::log(w / w_peak), 2));
  }
  const PeakEstimate peak = peak_location(ws, values);
  CHECK(peak.location == doctest::Approx(w_peak).epsilon(0.01));
  CHECK(values[static_cast<std::size_t>(peak.grid_index)] ==
        *std::max_element(values.begin(), values.end()));

  // monotone data peaks at the boundary grid point
  std::vector<double> rising(ws.size());
  for (std::size_t i = 0; i < ws.size(); ++i) rising[i] = static_cast<double>(i);
  CHECK(peak_location(ws, rising).grid_index == static_cast<Index>(ws.size()) - 1);
  CHECK_THROWS_AS(peak_location(std::vector<double>{1.0}, std::vector<double>{1.0}),
                  std::invalid_argument);
}
