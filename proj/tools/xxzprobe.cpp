// Command-line surface: run disorder sweeps, aggregate records, fit the
// derived quantities and print the analytic strong-disorder oracle.

#include "xxz/analysis.hpp"
#include "xxz/basis.hpp"
#include "xxz/disorder.hpp"
#include "xxz/model.hpp"
#include "xxz/probes.hpp"
#include "xxz/runner.hpp"
#include "xxz/spectrum.hpp"
#include "xxz/strong_disorder.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace {

int cmd_run(const std::string& config_path) {
  const xxz::RunConfig config = xxz::load_run_config(config_path);
  xxz::run_ensemble(config, &std::cout);
  std::cout << "summaries written to " << config.outdir << "/summary.tsv\n";
  return 0;
}

int cmd_aggregate(const std::string& outdir) {
  const auto summaries = xxz::aggregate_directory(outdir, &std::cout);
  xxz::write_summaries(outdir, summaries);
  std::cout << "aggregated " << summaries.size() << " (L, W) groups into " << outdir
            << "/summary.tsv\n";
  return 0;
}

int cmd_fit(const std::string& outdir, bool slope, bool thouless, bool tail, bool wstar,
            double alpha, double ratio_uv) {
  const auto summaries = xxz::read_summaries(outdir);
  if (summaries.empty()) {
    std::cerr << "error: no summaries under " << outdir << "\n";
    return 1;
  }
  if (!slope && !thouless && !tail && !wstar) slope = true;

  if (slope) {
    for (const auto& s : summaries) {
      if (s.edges.empty()) continue;
      const double lo = 10.0 * s.delta_bar, hi = 0.1 / s.disorder;
      std::printf("fit=slope L=%d W=%s window_lo=%s window_hi=%s", s.length,
                  xxz::format_double(s.disorder).c_str(), xxz::format_double(lo).c_str(),
                  xxz::format_double(hi).c_str());
      try {
        const xxz::SlopeFit fit = xxz::loglog_slope(xxz::mean_histogram(s), lo, hi);
        std::printf(" slope=%s intercept=%s rms=%s n_bins=%lld\n",
                    xxz::format_double(fit.slope).c_str(), xxz::format_double(fit.intercept).c_str(),
                    xxz::format_double(fit.rms).c_str(), static_cast<long long>(fit.n_bins));
      } catch (const std::exception& err) {
        std::printf(" error=%s\n", err.what());
      }
    }
  }

  if (thouless) {
    std::map<int, std::vector<std::pair<double, double>>> per_length;
    for (const auto& s : summaries) {
      if (s.edges.empty()) continue;
      std::printf("fit=thouless L=%d W=%s", s.length, xxz::format_double(s.disorder).c_str());
      try {
        const auto est = xxz::thouless_max_curvature(xxz::mean_histogram(s), 0.1 / s.disorder);
        std::printf(" omega_th=%s method=max-curvature\n", xxz::format_double(est.omega_th).c_str());
        per_length[s.length].push_back({s.disorder, est.omega_th});
      } catch (const std::exception& err) {
        std::printf(" error=%s\n", err.what());
      }
    }
    for (const auto& [length, points] : per_length) {
      if (points.size() < 2) continue;
      std::vector<double> ws, logs;
      for (const auto& [w, om] : points) {
        ws.push_back(w);
        logs.push_back(std::log(om));
      }
      const xxz::LinearFit fit = xxz::linear_fit(ws, logs);
      std::printf("fit=thouless_alpha L=%d alpha=%s n_points=%zu\n", length,
                  xxz::format_double(-fit.slope).c_str(), points.size());
    }
  }

  if (tail) {
    for (const auto& s : summaries) {
      std::printf("fit=tail L=%d W=%s", s.length, xxz::format_double(s.disorder).c_str());
      try {
        const auto zetas = xxz::collect_zetas(outdir, s.length, s.w_index);
        const xxz::TailFit fit = xxz::fit_zeta_tail(zetas);
        std::printf(" slope=%s z_lo=%s z_hi=%s n_bins=%lld\n", xxz::format_double(fit.slope).c_str(),
                    xxz::format_double(fit.z_lo).c_str(), xxz::format_double(fit.z_hi).c_str(),
                    static_cast<long long>(fit.n_bins));
      } catch (const std::exception& err) {
        std::printf(" error=%s\n", err.what());
      }
    }
  }

  if (wstar) {
    std::printf("fit=wstar_slope alpha=%s slope_per_site=%s\n", xxz::format_double(alpha).c_str(),
                xxz::format_double(std::log(2.0) / alpha).c_str());
    std::map<int, const xxz::EnsembleSummary*> largest_w;
    for (const auto& s : summaries) {
      auto& slot = largest_w[s.length];
      if (!slot || s.disorder > slot->disorder) slot = &s;
    }
    for (const auto& [length, s] : largest_w) {
      double r = ratio_uv;
      if (!(r >= 1) && s && s->bandwidth > 0) r = s->bandwidth / (0.1 / s->disorder);
      if (!(r >= 1)) r = 1.0;
      std::printf("fit=wstar L=%d ratio_uv=%s wstar=%s\n", length, xxz::format_double(r).c_str(),
                  xxz::format_double(xxz::critical_disorder(length, alpha, r)).c_str());
    }
  }
  return 0;
}

int cmd_oracle(int length, double intercept, const std::vector<double>& disorders) {
  const xxz::PrefactorCurve curve = xxz::log_w_prefactor(length);
  std::printf("C(%d) = %.15g\n", length, curve.value);
  for (std::size_t i = 0; i < curve.terms.size(); ++i)
    std::printf("  step=%zu p_i=%.15g term=%.15g\n", i + 1,
                xxz::sector_probability(length, static_cast<int>(i + 1)), curve.terms[i]);
  std::printf("limit = %.15g\n", xxz::unconstrained_prefactor());
  if (!disorders.empty()) {
    std::printf("W\tzeta_prediction\n");
    for (double w : disorders)
      std::printf("%s\t%s\n", xxz::format_double(w).c_str(),
                  xxz::format_double(xxz::asymptote_zeta(w, length, intercept)).c_str());
  }
  return 0;
}

struct SelfTest {
  int failures = 0;
  void check(const std::string& name, bool ok) {
    std::printf("%s %s\n", ok ? "ok  " : "FAIL", name.c_str());
    if (!ok) ++failures;
  }
};

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

int cmd_selftest() {
  using namespace xxz;
  SelfTest t;

  t.check("sector (4,0) has 6 states", enumerate_sector(4, 0).size() == 6);
  t.check("sector (2,2) is the polarized state", enumerate_sector(2, 2).bits(0) == 0b11u);
  t.check("sector (12,0) has 924 states", enumerate_sector(12, 0).size() == 924);
  {
    const SectorBasis basis(8, 0);
    bool ok = true;
    for (Index k = 0; k < basis.size(); ++k) ok = ok && basis.index_of(basis.state(k)) == k;
    t.check("index_of inverts enumeration", ok);
  }
  t.check("sz_at low bit", sz_at({0b01, 2}, 0) == 0.5 && sz_at({0b01, 2}, 1) == -0.5);
  {
    const auto a = sample_disorder(42, 12), b = sample_disorder(42, 12);
    bool in_range = true;
    for (double h : a.fields) in_range = in_range && std::abs(h) <= 1.0;
    t.check("disorder deterministic and in [-1,1]", a.fields == b.fields && in_range);
  }
  {
    const SectorBasis basis(4, 0);
    const auto fields = sample_disorder(7, 4);
    const Matrix h = build_hamiltonian({2.0, 1.1, 4, true}, fields, basis);
    t.check("hamiltonian symmetric", (h - h.transpose()).cwiseAbs().maxCoeff() == 0.0);
    const Index a = basis.index_of({0b0101, 4});
    const double expect = -1.1 / 2.0 + 0.5 * (fields.fields[0] - fields.fields[1] +
                                              fields.fields[2] - fields.fields[3]);
    t.check("antiferromagnetic diagonal entry", near(h(a, a), expect, 1e-14));
  }
  {
    Matrix h(2, 2);
    h << 0.3, 0.7, 0.7, -0.1;
    const auto d = diagonalize(h);
    const double mid = 0.5 * (0.3 - 0.1), rad = std::sqrt(0.2 * 0.2 + 0.49);
    t.check("2x2 closed-form spectrum",
            near(d.energies[0], mid - rad, 1e-14) && near(d.energies[1], mid + rad, 1e-14));
  }
  {
    // two-level system: chi = v^2 / w^2
    Matrix m(2, 2);
    m << 0.0, 0.3, 0.3, 0.0;
    Vector e(2);
    e << 0.0, 0.5;
    t.check("two-level susceptibility", near(fidelity_susceptibility(m, e, Index(0)), 0.36, 1e-14));
  }
  t.check("typical log of {e, e^3} is 2", near(typical_log_susceptibility(std::vector<double>{std::exp(1.0), std::exp(3.0)}).zeta, 2.0, 1e-12));
  {
    const GapRatios g = gap_ratios(std::vector<double>{0.0, 1.0, 4.0});
    t.check("gap ratio of gaps {1,3}", near(g.ratios.at(0), 1.0 / 3.0, 1e-15));
  }
  {
    std::vector<double> sz(10, 0.5);
    t.check("conserved fraction of polarized states", near(conserved_fraction(sz).value, 1.0, 1e-12));
  }
  t.check("C(4) = 2", log_w_prefactor(4).value == 2.0);
  t.check("C(8) = 16/7", near(log_w_prefactor(8).value, 16.0 / 7.0, 1e-14));
  t.check("p_1(8) = 1/7", near(sector_probability(8, 1), 1.0 / 7.0, 1e-15));
  t.check("unconstrained limit 8/3", near(unconstrained_prefactor(), 8.0 / 3.0, 1e-12));
  {
    SpinConfig up_down{0b001, 3};  // site 0 up, neighbors down
    const std::vector<double> fields{0.25, -0.25, 0.1};
    const double w = 100.0;
    const double expect = (1.0 / std::pow(0.5, 4) + 1.0 / std::pow(0.15, 4)) / (4 * w * w);
    t.check("first-order susceptibility", near(first_order_chi(up_down, fields, w, 0), expect, 1e-12));
  }
  t.check("decay constant at C=0.0179", near(decay_constant(0.0179), 6.98, 0.005));
  t.check("peak-disorder slope per site", near(std::log(2.0) / 6.98, 0.0993, 1e-3));
  t.check("tail prediction GOE", tail_slope_prediction(1, 0) == 1.0);
  t.check("tail prediction Poisson", tail_slope_prediction(0, 0) == 0.5);
  t.check("tail prediction bound", near(tail_slope_prediction(0, 1), 1.0 / 3.0, 1e-15));
  t.check("critical disorder at L=18", near(critical_disorder(18, 6.98, 1.0), 1.787, 2e-3));
  {
    // full pipeline on a small chain: the sum rule is an algebraic identity
    const SectorBasis basis(8, 0);
    const auto fields = sample_disorder(11, 8);
    const Matrix h = build_hamiltonian({1.5, 1.1, 8, true}, fields, basis);
    const auto d = diagonalize(h);
    const Matrix m = rotate_diagonal_observable(d, sz_diagonal(basis, 0));
    const auto edges = log_spaced_edges(1e-6, 20.0, 20);
    const auto hist = spectral_histogram(m, d.energies, edges, static_cast<double>(basis.size()));
    t.check("f-sum rule residual <= 1e-10", sum_rule_report(hist, m).residual <= 1e-10);
  }

  std::printf("%s\n", t.failures == 0 ? "selftest passed" : "selftest FAILED");
  return t.failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact-diagonalization localization probes for a disordered XXZ chain"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "run the sweep described by a config file");
  run->add_option("config", config_path, "key = value config file")->required();

  std::string agg_dir;
  auto* agg = app.add_subcommand("aggregate", "re-aggregate a records directory");
  agg->add_option("dir", agg_dir, "output directory of a previous run")->required();

  std::string fit_dir;
  bool fit_slope = false, fit_thouless = false, fit_tail = false, fit_wstar = false;
  double fit_alpha = 6.98, fit_ratio_uv = 0.0;
  auto* fit = app.add_subcommand("fit", "fit spectral slopes, Thouless scales, tails and W*");
  fit->add_option("dir", fit_dir, "output directory holding summary.tsv")->required();
  fit->add_flag("--slope", fit_slope, "log-log spectral slope over [10 delta_bar, 0.1/W]");
  fit->add_flag("--thouless", fit_thouless, "max-curvature Thouless frequency per (L, W)");
  fit->add_flag("--tail", fit_tail, "tail exponent of the log-susceptibility distribution");
  fit->add_flag("--wstar", fit_wstar, "critical-disorder prediction from the decay constant");
  fit->add_option("--alpha", fit_alpha, "decay constant used by --wstar (default 6.98)");
  fit->add_option("--ratio-uv", fit_ratio_uv, "bandwidth ratio used by --wstar (default: measured)");

  int oracle_length = 8;
  double oracle_intercept = 0.0;
  std::vector<double> oracle_disorders;
  auto* oracle = app.add_subcommand("oracle", "analytic strong-disorder prefactor C(L)");
  oracle->add_option("--L", oracle_length, "chain length (even, >= 4)")->required();
  oracle->add_option("--B", oracle_intercept, "intercept for the asymptote table");
  oracle->add_option("--W", oracle_disorders, "disorder values for the asymptote table");

  app.add_subcommand("selftest", "run the built-in example checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (run->parsed()) return cmd_run(config_path);
    if (agg->parsed()) return cmd_aggregate(agg_dir);
    if (fit->parsed())
      return cmd_fit(fit_dir, fit_slope, fit_thouless, fit_tail, fit_wstar, fit_alpha, fit_ratio_uv);
    if (oracle->parsed()) return cmd_oracle(oracle_length, oracle_intercept, oracle_disorders);
    return cmd_selftest();
  } catch (const xxz::ConfigError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
}
