#pragma once

#include "xxz/probes.hpp"
#include "xxz/records.hpp"
#include "xxz/run_config.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace xxz {

// Per-(L, W) ensemble aggregates.
struct EnsembleSummary {
  int length = 0;
  int two_m = 0;
  int w_index = 0;
  double disorder = 0;
  Index dim = 0;
  int n_records = 0;
  int n_failed = 0;
  double zeta = 0;
  double chi_mean = 0;
  double chi_typ_scaled = 0;  // exp(zeta) / D
  double conserved_z = 0;
  double r_mean = 0;
  double tail_slope = 0;  // NaN when the tail fit lacks data
  double delta_bar = 0;
  double bandwidth = 0;
  double max_sum_rule_residual = 0;
  Index n_chi_zero = 0;
  Index n_chi_infinite = 0;
  Index n_sz_zero = 0;
  Index n_gap_degenerate = 0;
  double dimension_norm = 0;
  double total_underflow = 0;
  double total_overflow = 0;
  std::vector<double> edges;
  std::vector<double> mean_density;
  std::vector<double> typical_density;
  std::vector<int> count_nonzero;  // realizations with signal per bin
};

// Runs every (L, W, k) task of the config, appending records durably as they
// complete and writing aggregated summaries last. Reruns with the same config
// skip completed records. Eigensolver failures mark single records failed and
// the sweep continues; I/O failures abort with partial results preserved.
void run_ensemble(const RunConfig& config, std::ostream* log = nullptr);

// Pure aggregation over parsed record groups.
EnsembleSummary aggregate_records(const RecordsMeta& meta, std::vector<RealizationRecord> records,
                                  double zeta_bin_width);

// Reads every records file under outdir and aggregates it.
std::vector<EnsembleSummary> aggregate_directory(const std::string& outdir, std::ostream* log = nullptr);

// summary.tsv plus one spectral table per (L, W).
void write_summaries(const std::string& outdir, const std::vector<EnsembleSummary>& summaries);
std::vector<EnsembleSummary> read_summaries(const std::string& outdir);

// Rebuilds the ensemble-mean histogram from a summary for the fit routines.
SpectralHistogram mean_histogram(const EnsembleSummary& summary);

// Per-realization zeta = log chi values of one (L, W) group, for tail fits.
std::vector<double> collect_zetas(const std::string& outdir, int length, int w_index);

}  // namespace xxz
