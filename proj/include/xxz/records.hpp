#pragma once

#include "xxz/core.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace xxz {

// Everything needed to reinterpret the realization lines of one (L, W) group.
struct RecordsMeta {
  std::string version;
  std::string config_digest;
  int length = 0;
  int w_index = 0;
  double disorder = 0;
  double anisotropy = 1.1;
  int two_m = 0;
  int probe_site = 0;
  double cutoff = 0;
  bool periodic = true;
  bool middle_window = false;
  std::string normalization = "sector";
  double dimension_norm = 0;  // D used for spectral weights
  Index dim = 0;
  double zeta_bin_width = 0.5;
  std::vector<double> edges;
};

// One disorder realization, fully reproducible from (config, seed).
struct RealizationRecord {
  int length = 0;
  int w_index = 0;
  double disorder = 0;
  int k = 0;
  std::uint64_t seed = 0;
  Index dim = 0;
  double delta_bar = 0;   // typical level spacing
  double bandwidth = 0;   // E_max - E_min
  double sum_rule_residual = 0;
  double underflow = 0;
  double overflow = 0;
  Index n_gap_degenerate = 0;
  std::vector<double> fields;
  std::vector<double> chi;         // per eigenstate (windowed when requested)
  std::vector<double> diag_sz;     // per eigenstate
  std::vector<double> gap_ratios;  // per interior eigenstate
  std::vector<double> hist_weight; // per spectral bin
  bool failed = false;
  std::string failure;
};

std::string serialize_meta(const RecordsMeta& meta);
std::string serialize_record(const RealizationRecord& record);
RecordsMeta parse_meta(const std::string& line);
RealizationRecord parse_record(const std::string& line);
bool is_meta_line(const std::string& line);
bool is_record_line(const std::string& line);

std::string records_filename(int length, int w_index);

// Full round-trip formatting for doubles ("%.17g").
std::string format_double(double value);
std::string format_doubles(const std::vector<double>& values);
std::vector<double> parse_doubles(const std::string& csv);

}  // namespace xxz
