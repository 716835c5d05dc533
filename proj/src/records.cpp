#include "xxz/records.hpp"

#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>
#include <stdexcept>

namespace xxz {

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string format_doubles(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_double(values[i]);
  }
  return out;
}

std::vector<double> parse_doubles(const std::string& csv) {
  std::vector<double> out;
  if (csv.empty()) return out;
  const char* p = csv.c_str();
  while (*p) {
    char* end = nullptr;
    out.push_back(std::strtod(p, &end));
    if (end == p) throw std::runtime_error("parse_doubles: malformed number in '" + csv + "'");
    p = (*end == ',') ? end + 1 : end;
  }
  return out;
}

namespace {

// space-separated key=value pairs; values never contain spaces
std::map<std::string, std::string> parse_pairs(const std::string& line) {
  std::map<std::string, std::string> pairs;
  std::istringstream in(line);
  std::string token;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw std::runtime_error("records: malformed token '" + token + "'");
    pairs[token.substr(0, eq)] = token.substr(eq + 1);
  }
  return pairs;
}

const std::string& require(const std::map<std::string, std::string>& pairs, const std::string& key) {
  const auto it = pairs.find(key);
  if (it == pairs.end()) throw std::runtime_error("records: missing field '" + key + "'");
  return it->second;
}

}  // namespace

bool is_meta_line(const std::string& line) { return line.rfind("kind=meta", 0) == 0; }
bool is_record_line(const std::string& line) {
  return line.rfind("kind=realization", 0) == 0 || line.rfind("kind=failed", 0) == 0;
}

std::string serialize_meta(const RecordsMeta& meta) {
  std::ostringstream out;
  out << "kind=meta";
  out << " version=" << meta.version;
  out << " config=" << meta.config_digest;
  out << " L=" << meta.length;
  out << " w_index=" << meta.w_index;
  out << " W=" << format_double(meta.disorder);
  out << " delta=" << format_double(meta.anisotropy);
  out << " two_M=" << meta.two_m;
  out << " probe_site=" << meta.probe_site;
  out << " mu=" << format_double(meta.cutoff);
  out << " boundary=" << (meta.periodic ? "periodic" : "open");
  out << " window=" << (meta.middle_window ? "middle50" : "all");
  out << " normalization=" << meta.normalization;
  out << " D=" << format_double(meta.dimension_norm);
  out << " dim=" << meta.dim;
  out << " zeta_bin_width=" << format_double(meta.zeta_bin_width);
  out << " edges=" << format_doubles(meta.edges);
  return out.str();
}

RecordsMeta parse_meta(const std::string& line) {
  const auto pairs = parse_pairs(line);
  if (require(pairs, "kind") != "meta") throw std::runtime_error("records: not a meta line");
  RecordsMeta meta;
  meta.version = require(pairs, "version");
  meta.config_digest = require(pairs, "config");
  meta.length = std::atoi(require(pairs, "L").c_str());
  meta.w_index = std::atoi(require(pairs, "w_index").c_str());
  meta.disorder = std::strtod(require(pairs, "W").c_str(), nullptr);
  meta.anisotropy = std::strtod(require(pairs, "delta").c_str(), nullptr);
  meta.two_m = std::atoi(require(pairs, "two_M").c_str());
  meta.probe_site = std::atoi(require(pairs, "probe_site").c_str());
  meta.cutoff = std::strtod(require(pairs, "mu").c_str(), nullptr);
  meta.periodic = require(pairs, "boundary") == "periodic";
  meta.middle_window = require(pairs, "window") == "middle50";
  meta.normalization = require(pairs, "normalization");
  meta.dimension_norm = std::strtod(require(pairs, "D").c_str(), nullptr);
  meta.dim = std::atoll(require(pairs, "dim").c_str());
  meta.zeta_bin_width = std::strtod(require(pairs, "zeta_bin_width").c_str(), nullptr);
  meta.edges = parse_doubles(require(pairs, "edges"));
  return meta;
}

std::string serialize_record(const RealizationRecord& record) {
  std::ostringstream out;
  if (record.failed) {
    out << "kind=failed";
    out << " L=" << record.length;
    out << " w_index=" << record.w_index;
    out << " W=" << format_double(record.disorder);
    out << " k=" << record.k;
    out << " seed=" << record.seed;
    std::string reason = record.failure;
    for (auto& c : reason)
      if (c == ' ' || c == '\n' || c == '=') c = '_';
    out << " reason=" << reason;
    return out.str();
  }
  out << "kind=realization";
  out << " L=" << record.length;
  out << " w_index=" << record.w_index;
  out << " W=" << format_double(record.disorder);
  out << " k=" << record.k;
  out << " seed=" << record.seed;
  out << " dim=" << record.dim;
  out << " delta_bar=" << format_double(record.delta_bar);
  out << " bandwidth=" << format_double(record.bandwidth);
  out << " sum_rule_residual=" << format_double(record.sum_rule_residual);
  out << " underflow=" << format_double(record.underflow);
  out << " overflow=" << format_double(record.overflow);
  out << " n_gap_degenerate=" << record.n_gap_degenerate;
  out << " fields=" << format_doubles(record.fields);
  out << " chi=" << format_doubles(record.chi);
  out << " diag_sz=" << format_doubles(record.diag_sz);
  out << " gap_ratios=" << format_doubles(record.gap_ratios);
  out << " hist_weight=" << format_doubles(record.hist_weight);
  return out.str();
}

RealizationRecord parse_record(const std::string& line) {
  const auto pairs = parse_pairs(line);
  const std::string& kind = require(pairs, "kind");
  RealizationRecord record;
  record.length = std::atoi(require(pairs, "L").c_str());
  record.w_index = std::atoi(require(pairs, "w_index").c_str());
  record.disorder = std::strtod(require(pairs, "W").c_str(), nullptr);
  record.k = std::atoi(require(pairs, "k").c_str());
  record.seed = std::strtoull(require(pairs, "seed").c_str(), nullptr, 10);
  if (kind == "failed") {
    record.failed = true;
    record.failure = require(pairs, "reason");
    return record;
  }
  if (kind != "realization") throw std::runtime_error("records: unknown record kind '" + kind + "'");
  record.dim = std::atoll(require(pairs, "dim").c_str());
  record.delta_bar = std::strtod(require(pairs, "delta_bar").c_str(), nullptr);
  record.bandwidth = std::strtod(require(pairs, "bandwidth").c_str(), nullptr);
  record.sum_rule_residual = std::strtod(require(pairs, "sum_rule_residual").c_str(), nullptr);
  record.underflow = std::strtod(require(pairs, "underflow").c_str(), nullptr);
  record.overflow = std::strtod(require(pairs, "overflow").c_str(), nullptr);
  record.n_gap_degenerate = std::atoll(require(pairs, "n_gap_degenerate").c_str());
  record.fields = parse_doubles(require(pairs, "fields"));
  record.chi = parse_doubles(require(pairs, "chi"));
  record.diag_sz = parse_doubles(require(pairs, "diag_sz"));
  record.gap_ratios = parse_doubles(require(pairs, "gap_ratios"));
  record.hist_weight = parse_doubles(require(pairs, "hist_weight"));
  return record;
}

std::string records_filename(int length, int w_index) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "records_L%02d_w%03d.txt", length, w_index);
  return buf;
}

}  // namespace xxz
