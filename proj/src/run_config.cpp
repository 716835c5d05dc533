#include "xxz/run_config.hpp"

#include "xxz/basis.hpp"
#include "xxz/disorder.hpp"
#include "xxz/records.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>
#include <thread>

namespace xxz {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

bool parse_int(const std::string& s, long long& out) {
  char* end = nullptr;
  out = std::strtoll(s.c_str(), &end, 10);
  return end && *end == '\0' && !s.empty();
}

bool parse_real(const std::string& s, double& out) {
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end && *end == '\0' && !s.empty();
}

bool parse_bool(const std::string& s, bool& out) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") {
    out = true;
    return true;
  }
  if (s == "false" || s == "0" || s == "no" || s == "off") {
    out = false;
    return true;
  }
  return false;
}

// "log:lo:hi:n", "lin:lo:hi:n" or a comma list.
bool parse_disorder_grid(const std::string& value, std::vector<double>& out, std::string& err) {
  out.clear();
  if (value.rfind("log:", 0) == 0 || value.rfind("lin:", 0) == 0) {
    const bool logspace = value[1] == 'o';
    const auto parts = split(value.substr(4), ':');
    double lo = 0, hi = 0;
    long long n = 0;
    if (parts.size() != 3 || !parse_real(parts[0], lo) || !parse_real(parts[1], hi) ||
        !parse_int(parts[2], n) || n < 2 || !(hi > lo)) {
      err = "expected " + value.substr(0, 3) + ":<lo>:<hi>:<n >= 2> with lo < hi";
      return false;
    }
    if (logspace && !(lo > 0)) {
      err = "log-spaced grid requires lo > 0";
      return false;
    }
    for (long long i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / static_cast<double>(n - 1);
      out.push_back(logspace ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t);
    }
    return true;
  }
  for (const auto& item : split(value, ',')) {
    double v = 0;
    if (!parse_real(item, v)) {
      err = "cannot parse disorder value '" + item + "'";
      return false;
    }
    out.push_back(v);
  }
  if (out.empty()) err = "empty disorder grid";
  return !out.empty();
}

}  // namespace

RunConfig parse_run_config(std::istream& in) {
  RunConfig config;
  std::vector<std::string> issues;
  std::string line;
  int line_no = 0;
  bool saw_length = false, saw_disorder = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      issues.push_back("line " + std::to_string(line_no) + ": expected key = value");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto bad = [&](const std::string& why) {
      issues.push_back("line " + std::to_string(line_no) + " (" + key + "): " + why);
    };

    long long i = 0;
    double r = 0;
    bool b = false;
    if (key == "L") {
      config.lengths.clear();
      for (const auto& item : split(value, ',')) {
        if (!parse_int(item, i))
          bad("cannot parse chain length '" + item + "'");
        else
          config.lengths.push_back(static_cast<int>(i));
      }
      saw_length = true;
    } else if (key == "W") {
      std::string err;
      if (!parse_disorder_grid(value, config.disorders, err)) bad(err);
      saw_disorder = true;
    } else if (key == "delta") {
      if (!parse_real(value, r)) bad("not a number"); else config.anisotropy = r;
    } else if (key == "realizations") {
      if (!parse_int(value, i)) bad("not an integer"); else config.realizations = static_cast<int>(i);
    } else if (key == "base_seed") {
      char* end = nullptr;
      config.base_seed = std::strtoull(value.c_str(), &end, 10);
      if (!end || *end != '\0' || value.empty()) bad("not an unsigned integer");
    } else if (key == "two_M") {
      if (value == "auto") config.two_m = RunConfig::automatic_sector;
      else if (!parse_int(value, i)) bad("expected an integer or 'auto'");
      else config.two_m = static_cast<int>(i);
    } else if (key == "probe_site") {
      if (!parse_int(value, i)) bad("not an integer"); else config.probe_site = static_cast<int>(i);
    } else if (key == "mu") {
      if (!parse_real(value, r)) bad("not a number"); else config.cutoff = r;
    } else if (key == "bins_per_decade") {
      if (!parse_int(value, i)) bad("not an integer"); else config.bins_per_decade = static_cast<int>(i);
    } else if (key == "residual_tol") {
      if (!parse_real(value, r)) bad("not a number"); else config.residual_tol = r;
    } else if (key == "ortho_tol") {
      if (!parse_real(value, r)) bad("not a number"); else config.ortho_tol = r;
    } else if (key == "workers") {
      if (!parse_int(value, i)) bad("not an integer"); else config.workers = static_cast<int>(i);
    } else if (key == "outdir") {
      if (value.empty()) bad("must not be empty"); else config.outdir = value;
    } else if (key == "window") {
      if (value == "all") config.middle_window = false;
      else if (value == "middle50") config.middle_window = true;
      else bad("expected 'all' or 'middle50'");
    } else if (key == "normalization") {
      if (value == "sector") config.hilbert_normalization = false;
      else if (value == "hilbert") config.hilbert_normalization = true;
      else bad("expected 'sector' or 'hilbert'");
    } else if (key == "boundary") {
      if (value == "periodic") config.periodic = true;
      else if (value == "open") config.periodic = false;
      else bad("expected 'periodic' or 'open'");
    } else if (key == "memory_cap_gib") {
      if (!parse_real(value, r)) bad("not a number"); else config.memory_cap_gib = r;
    } else if (key == "force_memory") {
      if (!parse_bool(value, b)) bad("not a boolean"); else config.force_memory = b;
    } else if (key == "verify") {
      if (value == "auto" || value == "full" || value == "sample" || value == "off") config.verify = value;
      else bad("expected auto, full, sample or off");
    } else if (key == "zeta_bin_width") {
      if (!parse_real(value, r)) bad("not a number"); else config.zeta_bin_width = r;
    } else {
      bad("unknown key");
    }
  }
  if (!saw_length) issues.push_back("missing required key 'L'");
  if (!saw_disorder) issues.push_back("missing required key 'W'");
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return config;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open config file '" + path + "'"});
  return parse_run_config(in);
}

std::uint64_t binomial(int length, int n_up) {
  if (n_up < 0 || n_up > length) return 0;
  n_up = std::min(n_up, length - n_up);
  std::uint64_t result = 1;
  for (int i = 1; i <= n_up; ++i) {
    result = result * static_cast<std::uint64_t>(length - n_up + i) / static_cast<std::uint64_t>(i);
  }
  return result;
}

int sector_two_m(const RunConfig& config, int length) {
  return config.two_m == RunConfig::automatic_sector ? default_two_m(length) : config.two_m;
}

void validate_run_config(const RunConfig& config) {
  std::vector<std::string> issues;
  if (config.lengths.empty()) issues.push_back("no chain lengths given");
  for (int length : config.lengths) {
    if (length < 1 || length > max_chain_length) {
      issues.push_back("chain length " + std::to_string(length) + " outside [1, " +
                       std::to_string(max_chain_length) + "]");
      continue;
    }
    const int two_m = sector_two_m(config, length);
    if (two_m < -length || two_m > length || ((two_m + length) % 2) != 0) {
      issues.push_back("two_M = " + std::to_string(two_m) + " incompatible with L = " +
                       std::to_string(length));
      continue;
    }
    if (config.probe_site < 0 || config.probe_site >= length)
      issues.push_back("probe_site " + std::to_string(config.probe_site) + " outside chain of length " +
                       std::to_string(length));
    const std::uint64_t dim = binomial(length, (length + two_m) / 2);
    const double bytes = 2.0 * 8.0 * static_cast<double>(dim) * static_cast<double>(dim);
    if (!config.force_memory && bytes > config.memory_cap_gib * 1073741824.0)
      issues.push_back("L = " + std::to_string(length) + " needs " +
                       std::to_string(bytes / 1073741824.0) +
                       " GiB for the dense matrix plus eigenvectors, above the cap of " +
                       std::to_string(config.memory_cap_gib) + " GiB (set force_memory = true to override)");
  }
  if (config.disorders.empty()) issues.push_back("no disorder values given");
  for (double w : config.disorders)
    if (!(w > 0)) issues.push_back("disorder value " + format_double(w) + " must be positive");
  if (config.realizations < 1) issues.push_back("realizations must be >= 1");
  if (config.cutoff < 0) issues.push_back("mu must be >= 0");
  if (config.bins_per_decade < 1) issues.push_back("bins_per_decade must be >= 1");
  if (!(config.residual_tol > 0)) issues.push_back("residual_tol must be positive");
  if (!(config.ortho_tol > 0)) issues.push_back("ortho_tol must be positive");
  if (config.workers < 0) issues.push_back("workers must be >= 0");
  if (config.outdir.empty()) issues.push_back("outdir must not be empty");
  if (!(config.zeta_bin_width > 0)) issues.push_back("zeta_bin_width must be positive");
  if (config.verify != "auto" && config.verify != "full" && config.verify != "sample" &&
      config.verify != "off")
    issues.push_back("verify must be auto, full, sample or off");
  if (!issues.empty()) throw ConfigError(std::move(issues));
}

std::string canonical_config(const RunConfig& config) {
  std::ostringstream out;
  out << "L=";
  for (std::size_t i = 0; i < config.lengths.size(); ++i)
    out << (i ? "," : "") << config.lengths[i];
  out << "\nW=";
  for (std::size_t i = 0; i < config.disorders.size(); ++i)
    out << (i ? "," : "") << format_double(config.disorders[i]);
  out << "\nbase_seed=" << config.base_seed;
  out << "\nbins_per_decade=" << config.bins_per_decade;
  out << "\nboundary=" << (config.periodic ? "periodic" : "open");
  out << "\ndelta=" << format_double(config.anisotropy);
  out << "\nmu=" << format_double(config.cutoff);
  out << "\nnormalization=" << (config.hilbert_normalization ? "hilbert" : "sector");
  out << "\northo_tol=" << format_double(config.ortho_tol);
  out << "\nprobe_site=" << config.probe_site;
  out << "\nrealizations=" << config.realizations;
  out << "\nresidual_tol=" << format_double(config.residual_tol);
  out << "\ntwo_M=";
  if (config.two_m == RunConfig::automatic_sector) out << "auto";
  else out << config.two_m;
  out << "\nverify=" << config.verify;
  out << "\nwindow=" << (config.middle_window ? "middle50" : "all");
  out << "\nzeta_bin_width=" << format_double(config.zeta_bin_width);
  out << "\n";
  return out.str();
}

std::uint64_t config_digest(const RunConfig& config) {
  const std::string canon = canonical_config(config);
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string config_digest_hex(const RunConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(config_digest(config)));
  return buf;
}

std::uint64_t realization_seed(const RunConfig& config, int length, int w_index, int k) {
  std::uint64_t h = mix_seed(0x7f4a7c15u, static_cast<std::uint64_t>(length));
  h = mix_seed(h, static_cast<std::uint64_t>(w_index));
  h = mix_seed(h, static_cast<std::uint64_t>(k));
  return config.base_seed + h;
}

VerifyMode resolve_verify(const RunConfig& config, Index dim) {
  if (config.verify == "full") return VerifyMode::full;
  if (config.verify == "sample") return VerifyMode::sample;
  if (config.verify == "off") return VerifyMode::off;
  return dim <= 2000 ? VerifyMode::full : VerifyMode::sample;
}

int resolve_workers(const RunConfig& config) {
  if (const char* env = std::getenv("XXZPROBE_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  if (config.workers > 0) return config.workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace xxz
