#pragma once

#include "xxz/core.hpp"
#include "xxz/spectrum.hpp"

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace xxz {

// Invalid or unknown configuration; carries one message per violation.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> issues)
      : std::runtime_error(join(issues)), issues_(std::move(issues)) {}
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& issues) {
    std::string all = "invalid configuration:";
    for (const auto& i : issues) all += "\n  - " + i;
    return all;
  }
  std::vector<std::string> issues_;
};

struct RunConfig {
  static constexpr int automatic_sector = std::numeric_limits<int>::min();

  std::vector<int> lengths;
  std::vector<double> disorders;
  double anisotropy = 1.1;
  int realizations = 1;
  std::uint64_t base_seed = 1;
  int two_m = automatic_sector;  // automatic: 0 for even L, +1 for odd
  int probe_site = 0;
  double cutoff = 0.0;  // mu
  int bins_per_decade = 20;
  double residual_tol = 1e-8;
  double ortho_tol = 1e-10;
  int workers = 0;  // 0: hardware concurrency (XXZPROBE_WORKERS overrides)
  std::string outdir = "out";
  bool middle_window = false;         // restrict probes to the middle half of the spectrum
  bool hilbert_normalization = false; // D = 2^L instead of the number of averaged states
  bool periodic = true;
  double memory_cap_gib = 8.0;
  bool force_memory = false;
  std::string verify = "auto";  // auto | full | sample | off
  double zeta_bin_width = 0.5;
};

// Flat key = value text; '#' starts a comment; unknown keys are rejected.
RunConfig parse_run_config(std::istream& in);
RunConfig load_run_config(const std::string& path);

// Throws ConfigError listing every violation.
void validate_run_config(const RunConfig& config);

// Stable serialization of the physics-defining keys (workers, outdir and the
// memory guard are runtime knobs and excluded), plus its FNV-1a digest.
std::string canonical_config(const RunConfig& config);
std::uint64_t config_digest(const RunConfig& config);
std::string config_digest_hex(const RunConfig& config);

int sector_two_m(const RunConfig& config, int length);
std::uint64_t realization_seed(const RunConfig& config, int length, int w_index, int k);
VerifyMode resolve_verify(const RunConfig& config, Index dim);
int resolve_workers(const RunConfig& config);

// Number of states with n_up spins up among `length` sites (fits in 64 bits
// for length <= max_chain_length).
std::uint64_t binomial(int length, int n_up);

}  // namespace xxz
