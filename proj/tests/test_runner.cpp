#include "xxz/runner.hpp"

#include "doctest.h"

#include "xxz/disorder.hpp"
#include "xxz/records.hpp"
#include "xxz/run_config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace xxz;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::path("runner_test_work") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RunConfig small_config(const std::string& outdir) {
  RunConfig config;
  config.lengths = {8};
  config.disorders = {1.0, 3.0};
  config.realizations = 4;
  config.base_seed = 555;
  config.outdir = outdir;
  config.workers = 1;
  return config;
}

}  // namespace

TEST_CASE("config parsing round trip") {
  std::istringstream in(
      "# comment line\n"
      "L = 8, 10\n"
      "W = log:0.5:15:4\n"
      "delta = 1.0\n"
      "realizations = 7\n"
      "base_seed = 99\n"
      "two_M = auto\n"
      "probe_site = 1\n"
      "mu = 0.001\n"
      "bins_per_decade = 10\n"
      "workers = 2\n"
      "outdir = some/dir\n"
      "window = middle50\n"
      "normalization = hilbert\n"
      "boundary = open\n"
      "verify = sample\n"
      "zeta_bin_width = 0.25\n");
  const RunConfig config = parse_run_config(in);
  CHECK(config.lengths == std::vector<int>{8, 10});
  REQUIRE(config.disorders.size() == 4);
  CHECK(config.disorders.front() == doctest::Approx(0.5));
  CHECK(config.disorders.back() == doctest::Approx(15.0));
  CHECK(config.disorders[1] == doctest::Approx(0.5 * std::pow(30.0, 1.0 / 3.0)));
  CHECK(config.anisotropy == 1.0);
  CHECK(config.realizations == 7);
  CHECK(config.base_seed == 99);
  CHECK(config.two_m == RunConfig::automatic_sector);
  CHECK(config.probe_site == 1);
  CHECK(config.cutoff == 0.001);
  CHECK(config.middle_window);
  CHECK(config.hilbert_normalization);
  CHECK_FALSE(config.periodic);
  CHECK(config.verify == "sample");
  validate_run_config(config);
}

TEST_CASE("unknown keys and bad values are all reported") {
  std::istringstream in(
      "L = 8\n"
      "W = 1.0\n"
      "frobnicate = 1\n"
      "realizations = x\n");
  try {
    parse_run_config(in);
    FAIL("expected ConfigError");
  } catch (const ConfigError& err) {
    REQUIRE(err.issues().size() == 2);
    CHECK(err.issues()[0].find("frobnicate") != std::string::npos);
    CHECK(err.issues()[1].find("realizations") != std::string::npos);
  }
}

TEST_CASE("validation lists violations") {
  RunConfig config;
  config.lengths = {8, 30};
  config.disorders = {1.0, -2.0};
  config.realizations = 0;
  config.probe_site = 9;
  try {
    validate_run_config(config);
    FAIL("expected ConfigError");
  } catch (const ConfigError& err) {
    CHECK(err.issues().size() >= 4);
  }
}

TEST_CASE("memory guard refuses oversized sectors unless forced") {
  RunConfig config;
  config.lengths = {18};
  config.disorders = {1.0};
  CHECK_THROWS_AS(validate_run_config(config), ConfigError);
  config.force_memory = true;
  CHECK_NOTHROW(validate_run_config(config));
  config.force_memory = false;
  config.memory_cap_gib = 64.0;
  CHECK_NOTHROW(validate_run_config(config));
}

TEST_CASE("digest covers physics keys, not runtime knobs") {
  RunConfig a = small_config("dir_a");
  RunConfig b = small_config("dir_b");
  b.workers = 7;
  b.memory_cap_gib = 2.0;
  CHECK(config_digest(a) == config_digest(b));
  b.base_seed = 556;
  CHECK(config_digest(a) != config_digest(b));
}

TEST_CASE("record serialization round-trips bit-exactly") {
  RealizationRecord record;
  record.length = 8;
  record.w_index = 3;
  record.disorder = 2.7182818284590452;
  record.k = 5;
  record.seed = 0xfeedface12345678ull;
  record.dim = 70;
  record.delta_bar = 1.234e-5;
  record.bandwidth = 17.25;
  record.sum_rule_residual = 3.25e-15;
  record.underflow = 1e-22;
  record.overflow = 0.125;
  record.n_gap_degenerate = 1;
  record.fields = {0.1, -0.999999999999999, 1.0 / 3.0};
  record.chi = {1e-30, 2.5, 7.0 / 11.0};
  record.diag_sz = {0.5, -0.25};
  record.gap_ratios = {0.333, 1.0};
  record.hist_weight = {0.0, 1e-7};
  const RealizationRecord parsed = parse_record(serialize_record(record));
  CHECK(parsed.disorder == record.disorder);
  CHECK(parsed.seed == record.seed);
  CHECK(parsed.fields == record.fields);
  CHECK(parsed.chi == record.chi);
  CHECK(parsed.diag_sz == record.diag_sz);
  CHECK(parsed.gap_ratios == record.gap_ratios);
  CHECK(parsed.hist_weight == record.hist_weight);
  CHECK(parsed.delta_bar == record.delta_bar);
  CHECK_FALSE(parsed.failed);

  RealizationRecord failed;
  failed.length = 8;
  failed.w_index = 0;
  failed.disorder = 1.0;
  failed.k = 2;
  failed.seed = 9;
  failed.failed = true;
  failed.failure = "eigensolver failed to converge (dim=70)";
  const RealizationRecord reparsed = parse_record(serialize_record(failed));
  CHECK(reparsed.failed);
  CHECK(reparsed.k == 2);
}

TEST_CASE("ensemble run produces durable, reproducible records") {
  const fs::path dir = fresh_dir("basic");
  RunConfig config = small_config(dir.string());
  run_ensemble(config);

  CHECK(fs::exists(dir / "config.txt"));
  CHECK(fs::exists(dir / records_filename(8, 0)));
  CHECK(fs::exists(dir / records_filename(8, 1)));
  CHECK(fs::exists(dir / "summary.tsv"));
  CHECK(fs::exists(dir / "spectral_L08_w000.tsv"));

  const auto summaries = aggregate_directory(dir.string());
  REQUIRE(summaries.size() == 2);
  for (const auto& s : summaries) {
    CHECK(s.n_records == 4);
    CHECK(s.n_failed == 0);
    CHECK(s.dim == 70);
    CHECK(s.max_sum_rule_residual <= 1e-10);
    CHECK(std::isfinite(s.zeta));
    CHECK(s.conserved_z > 0);
    CHECK(s.conserved_z < 1);
    CHECK(s.r_mean > 0.3);
    CHECK(s.r_mean < 0.7);
  }

  // the seeds follow the documented derivation
  std::ifstream in(dir / records_filename(8, 0));
  std::string line;
  bool checked = false;
  while (std::getline(in, line)) {
    if (!is_record_line(line)) continue;
    const auto record = parse_record(line);
    CHECK(record.seed == realization_seed(config, 8, 0, record.k));
    checked = true;
  }
  CHECK(checked);
}

TEST_CASE("reruns are idempotent and worker-count independent") {
  const fs::path dir1 = fresh_dir("det_one");
  const fs::path dir2 = fresh_dir("det_two");
  RunConfig one = small_config(dir1.string());
  RunConfig two = small_config(dir2.string());
  two.workers = 3;

  run_ensemble(one);
  const std::string summary_before = slurp(dir1 / "summary.tsv");
  const std::string records_before = slurp(dir1 / records_filename(8, 1));
  run_ensemble(one);  // no-op rerun
  CHECK(slurp(dir1 / "summary.tsv") == summary_before);
  CHECK(slurp(dir1 / records_filename(8, 1)) == records_before);

  run_ensemble(two);
  CHECK(slurp(dir2 / "summary.tsv") == summary_before);
  CHECK(slurp(dir2 / "spectral_L08_w001.tsv") == slurp(dir1 / "spectral_L08_w001.tsv"));
}

TEST_CASE("a records directory rejects a different config") {
  const fs::path dir = fresh_dir("mismatch");
  RunConfig config = small_config(dir.string());
  run_ensemble(config);
  config.base_seed = 777;
  CHECK_THROWS_AS(run_ensemble(config), ConfigError);
}

TEST_CASE("failures are recorded and the sweep continues") {
  const fs::path dir = fresh_dir("failures");
  RunConfig config = small_config(dir.string());
  config.residual_tol = 1e-300;  // unattainable: every decomposition is rejected
  run_ensemble(config);
  std::ifstream in(dir / records_filename(8, 0));
  std::string line;
  int failed = 0;
  while (std::getline(in, line))
    if (line.rfind("kind=failed", 0) == 0) ++failed;
  CHECK(failed == config.realizations);
  const auto summaries = aggregate_directory(dir.string());
  CHECK(summaries.empty());  // nothing usable, groups skipped with warnings
}

TEST_CASE("aggregating a single record reproduces its statistics") {
  const fs::path dir = fresh_dir("single");
  RunConfig config = small_config(dir.string());
  config.realizations = 1;
  config.disorders = {2.0};
  run_ensemble(config);

  std::ifstream in(dir / records_filename(8, 0));
  std::string line;
  RecordsMeta meta;
  RealizationRecord record;
  while (std::getline(in, line)) {
    if (is_meta_line(line)) meta = parse_meta(line);
    if (is_record_line(line)) record = parse_record(line);
  }
  const auto summary = aggregate_records(meta, {record}, 0.5);
  const auto stats = typical_log_susceptibility(record.chi);
  CHECK(summary.zeta == doctest::Approx(stats.zeta).epsilon(1e-14));
  CHECK(summary.chi_mean == doctest::Approx(stats.chi_mean).epsilon(1e-14));
  CHECK(summary.delta_bar == doctest::Approx(record.delta_bar).epsilon(1e-12));
  CHECK(summary.bandwidth == doctest::Approx(record.bandwidth).epsilon(1e-14));
  CHECK(summary.r_mean == doctest::Approx(mean(record.gap_ratios)).epsilon(1e-14));
}

TEST_CASE("summaries read back what was written") {
  const fs::path dir = fresh_dir("readback");
  RunConfig config = small_config(dir.string());
  run_ensemble(config);
  const auto written = aggregate_directory(dir.string());
  const auto read = read_summaries(dir.string());
  REQUIRE(read.size() == written.size());
  for (std::size_t i = 0; i < read.size(); ++i) {
    CHECK(read[i].length == written[i].length);
    CHECK(read[i].disorder == written[i].disorder);
    CHECK(read[i].zeta == written[i].zeta);
    CHECK(read[i].edges.size() == written[i].edges.size());
    CHECK(read[i].mean_density == written[i].mean_density);
  }
  const auto hist = mean_histogram(read[0]);
  CHECK(hist.bins() + 1 == static_cast<Index>(read[0].edges.size()));
  const auto zetas = collect_zetas(dir.string(), 8, 0);
  CHECK(zetas.size() == 4 * 70);
}
