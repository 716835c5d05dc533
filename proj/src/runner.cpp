#include "xxz/runner.hpp"

#include "xxz/analysis.hpp"
#include "xxz/basis.hpp"
#include "xxz/disorder.hpp"
#include "xxz/model.hpp"
#include "xxz/spectrum.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

namespace fs = std::filesystem;

namespace xxz {

namespace {

struct GroupContext {
  const RunConfig* config = nullptr;
  const SectorBasis* basis = nullptr;
  int length = 0;
  int w_index = 0;
  double disorder = 0;
  double dimension_norm = 0;
  std::vector<Index> window_rows;  // empty: all eigenstates
  std::vector<double> edges;
  SolverOptions solver;
};

struct Decomposed {
  DisorderRealization realization;
  EigenDecomposition<double> decomposition;
  Matrix observable;
  double delta_bar = 0;
  double bandwidth = 0;
};

Decomposed decompose_one(const GroupContext& ctx, std::uint64_t seed) {
  Decomposed d;
  d.realization = sample_disorder(seed, ctx.length);
  CouplingParams params{ctx.disorder, ctx.config->anisotropy, ctx.length, ctx.config->periodic};
  const Matrix h = build_hamiltonian(params, d.realization, *ctx.basis);
  d.decomposition = diagonalize(h, ctx.solver);
  d.observable = rotate_diagonal_observable(d.decomposition,
                                            sz_diagonal(*ctx.basis, ctx.config->probe_site));
  const auto& e = d.decomposition.energies;
  d.bandwidth = e[e.size() - 1] - e[0];
  d.delta_bar = e.size() > 1 ? typical_level_spacing({e.data(), static_cast<std::size_t>(e.size())}) : 0.0;
  return d;
}

RealizationRecord probe_one(const GroupContext& ctx, int k, const Decomposed& d) {
  RealizationRecord record;
  record.length = ctx.length;
  record.w_index = ctx.w_index;
  record.disorder = ctx.disorder;
  record.k = k;
  record.seed = d.realization.seed;
  record.dim = d.decomposition.dim();
  record.fields = d.realization.fields;
  record.delta_bar = d.delta_bar;
  record.bandwidth = d.bandwidth;

  const auto& energies = d.decomposition.energies;
  const auto& m = d.observable;
  const Index dim = record.dim;

  auto for_each_row = [&](auto&& fn) {
    if (ctx.window_rows.empty()) {
      for (Index n = 0; n < dim; ++n) fn(n);
    } else {
      for (Index n : ctx.window_rows) fn(n);
    }
  };

  for_each_row([&](Index n) {
    record.chi.push_back(fidelity_susceptibility(m, energies, n, ctx.config->cutoff));
    record.diag_sz.push_back(m(n, n));
  });

  if (dim >= 3) {
    const GapRatios g = gap_ratios({energies.data(), static_cast<std::size_t>(dim)});
    record.n_gap_degenerate = g.n_degenerate;
    if (ctx.window_rows.empty()) {
      record.gap_ratios = g.ratios;
    } else {
      for (Index n : ctx.window_rows)
        if (n >= 1 && n + 1 < dim) record.gap_ratios.push_back(g.ratios[static_cast<std::size_t>(n - 1)]);
    }
  }

  if (!ctx.edges.empty()) {
    const SpectralHistogram hist =
        spectral_histogram(m, energies, ctx.edges, ctx.dimension_norm, ctx.window_rows);
    record.hist_weight = hist.weight;
    record.underflow = hist.underflow;
    record.overflow = hist.overflow;
    record.sum_rule_residual = sum_rule_report(hist, m, ctx.window_rows).residual;
  }
  return record;
}

RealizationRecord compute_one(const GroupContext& ctx, int k) {
  const std::uint64_t seed = realization_seed(*ctx.config, ctx.length, ctx.w_index, k);
  try {
    return probe_one(ctx, k, decompose_one(ctx, seed));
  } catch (const EigensolverError& err) {
    RealizationRecord record;
    record.length = ctx.length;
    record.w_index = ctx.w_index;
    record.disorder = ctx.disorder;
    record.k = k;
    record.seed = seed;
    record.failed = true;
    record.failure = err.what();
    return record;
  }
}

struct ExistingGroup {
  bool has_meta = false;
  RecordsMeta meta;
  std::set<int> done;
};

ExistingGroup scan_records_file(const fs::path& path) {
  ExistingGroup existing;
  std::ifstream in(path);
  if (!in) return existing;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (is_meta_line(line)) {
      existing.meta = parse_meta(line);
      existing.has_meta = true;
    } else if (is_record_line(line)) {
      existing.done.insert(parse_record(line).k);
    }
  }
  return existing;
}

void check_provenance(const RunConfig& config, const fs::path& outdir) {
  const fs::path cfg_path = outdir / "config.txt";
  const std::string digest = config_digest_hex(config);
  if (fs::exists(cfg_path)) {
    std::ifstream in(cfg_path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.rfind("digest=", 0) == 0) {
        if (line.substr(7) != digest)
          throw ConfigError({"output directory '" + outdir.string() +
                             "' already holds records for a different configuration"});
        return;
      }
    }
    throw ConfigError({"output directory '" + outdir.string() + "' holds an unreadable config.txt"});
  }
  std::ofstream out(cfg_path);
  out << "digest=" << digest << "\n";
  out << "version=" << version_string << "\n";
  out << canonical_config(config);
  if (!out) throw std::runtime_error("cannot write " + cfg_path.string());
}

struct LogSink {
  std::ostream* stream = nullptr;
  std::mutex* mutex = nullptr;
  void operator()(const std::string& message) const {
    if (!stream) return;
    std::lock_guard lock(*mutex);
    (*stream) << message << '\n';
    stream->flush();
  }
};

}  // namespace

void run_ensemble(const RunConfig& config, std::ostream* log) {
  validate_run_config(config);
  const fs::path outdir(config.outdir);
  fs::create_directories(outdir);
  check_provenance(config, outdir);

  std::mutex log_mutex;
  LogSink info{log, &log_mutex};

  int resolved_workers = resolve_workers(config);
  const bool explicit_workers = config.workers > 0 || std::getenv("XXZPROBE_WORKERS") != nullptr;

  for (const int length : config.lengths) {
    const int two_m = sector_two_m(config, length);
    const SectorBasis basis(length, two_m);
    const Index dim = basis.size();

    std::vector<Index> window_rows;
    if (config.middle_window)
      for (Index n = dim / 4; n < (3 * dim) / 4; ++n) window_rows.push_back(n);
    const double states_averaged =
        static_cast<double>(window_rows.empty() ? dim : static_cast<Index>(window_rows.size()));
    const double dimension_norm =
        config.hilbert_normalization ? std::pow(2.0, length) : states_averaged;

    int workers = resolved_workers;
    if (!explicit_workers) {
      // keep the resident set of concurrent decompositions under the cap
      const double per_task = 4.0 * 8.0 * static_cast<double>(dim) * static_cast<double>(dim);
      const double cap = config.memory_cap_gib * 1073741824.0;
      while (workers > 1 && workers * per_task > cap) --workers;
    }

    for (int w_index = 0; w_index < static_cast<int>(config.disorders.size()); ++w_index) {
      GroupContext ctx;
      ctx.config = &config;
      ctx.basis = &basis;
      ctx.length = length;
      ctx.w_index = w_index;
      ctx.disorder = config.disorders[static_cast<std::size_t>(w_index)];
      ctx.dimension_norm = dimension_norm;
      ctx.window_rows = window_rows;
      ctx.solver =
          SolverOptions{config.residual_tol, config.ortho_tol, resolve_verify(config, dim), 48};

      const fs::path records_path = outdir / records_filename(length, w_index);
      ExistingGroup existing = scan_records_file(records_path);
      if (existing.has_meta && existing.meta.config_digest != config_digest_hex(config))
        throw ConfigError({"records file '" + records_path.string() + "' belongs to a different configuration"});

      std::ofstream out(records_path, std::ios::app);
      if (!out) throw std::runtime_error("cannot open " + records_path.string() + " for appending");

      const auto t_group = std::chrono::steady_clock::now();
      info("group L=" + std::to_string(length) + " W=" + format_double(ctx.disorder) + " dim=" +
           std::to_string(dim) + " (" + std::to_string(existing.done.size()) + "/" +
           std::to_string(config.realizations) + " records present)");

      if (existing.has_meta) {
        ctx.edges = existing.meta.edges;
      } else {
        // bootstrap the bin edges from the first computable realization
        int k0 = 0;
        while (k0 < config.realizations) {
          const std::uint64_t seed = realization_seed(config, length, w_index, k0);
          try {
            const Decomposed d0 = decompose_one(ctx, seed);
            if (dim >= 2 && d0.delta_bar > 0 && d0.bandwidth > 1e-3 * d0.delta_bar)
              ctx.edges = log_spaced_edges(1e-3 * d0.delta_bar, d0.bandwidth, config.bins_per_decade);
            RecordsMeta meta;
            meta.version = version_string;
            meta.config_digest = config_digest_hex(config);
            meta.length = length;
            meta.w_index = w_index;
            meta.disorder = ctx.disorder;
            meta.anisotropy = config.anisotropy;
            meta.two_m = two_m;
            meta.probe_site = config.probe_site;
            meta.cutoff = config.cutoff;
            meta.periodic = config.periodic;
            meta.middle_window = config.middle_window;
            meta.normalization = config.hilbert_normalization ? "hilbert" : "sector";
            meta.dimension_norm = dimension_norm;
            meta.dim = dim;
            meta.zeta_bin_width = config.zeta_bin_width;
            meta.edges = ctx.edges;
            out << serialize_meta(meta) << '\n';
            out << serialize_record(probe_one(ctx, k0, d0)) << '\n';
            out.flush();
            if (!out) throw std::runtime_error("I/O failure on " + records_path.string());
            existing.done.insert(k0);
            break;
          } catch (const EigensolverError& err) {
            RealizationRecord failed;
            failed.length = length;
            failed.w_index = w_index;
            failed.disorder = ctx.disorder;
            failed.k = k0;
            failed.seed = seed;
            failed.failed = true;
            failed.failure = err.what();
            out << serialize_record(failed) << '\n';
            out.flush();
            existing.done.insert(k0);
            ++k0;
          }
        }
      }

      std::vector<int> tasks;
      for (int k = 0; k < config.realizations; ++k)
        if (!existing.done.contains(k)) tasks.push_back(k);

      if (!tasks.empty()) {
        std::atomic<std::size_t> next{0};
        std::atomic<bool> io_failed{false};
        std::atomic<int> finished{0};
        std::mutex write_mutex;
        auto work = [&] {
          std::size_t i;
          while ((i = next.fetch_add(1)) < tasks.size() && !io_failed.load()) {
            const RealizationRecord record = compute_one(ctx, tasks[i]);
            const std::string line = serialize_record(record);
            std::lock_guard lock(write_mutex);
            out << line << '\n';
            out.flush();
            if (!out) io_failed.store(true);
            ++finished;
          }
        };
        const int n_threads = std::min<int>(workers, static_cast<int>(tasks.size()));
        std::vector<std::thread> threads;
        threads.reserve(static_cast<std::size_t>(n_threads));
        for (int t = 0; t < n_threads; ++t) threads.emplace_back(work);
        for (auto& t : threads) t.join();
        if (io_failed.load())
          throw std::runtime_error("I/O failure while appending to " + records_path.string());
      }

      const double elapsed =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t_group).count();
      info("group L=" + std::to_string(length) + " W=" + format_double(ctx.disorder) + " done in " +
           std::to_string(elapsed) + " s");
    }
  }

  write_summaries(config.outdir, aggregate_directory(config.outdir, log));
}

EnsembleSummary aggregate_records(const RecordsMeta& meta, std::vector<RealizationRecord> records,
                                  double zeta_bin_width) {
  std::sort(records.begin(), records.end(),
            [](const RealizationRecord& a, const RealizationRecord& b) { return a.k < b.k; });

  EnsembleSummary s;
  s.length = meta.length;
  s.two_m = meta.two_m;
  s.w_index = meta.w_index;
  s.disorder = meta.disorder;
  s.dim = meta.dim;
  s.dimension_norm = meta.dimension_norm;
  s.edges = meta.edges;

  std::vector<double> chis, diag_sz, ratios, zetas;
  std::vector<double> log_spacings, bandwidths;
  const std::size_t n_bins = meta.edges.empty() ? 0 : meta.edges.size() - 1;
  std::vector<long double> weight_sum(n_bins, 0.0L);
  std::vector<long double> log_density(n_bins, 0.0L);
  std::vector<int> nonzero(n_bins, 0);
  long double under = 0, over = 0;

  for (const auto& record : records) {
    if (record.failed) {
      ++s.n_failed;
      continue;
    }
    ++s.n_records;
    chis.insert(chis.end(), record.chi.begin(), record.chi.end());
    diag_sz.insert(diag_sz.end(), record.diag_sz.begin(), record.diag_sz.end());
    ratios.insert(ratios.end(), record.gap_ratios.begin(), record.gap_ratios.end());
    s.n_gap_degenerate += record.n_gap_degenerate;
    s.max_sum_rule_residual = std::max(s.max_sum_rule_residual, record.sum_rule_residual);
    if (record.delta_bar > 0) log_spacings.push_back(std::log(record.delta_bar));
    bandwidths.push_back(record.bandwidth);
    under += record.underflow;
    over += record.overflow;
    for (std::size_t b = 0; b < n_bins && b < record.hist_weight.size(); ++b) {
      const double w = record.hist_weight[b];
      weight_sum[b] += w;
      if (w > 0) {
        const double width = meta.edges[b + 1] - meta.edges[b];
        log_density[b] += std::log(w / (2.0 * width));
        ++nonzero[b];
      }
    }
  }

  for (double c : chis) {
    if (c > 0 && std::isfinite(c)) zetas.push_back(std::log(c));
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  try {
    const SusceptibilityStats stats = typical_log_susceptibility(chis);
    s.zeta = stats.zeta;
    s.chi_mean = stats.chi_mean;
    s.chi_typ_scaled = std::exp(stats.zeta) / meta.dimension_norm;
    s.n_chi_zero = stats.n_zero;
    s.n_chi_infinite = stats.n_infinite;
  } catch (const std::invalid_argument&) {
    s.zeta = s.chi_mean = s.chi_typ_scaled = nan;
  }
  try {
    const ConservedFraction f = conserved_fraction(diag_sz);
    s.conserved_z = f.value;
    s.n_sz_zero = f.n_zero;
  } catch (const std::exception&) {
    s.conserved_z = nan;
  }
  s.r_mean = ratios.empty() ? nan : mean(ratios);
  try {
    s.tail_slope = fit_zeta_tail(zetas, zeta_bin_width).slope;
  } catch (const std::exception&) {
    s.tail_slope = nan;
  }
  s.delta_bar = log_spacings.empty() ? nan : std::exp(mean(log_spacings));
  s.bandwidth = bandwidths.empty() ? nan : mean(bandwidths);
  s.total_underflow = static_cast<double>(under);
  s.total_overflow = static_cast<double>(over);

  s.mean_density.assign(n_bins, 0.0);
  s.typical_density.assign(n_bins, 0.0);
  s.count_nonzero.assign(nonzero.begin(), nonzero.end());
  for (std::size_t b = 0; b < n_bins; ++b) {
    const double width = meta.edges[b + 1] - meta.edges[b];
    if (s.n_records > 0)
      s.mean_density[b] = static_cast<double>(weight_sum[b]) / (2.0 * width * s.n_records);
    if (nonzero[b] > 0)
      s.typical_density[b] = std::exp(static_cast<double>(log_density[b] / nonzero[b]));
  }
  return s;
}

std::vector<EnsembleSummary> aggregate_directory(const std::string& outdir, std::ostream* log) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(outdir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("records_", 0) == 0 && name.ends_with(".txt")) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<EnsembleSummary> summaries;
  for (const auto& path : files) {
    std::ifstream in(path);
    std::string line;
    bool has_meta = false;
    RecordsMeta meta;
    std::vector<RealizationRecord> records;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (is_meta_line(line)) {
        meta = parse_meta(line);
        has_meta = true;
      } else if (is_record_line(line)) {
        records.push_back(parse_record(line));
      }
    }
    if (!has_meta || records.empty()) {
      if (log) (*log) << "warning: skipping " << path.string() << " (no usable records)\n";
      continue;
    }
    summaries.push_back(aggregate_records(meta, std::move(records), meta.zeta_bin_width));
  }
  return summaries;
}

namespace {

const char* summary_header =
    "L\ttwo_M\tw_index\tW\tdim\tD\tn_records\tn_failed\tzeta\tchi_mean\tchi_typ_scaled\tZ\tr_mean\t"
    "tail_slope\tdelta_bar\tbandwidth\tmax_sum_rule_residual\tn_chi_zero\tn_chi_inf\tn_sz_zero\t"
    "n_gap_degenerate\tunderflow\toverflow";

}  // namespace

void write_summaries(const std::string& outdir, const std::vector<EnsembleSummary>& summaries) {
  std::vector<const EnsembleSummary*> sorted;
  sorted.reserve(summaries.size());
  for (const auto& s : summaries) sorted.push_back(&s);
  std::sort(sorted.begin(), sorted.end(), [](const EnsembleSummary* a, const EnsembleSummary* b) {
    return std::tie(a->length, a->w_index) < std::tie(b->length, b->w_index);
  });

  const fs::path dir(outdir);
  std::ofstream out(dir / "summary.tsv");
  out << summary_header << '\n';
  for (const EnsembleSummary* s : sorted) {
    out << s->length << '\t' << s->two_m << '\t' << s->w_index << '\t' << format_double(s->disorder)
        << '\t' << s->dim << '\t' << format_double(s->dimension_norm) << '\t' << s->n_records << '\t'
        << s->n_failed << '\t' << format_double(s->zeta) << '\t' << format_double(s->chi_mean) << '\t'
        << format_double(s->chi_typ_scaled) << '\t' << format_double(s->conserved_z) << '\t'
        << format_double(s->r_mean) << '\t' << format_double(s->tail_slope) << '\t'
        << format_double(s->delta_bar) << '\t' << format_double(s->bandwidth) << '\t'
        << format_double(s->max_sum_rule_residual) << '\t' << s->n_chi_zero << '\t'
        << s->n_chi_infinite << '\t' << s->n_sz_zero << '\t' << s->n_gap_degenerate << '\t'
        << format_double(s->total_underflow) << '\t' << format_double(s->total_overflow) << '\n';
  }
  if (!out) throw std::runtime_error("cannot write summary.tsv under " + outdir);

  for (const EnsembleSummary* s : sorted) {
    if (s->edges.empty()) continue;
    char name[48];
    std::snprintf(name, sizeof name, "spectral_L%02d_w%03d.tsv", s->length, s->w_index);
    std::ofstream table(dir / name);
    table << "# L=" << s->length << " w_index=" << s->w_index << " W=" << format_double(s->disorder)
          << " n_records=" << s->n_records << " D=" << format_double(s->dimension_norm)
          << " underflow=" << format_double(s->total_underflow)
          << " overflow=" << format_double(s->total_overflow) << '\n';
    table << "edge_lo\tedge_hi\tmean_density\ttypical_density\tcount\n";
    for (std::size_t b = 0; b + 1 < s->edges.size(); ++b) {
      table << format_double(s->edges[b]) << '\t' << format_double(s->edges[b + 1]) << '\t'
            << format_double(s->mean_density[b]) << '\t' << format_double(s->typical_density[b])
            << '\t' << s->count_nonzero[b] << '\n';
    }
    if (!table) throw std::runtime_error("cannot write spectral table under " + outdir);
  }
}

std::vector<EnsembleSummary> read_summaries(const std::string& outdir) {
  const fs::path dir(outdir);
  std::ifstream in(dir / "summary.tsv");
  if (!in) throw std::runtime_error("cannot open summary.tsv under " + outdir);
  std::string line;
  if (!std::getline(in, line) || line != summary_header)
    throw std::runtime_error("summary.tsv has an unexpected header");

  std::vector<EnsembleSummary> summaries;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    EnsembleSummary s;
    std::string field;
    auto next = [&]() -> std::string {
      if (!std::getline(row, field, '\t')) throw std::runtime_error("summary.tsv: truncated row");
      return field;
    };
    s.length = std::stoi(next());
    s.two_m = std::stoi(next());
    s.w_index = std::stoi(next());
    s.disorder = std::strtod(next().c_str(), nullptr);
    s.dim = std::stoll(next());
    s.dimension_norm = std::strtod(next().c_str(), nullptr);
    s.n_records = std::stoi(next());
    s.n_failed = std::stoi(next());
    s.zeta = std::strtod(next().c_str(), nullptr);
    s.chi_mean = std::strtod(next().c_str(), nullptr);
    s.chi_typ_scaled = std::strtod(next().c_str(), nullptr);
    s.conserved_z = std::strtod(next().c_str(), nullptr);
    s.r_mean = std::strtod(next().c_str(), nullptr);
    s.tail_slope = std::strtod(next().c_str(), nullptr);
    s.delta_bar = std::strtod(next().c_str(), nullptr);
    s.bandwidth = std::strtod(next().c_str(), nullptr);
    s.max_sum_rule_residual = std::strtod(next().c_str(), nullptr);
    s.n_chi_zero = std::stoll(next());
    s.n_chi_infinite = std::stoll(next());
    s.n_sz_zero = std::stoll(next());
    s.n_gap_degenerate = std::stoll(next());
    s.total_underflow = std::strtod(next().c_str(), nullptr);
    s.total_overflow = std::strtod(next().c_str(), nullptr);

    char name[48];
    std::snprintf(name, sizeof name, "spectral_L%02d_w%03d.tsv", s.length, s.w_index);
    std::ifstream table(dir / name);
    if (table) {
      std::string tline;
      while (std::getline(table, tline)) {
        if (tline.empty() || tline[0] == '#' || tline.rfind("edge_lo", 0) == 0) continue;
        std::istringstream trow(tline);
        double lo, hi, mean_d, typ_d;
        int count;
        trow >> lo >> hi >> mean_d >> typ_d >> count;
        if (s.edges.empty()) s.edges.push_back(lo);
        s.edges.push_back(hi);
        s.mean_density.push_back(mean_d);
        s.typical_density.push_back(typ_d);
        s.count_nonzero.push_back(count);
      }
    }
    summaries.push_back(std::move(s));
  }
  return summaries;
}

SpectralHistogram mean_histogram(const EnsembleSummary& summary) {
  SpectralHistogram hist;
  hist.edges = summary.edges;
  hist.dimension = summary.dimension_norm;
  hist.n_realizations = summary.n_records;
  hist.underflow = summary.total_underflow;
  hist.overflow = summary.total_overflow;
  hist.density = summary.mean_density;
  hist.weight.resize(summary.mean_density.size());
  for (std::size_t b = 0; b < hist.weight.size(); ++b) {
    const double width = summary.edges[b + 1] - summary.edges[b];
    hist.weight[b] = summary.mean_density[b] * 2.0 * width * summary.n_records;
  }
  return hist;
}

std::vector<double> collect_zetas(const std::string& outdir, int length, int w_index) {
  const fs::path path = fs::path(outdir) / records_filename(length, w_index);
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<double> zetas;
  std::string line;
  while (std::getline(in, line)) {
    if (!is_record_line(line)) continue;
    const RealizationRecord record = parse_record(line);
    if (record.failed) continue;
    for (double c : record.chi)
      if (c > 0 && std::isfinite(c)) zetas.push_back(std::log(c));
  }
  return zetas;
}

}  // namespace xxz
