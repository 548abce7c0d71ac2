#pragma once

// Declarative run configuration and the pipeline stages behind the CLI.
// Every stage returns its output files as (name, content) pairs; writing
// them is the caller's job, which keeps stages pure and testable.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "nvmdse/cachesim.hpp"
#include "nvmdse/calibrate.hpp"
#include "nvmdse/error.hpp"
#include "nvmdse/isoarea.hpp"
#include "nvmdse/isocap.hpp"
#include "nvmdse/kvtext.hpp"
#include "nvmdse/sweep.hpp"
#include "nvmdse/techlib.hpp"
#include "nvmdse/tuner.hpp"
#include "nvmdse/workloads.hpp"

namespace nvmdse {

/// Output file name -> content, in emission order.
using OutputFiles = std::vector<std::pair<std::string, std::string>>;

struct RunConfig {
  std::filesystem::path base_dir;  // relative paths resolve against this

  std::optional<std::filesystem::path> tech;  // absent: builtin defaults
  std::map<MemoryKind, std::filesystem::path> bitcells;  // absent kinds: builtin
  std::optional<std::filesystem::path> anchors;
  std::vector<MemoryKind> kinds = {kAllKinds.begin(), kAllKinds.end()};
  std::vector<std::uint64_t> capacities = default_capacities();
  MemoryKind baseline = MemoryKind::SRAM;

  std::optional<std::filesystem::path> profiles;  // absent: synthetic suite
  SuiteSpec suite;
  std::vector<std::uint32_t> batch_sizes = {1, 4, 16, 64, 256};

  std::optional<std::filesystem::path> trace;  // .cfg = generator spec, else a trace file
  std::uint64_t isocap_capacity = 3 * kMiB;
  std::uint64_t isoarea_base_capacity = 3 * kMiB;
  std::vector<std::uint64_t> reduction_capacities = {4 * kMiB, 6 * kMiB, 7 * kMiB, 8 * kMiB, 10 * kMiB, 12 * kMiB,
                                                     16 * kMiB, 24 * kMiB};
  double area_slack = 0.025;
  AnalysisOptions analysis;
  /// The capacity sweep compares caches alone unless this is set.
  bool sweep_include_dram = false;
  CalibrationOptions calibration;
  /// Later stages of the same run use the calibrated coefficients instead of
  /// the configured ones.
  bool apply_calibration = false;

  std::filesystem::path output = "out";
  std::optional<std::uint64_t> seed;
};

namespace detail {

inline std::vector<std::string> list_items(const std::string& value) {
  std::vector<std::string> out;
  for (const auto& item : split(value, ',')) {
    const auto t = trim(item);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

inline std::vector<std::uint64_t> parse_mb_list(const std::string& key, const std::string& value) {
  std::vector<std::uint64_t> out;
  for (const auto& item : list_items(value)) {
    const auto v = parse_double(item);
    if (!v || !(*v > 0.0)) throw InvalidValue(key, "expected positive MB values, got '" + item + "'");
    out.push_back(static_cast<std::uint64_t>(std::llround(*v * static_cast<double>(kMiB))));
  }
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw InvalidValue(key, "expected true or false, got '" + value + "'");
}

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace detail

inline const std::vector<std::string>& run_config_keys() {
  static const std::vector<std::string> keys = {
      "tech",          "sram_bitcell",       "stt_bitcell",           "sot_bitcell",       "anchors",
      "kinds",         "capacities_mb",      "baseline",              "profiles",          "batch_sizes",
      "trace",         "isocap_capacity_mb", "isoarea_base_mb",       "reduction_capacities_mb",
      "area_slack",    "include_dram",       "delay_convention",      "calibration_tolerance",
      "calibration_ceiling", "apply_calibration", "sweep_include_dram", "output", "seed"};
  return keys;
}

/// Parses a run configuration; relative paths resolve against `base_dir`.
/// "builtin" selects builtin data for tech, bitcells and "synthetic" the
/// generated profile suite.
inline RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir) {
  const auto doc = KvDocument::parse(text);
  RunConfig c;
  c.base_dir = base_dir;
  for (const auto& k : doc.keys())
    if (std::find(run_config_keys().begin(), run_config_keys().end(), k) == run_config_keys().end())
      throw InvalidValue(k, "unknown run configuration key");
  auto path_or_builtin = [&](const std::string& key, const char* builtin) -> std::optional<std::filesystem::path> {
    if (!doc.has(key) || doc.str(key) == builtin) return std::nullopt;
    return detail::resolve(base_dir, doc.str(key));
  };
  c.tech = path_or_builtin("tech", "builtin");
  for (const auto& [key, kind] : {std::pair{"sram_bitcell", MemoryKind::SRAM}, std::pair{"stt_bitcell", MemoryKind::STT_MRAM},
                                  std::pair{"sot_bitcell", MemoryKind::SOT_MRAM}})
    if (auto p = path_or_builtin(key, "builtin")) c.bitcells[kind] = *p;
  c.anchors = path_or_builtin("anchors", "none");
  if (doc.has("kinds")) {
    c.kinds.clear();
    for (const auto& k : detail::list_items(doc.str("kinds"))) c.kinds.push_back(parse_memory_kind(k));
  }
  if (doc.has("capacities_mb")) c.capacities = detail::parse_mb_list("capacities_mb", doc.str("capacities_mb"));
  if (doc.has("baseline")) c.baseline = parse_memory_kind(doc.str("baseline"));
  c.profiles = path_or_builtin("profiles", "synthetic");
  if (doc.has("batch_sizes")) {
    c.batch_sizes.clear();
    for (const auto& b : detail::list_items(doc.str("batch_sizes"))) {
      const auto v = detail::parse_int(b);
      if (!v || *v <= 0) throw InvalidValue("batch_sizes", "expected positive integers, got '" + b + "'");
      c.batch_sizes.push_back(static_cast<std::uint32_t>(*v));
    }
  }
  c.trace = path_or_builtin("trace", "none");
  if (doc.has("isocap_capacity_mb"))
    c.isocap_capacity = detail::parse_mb_list("isocap_capacity_mb", doc.str("isocap_capacity_mb")).at(0);
  if (doc.has("isoarea_base_mb"))
    c.isoarea_base_capacity = detail::parse_mb_list("isoarea_base_mb", doc.str("isoarea_base_mb")).at(0);
  if (doc.has("reduction_capacities_mb"))
    c.reduction_capacities = detail::parse_mb_list("reduction_capacities_mb", doc.str("reduction_capacities_mb"));
  c.area_slack = doc.number_or("area_slack", c.area_slack);
  if (doc.has("include_dram")) c.analysis.include_dram = detail::parse_bool("include_dram", doc.str("include_dram"));
  if (doc.has("delay_convention")) c.analysis.delay = parse_delay_convention(doc.str("delay_convention"));
  c.calibration.tolerance = doc.number_or("calibration_tolerance", c.calibration.tolerance);
  c.calibration.ceiling = doc.number_or("calibration_ceiling", c.calibration.ceiling);
  if (doc.has("sweep_include_dram"))
    c.sweep_include_dram = detail::parse_bool("sweep_include_dram", doc.str("sweep_include_dram"));
  if (doc.has("apply_calibration"))
    c.apply_calibration = detail::parse_bool("apply_calibration", doc.str("apply_calibration"));
  if (doc.has("output")) c.output = detail::resolve(base_dir, doc.str("output"));
  if (doc.has("seed")) {
    const auto v = detail::parse_int(doc.str("seed"));
    if (!v || *v < 0) throw InvalidValue("seed", "expected a non-negative integer");
    c.seed = static_cast<std::uint64_t>(*v);
  }
  return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(detail::read_file(path.string()), path.parent_path());
}

/// Fail-fast checks of every invariant, before any computation.
inline void validate(const RunConfig& c) {
  auto exists = [](const std::optional<std::filesystem::path>& p) {
    if (p && !std::filesystem::exists(*p)) throw FileNotFound(p->string());
  };
  exists(c.tech);
  exists(c.anchors);
  exists(c.profiles);
  exists(c.trace);
  for (const auto& [kind, p] : c.bitcells) exists(p);
  if (c.kinds.empty()) throw InvalidValue("kinds", "no memory kinds selected");
  if (c.capacities.empty()) throw InvalidValue("capacities_mb", "capacity grid is empty");
  if (std::find(c.kinds.begin(), c.kinds.end(), c.baseline) == c.kinds.end())
    throw InvalidValue("baseline", std::string(to_string(c.baseline)) + " is not among the selected kinds");
  const std::uint64_t way_bytes = 128 * 16;
  auto check_caps = [&](const char* key, const std::vector<std::uint64_t>& caps) {
    for (const auto cap : caps)
      if (cap == 0 || cap % way_bytes != 0)
        throw InvalidValue(key, std::to_string(cap) + " bytes is not a multiple of 128 B x 16 ways");
  };
  check_caps("capacities_mb", c.capacities);
  check_caps("reduction_capacities_mb", c.reduction_capacities);
  check_caps("isocap_capacity_mb", {c.isocap_capacity});
  check_caps("isoarea_base_mb", {c.isoarea_base_capacity});
  if (!(c.area_slack >= 0.0)) throw InvalidValue("area_slack", "must be >= 0");
  if (!(c.calibration.tolerance > 0.0) || !(c.calibration.ceiling >= c.calibration.tolerance))
    throw InvalidValue("calibration_ceiling", "need 0 < tolerance <= ceiling");
  for (const auto b : c.batch_sizes)
    if (b == 0) throw InvalidValue("batch_sizes", "batch sizes must be positive");
}

// ---------------------------------------------------------------------------
// Inputs

struct PipelineInputs {
  TechConfig tech;
  BitcellSet cells;
};

inline PipelineInputs load_inputs(const RunConfig& c) {
  PipelineInputs in;
  if (c.tech) in.tech = load_tech_file(c.tech->string());
  for (const auto k : kAllKinds) {
    const auto it = c.bitcells.find(k);
    BitcellParams b = it != c.bitcells.end() ? load_bitcell_file(it->second.string()) : builtin_bitcell(k);
    if (b.kind != k)
      throw InvalidValue("kind", "bitcell file for " + std::string(to_string(k)) + " declares " + std::string(to_string(b.kind)));
    in.cells[k] = b;
  }
  return in;
}

inline SuiteSpec effective_suite(const RunConfig& c) {
  SuiteSpec s = c.suite;
  if (c.seed) s.seed = *c.seed;
  return s;
}

inline std::vector<WorkloadProfile> load_workloads(const RunConfig& c) {
  if (c.profiles) return load_profiles(c.profiles->string());
  return synth_suite(effective_suite(c));
}

/// Synthetic suite over every configured batch size, for batch studies.
inline std::vector<WorkloadProfile> synthetic_batch_profiles(const RunConfig& c) {
  const auto spec = effective_suite(c);
  std::vector<std::uint32_t> batches = c.batch_sizes;
  std::sort(batches.begin(), batches.end());
  batches.erase(std::unique(batches.begin(), batches.end()), batches.end());
  std::vector<WorkloadProfile> out;
  std::uint64_t k = 0;
  for (const auto& dnn : builtin_dnns())
    for (const Stage s : {Stage::Inference, Stage::Training})
      for (const auto b : batches) out.push_back(synth_suite_profile(dnn, s, b, spec, spec.seed * 1000 + 500 + k++));
  return out;
}

inline MemoryTrace load_run_trace(const RunConfig& c) {
  if (!c.trace) throw InvalidValue("trace", "this stage needs a trace or a trace generator spec");
  if (c.trace->extension() == ".cfg") {
    auto spec = TraceGenSpec::from_document(KvDocument::load(c.trace->string()));
    return generate_trace(spec);
  }
  return load_trace(c.trace->string());
}

// ---------------------------------------------------------------------------
// Stages

struct StageResult {
  OutputFiles files;
  std::vector<std::string> messages;  // progress lines for stdout
  std::vector<std::string> failures;  // per-item errors tolerated under keep-going
};

inline StageResult run_calibrate(const RunConfig& c, PipelineInputs& in) {
  if (!c.anchors) throw InvalidValue("anchors", "calibration needs an anchors file");
  const auto anchors = load_anchors(c.anchors->string());
  ModelState start{in.tech, in.cells.at(MemoryKind::SRAM)};
  BitcellSet mram = in.cells;
  mram.erase(MemoryKind::SRAM);
  const auto res = calibrate(anchors, start, c.calibration, mram);
  if (c.apply_calibration) {
    in.tech = res.state.tech;
    in.cells[MemoryKind::SRAM] = res.state.sram;
  }
  StageResult out;
  out.files.emplace_back("calibrated_tech.cfg", serialize(res.state.tech));
  out.files.emplace_back("calibrated_sram_bitcell.cfg", serialize(res.state.sram));
  out.files.emplace_back("calibration_residuals.csv", residual_table(res.residuals));
  for (const auto& r : res.residuals)
    out.messages.push_back(std::string(to_string(r.kind)) + " " + detail::format_double(static_cast<double>(r.capacity) / kMiB) +
                           " MB " + std::string(column_name(r.metric)) + ": " + detail::format_fixed(r.rel_error * 100.0, 2) +
                           "%");
  out.messages.push_back("max relative error " + detail::format_fixed(res.max_error * 100.0, 2) + "% after " +
                         std::to_string(res.sweeps) + " sweeps");
  return out;
}

inline StageResult run_tune(const RunConfig& c, const PipelineInputs& in, bool keep_going) {
  const auto all = tune_all(c.kinds, c.capacities, in.tech, in.cells);
  StageResult out;
  for (const auto& f : all.failures) {
    const std::string msg = std::string(to_string(f.kind)) + " " + std::to_string(f.capacity) + " B: " + f.error;
    if (!keep_going) throw InfeasibleCapacity(msg);
    out.failures.push_back(msg);
  }
  out.files.emplace_back("tuned.csv", to_csv(all.configs));
  out.files.emplace_back("tuned.json", to_json(all.configs).dump(2) + "\n");
  out.messages.push_back(std::to_string(all.configs.size()) + " tuned configurations");
  return out;
}

inline StageResult run_isocap(const RunConfig& c, const PipelineInputs& in) {
  std::map<MemoryKind, TunedConfig> designs;
  for (const auto k : c.kinds) designs[k] = tune(k, c.isocap_capacity, in.tech, in.cells);
  const auto profiles = load_workloads(c);
  const auto report = analyze_all(profiles, designs, c.baseline, in.tech, c.analysis);

  // Batch study: every (dnn, stage) with at least two batch sizes.
  std::map<std::pair<std::string, Stage>, std::vector<WorkloadProfile>> groups;
  for (const auto& p : c.profiles ? profiles : synthetic_batch_profiles(c)) groups[{p.dnn, p.stage}].push_back(p);
  std::vector<BatchSeries> batch;
  for (const auto& [key, group] : groups) {
    std::vector<std::uint32_t> sizes;
    for (const auto& p : group) sizes.push_back(p.batch_size);
    std::sort(sizes.begin(), sizes.end());
    if (std::unique(sizes.begin(), sizes.end()) - sizes.begin() < 2) continue;
    for (const auto& [kind, design] : designs) {
      if (kind == c.baseline) continue;
      batch.push_back({key.first, key.second, kind, batch_sweep(group, design, designs.at(c.baseline), in.tech, c.analysis)});
    }
  }

  StageResult out;
  out.files.emplace_back("isocap_report.csv", report_to_csv(report));
  out.files.emplace_back("isocap_report.json", report_to_json(report).dump(2) + "\n");
  out.files.emplace_back("isocap_energy.csv", energy_plot_csv(report));
  out.files.emplace_back("isocap_edp.csv", edp_plot_csv(report));
  out.files.emplace_back("isocap_batch.csv", batch_plot_csv(batch));
  out.messages.push_back(std::to_string(report.size()) + " iso-capacity entries, " + std::to_string(batch.size()) +
                         " batch series");
  return out;
}

inline std::string stats_csv(const std::vector<std::pair<std::uint64_t, CacheStats>>& rows) {
  std::string out = "capacity_mb,accesses,hits,misses,dirty_evictions,dram_tx\n";
  for (const auto& [cap, s] : rows)
    out += detail::format_double(static_cast<double>(cap) / kMiB) + "," + std::to_string(s.accesses) + "," +
           std::to_string(s.hits) + "," + std::to_string(s.misses) + "," + std::to_string(s.dirty_evictions) + "," +
           std::to_string(s.dram_tx) + "\n";
  return out;
}

inline StageResult run_isoarea(const RunConfig& c, const PipelineInputs& in, bool keep_going) {
  StageResult out;
  const auto base = tune(c.baseline, c.isoarea_base_capacity, in.tech, in.cells);
  IsoAreaOptions opt;
  opt.slack = c.area_slack;
  std::map<MemoryKind, IsoAreaResult> iso;
  std::string cap_csv = "kind,budget_mm2,capacity_mb,area_mm2\n";
  for (const auto k : c.kinds) {
    if (k == c.baseline) continue;
    try {
      const auto r = iso_area_capacity(k, base.ppa.area, in.tech, in.cells, opt);
      iso[k] = r;
      cap_csv += std::string(to_string(k)) + "," + detail::format_double(r.budget) + "," +
                 detail::format_double(static_cast<double>(r.capacity) / kMiB) + "," + detail::format_double(r.tuned.ppa.area) +
                 "\n";
    } catch (const NoFeasibleCapacity& e) {
      if (!keep_going) throw;
      out.failures.push_back(e.what());
    }
  }

  const auto trace = load_run_trace(c);
  const auto base_cfg = CacheConfig::set_associative(c.isoarea_base_capacity);
  std::map<std::uint64_t, CacheStats> stats;
  stats[c.isoarea_base_capacity] = simulate_cache(trace, base_cfg);
  for (const auto cap : c.reduction_capacities) stats.emplace(cap, simulate_cache(trace, CacheConfig::set_associative(cap)));
  for (const auto& [k, r] : iso) stats.emplace(r.capacity, simulate_cache(trace, CacheConfig::set_associative(r.capacity)));

  std::vector<ReductionPoint> reduction;
  for (const auto cap : c.reduction_capacities) reduction.push_back({cap, dram_reduction(stats.at(c.isoarea_base_capacity), stats.at(cap))});
  std::vector<std::pair<std::uint64_t, CacheStats>> stat_rows(stats.begin(), stats.end());

  const auto profiles = load_workloads(c);
  AnalysisReport report;
  for (const auto& p : profiles)
    for (const auto& [k, r] : iso)
      report.push_back(isoarea_report(p, stats.at(c.isoarea_base_capacity), stats.at(r.capacity), base, r.tuned, in.tech,
                                      c.analysis));

  out.files.emplace_back("isoarea_capacities.csv", cap_csv);
  out.files.emplace_back("cache_stats.csv", stats_csv(stat_rows));
  out.files.emplace_back("dram_reduction.csv", reduction_csv(reduction));
  out.files.emplace_back("isoarea_report.csv", report_to_csv(report));
  out.files.emplace_back("isoarea_report.json", report_to_json(report).dump(2) + "\n");
  out.files.emplace_back("isoarea_edp.csv", edp_plot_csv(report));
  for (const auto& [k, r] : iso)
    out.messages.push_back(std::string(to_string(k)) + " iso-area capacity " +
                           detail::format_double(static_cast<double>(r.capacity) / kMiB) + " MB");
  return out;
}

inline StageResult run_sweep(const RunConfig& c, const PipelineInputs& in, bool keep_going) {
  StageResult out;
  std::vector<std::uint64_t> grid;
  for (const auto cap : c.capacities) {
    try {
      (void)enumerate_organizations(cap);
      grid.push_back(cap);
    } catch (const InfeasibleCapacity& e) {
      if (!keep_going) throw;
      out.failures.push_back(e.what());
    }
  }
  const auto profiles = load_workloads(c);
  AnalysisOptions opt = c.analysis;
  opt.include_dram = c.sweep_include_dram;
  const auto res = scalability_sweep(c.kinds, grid, profiles, in.tech, in.cells, opt);
  const auto norm = normalize_all(res.series, c.baseline);
  const auto cross = all_crossovers(res.series);
  out.files.emplace_back("sweep_series.csv", series_csv(res.series));
  out.files.emplace_back("sweep_series.json", series_json(res.series).dump(2) + "\n");
  out.files.emplace_back("sweep_normalized.csv", series_csv(norm));
  out.files.emplace_back("sweep_crossovers.csv", crossover_csv(cross));
  out.files.emplace_back("sweep_tuned.csv", to_csv(res.configs));
  out.messages.push_back(std::to_string(res.series.size()) + " series, " + std::to_string(cross.size()) + " crossovers");
  return out;
}

}  // namespace nvmdse
