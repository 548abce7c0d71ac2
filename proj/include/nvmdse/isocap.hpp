#pragma once

// Iso-capacity analysis: a tuned cache design plus a workload profile gives
// dynamic and leakage energy, a transaction delay, EDP, and ratios against a
// baseline design.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "nvmdse/error.hpp"
#include "nvmdse/kvtext.hpp"
#include "nvmdse/techlib.hpp"
#include "nvmdse/tuner.hpp"
#include "nvmdse/workloads.hpp"

namespace nvmdse {

/// Which time multiplies energy in EDP.
///   Transaction: serialized L2 (and optionally DRAM) transaction time.
///   Measured:    the profile's exec_time when present, else Transaction.
enum class DelayConvention { Transaction, Measured };

inline std::string_view to_string(DelayConvention d) {
  return d == DelayConvention::Transaction ? "transaction" : "measured";
}

inline DelayConvention parse_delay_convention(std::string_view s) {
  if (s == "transaction") return DelayConvention::Transaction;
  if (s == "measured") return DelayConvention::Measured;
  throw InvalidValue("delay_convention", "expected 'transaction' or 'measured', got '" + std::string(s) + "'");
}

struct AnalysisOptions {
  bool include_dram = true;
  DelayConvention delay = DelayConvention::Transaction;
};

/// Energies in mJ. `dram` is zero unless DRAM is included.
struct EnergyBreakdown {
  double dynamic_read = 0.0;
  double dynamic_write = 0.0;
  double leakage = 0.0;
  double dram = 0.0;
  double total = 0.0;

  double dynamic() const { return dynamic_read + dynamic_write; }
};

inline EnergyBreakdown make_breakdown(double read, double write, double leakage, double dram) {
  return {read, write, leakage, dram, read + write + leakage + dram};
}

inline constexpr double kNanojouleToMillijoule = 1e-6;
inline constexpr double kMilliwattNanosecondToMillijoule = 1e-9;

struct DynamicEnergy {
  double read = 0.0;   // mJ
  double write = 0.0;  // mJ
};

inline DynamicEnergy dynamic_energy(const WorkloadProfile& p, const TunedConfig& c) {
  return {static_cast<double>(p.l2_read_tx) * c.ppa.read_energy * kNanojouleToMillijoule,
          static_cast<double>(p.l2_write_tx) * c.ppa.write_energy * kNanojouleToMillijoule};
}

/// Leakage energy in mJ; exposure is exec_time if the profile has one,
/// otherwise `delay_fallback_ns`.
inline double leakage_energy(const WorkloadProfile& p, const TunedConfig& c, double delay_fallback_ns) {
  double exposure_ns = 0.0;
  if (p.exec_time_ms) {
    exposure_ns = *p.exec_time_ms * 1e6;
  } else {
    if (!(delay_fallback_ns > 0.0)) throw NonPositiveValue("delay_fallback");
    exposure_ns = delay_fallback_ns;
  }
  return c.ppa.leakage_power * exposure_ns * kMilliwattNanosecondToMillijoule;
}

/// Serialized transaction time in ns.
inline double memory_delay(const WorkloadProfile& p, const TunedConfig& c, const TechConfig& tech, bool include_dram) {
  double d = static_cast<double>(p.l2_read_tx) * c.ppa.read_latency +
             static_cast<double>(p.l2_write_tx) * c.ppa.write_latency;
  if (include_dram) d += static_cast<double>(p.dram_tx()) * tech.dram_access_latency;
  return d;
}

inline double dram_energy(const WorkloadProfile& p, const TechConfig& tech) {
  return static_cast<double>(p.dram_tx()) * tech.dram_access_energy * kNanojouleToMillijoule;
}

/// Evaluated cost of one profile on one design. Delays in ns, EDP in mJ*ns.
struct WorkloadCost {
  EnergyBreakdown breakdown;
  double delay = 0.0;
  double delay_with_dram = 0.0;
  double edp = 0.0;            // without DRAM energy and latency
  double edp_with_dram = 0.0;  // with both
};

inline WorkloadCost workload_cost(const WorkloadProfile& p, const TunedConfig& c, const TechConfig& tech,
                                  const AnalysisOptions& opt) {
  const auto dyn = dynamic_energy(p, c);
  const double t_mem = memory_delay(p, c, tech, false);
  const double t_mem_dram = memory_delay(p, c, tech, true);
  const bool measured = opt.delay == DelayConvention::Measured && p.exec_time_ms.has_value();
  const double exec_ns = p.exec_time_ms ? *p.exec_time_ms * 1e6 : 0.0;

  // Leakage exposure follows the measured run time when it exists.
  const double leak = p.exec_time_ms ? leakage_energy(p, c, 0.0) : c.ppa.leakage_power * t_mem * kMilliwattNanosecondToMillijoule;
  const double leak_dram =
      p.exec_time_ms ? leak : c.ppa.leakage_power * t_mem_dram * kMilliwattNanosecondToMillijoule;
  const double e_dram = dram_energy(p, tech);

  WorkloadCost w;
  w.delay = measured ? exec_ns : t_mem;
  w.delay_with_dram = measured ? exec_ns : t_mem_dram;
  const double e_without = dyn.read + dyn.write + leak;
  const double e_with = dyn.read + dyn.write + leak_dram + e_dram;
  w.edp = e_without * w.delay;
  w.edp_with_dram = e_with * w.delay_with_dram;
  w.breakdown = opt.include_dram ? make_breakdown(dyn.read, dyn.write, leak_dram, e_dram)
                                 : make_breakdown(dyn.read, dyn.write, leak, 0.0);
  return w;
}

/// x / baseline, with 0 / 0 defined as 1.
inline double safe_ratio(double x, double baseline) {
  if (x == 0.0 && baseline == 0.0) return 1.0;
  return x / baseline;
}

struct CostRatios {
  double dynamic_read = 1.0, dynamic_write = 1.0, dynamic = 1.0, leakage = 1.0, dram = 1.0, total = 1.0;
  double delay = 1.0, edp = 1.0, edp_with_dram = 1.0;
};

inline CostRatios cost_ratios(const WorkloadCost& x, const WorkloadCost& b, bool include_dram) {
  CostRatios r;
  r.dynamic_read = safe_ratio(x.breakdown.dynamic_read, b.breakdown.dynamic_read);
  r.dynamic_write = safe_ratio(x.breakdown.dynamic_write, b.breakdown.dynamic_write);
  r.dynamic = safe_ratio(x.breakdown.dynamic(), b.breakdown.dynamic());
  r.leakage = safe_ratio(x.breakdown.leakage, b.breakdown.leakage);
  r.dram = safe_ratio(x.breakdown.dram, b.breakdown.dram);
  r.total = safe_ratio(x.breakdown.total, b.breakdown.total);
  r.delay = include_dram ? safe_ratio(x.delay_with_dram, b.delay_with_dram) : safe_ratio(x.delay, b.delay);
  r.edp = safe_ratio(x.edp, b.edp);
  r.edp_with_dram = safe_ratio(x.edp_with_dram, b.edp_with_dram);
  return r;
}

struct AnalysisEntry {
  std::string dnn;
  Stage stage = Stage::Inference;
  std::uint32_t batch_size = 0;
  MemoryKind kind = MemoryKind::SRAM;
  std::uint64_t capacity = 0;
  MemoryKind baseline_kind = MemoryKind::SRAM;
  std::uint64_t baseline_capacity = 0;
  bool include_dram = true;
  WorkloadCost cost;
  WorkloadCost baseline_cost;
  CostRatios ratios;
};

using AnalysisReport = std::vector<AnalysisEntry>;

/// Compares a design against a baseline on possibly different profiles
/// (the iso-area path feeds each design its own DRAM traffic). No capacity
/// check.
inline AnalysisEntry compare_designs(const WorkloadProfile& p, const TunedConfig& c, const WorkloadProfile& p_base,
                                     const TunedConfig& baseline_c, const TechConfig& tech,
                                     const AnalysisOptions& opt) {
  AnalysisEntry e;
  e.dnn = p.dnn;
  e.stage = p.stage;
  e.batch_size = p.batch_size;
  e.kind = c.kind;
  e.capacity = c.capacity;
  e.baseline_kind = baseline_c.kind;
  e.baseline_capacity = baseline_c.capacity;
  e.include_dram = opt.include_dram;
  e.cost = workload_cost(p, c, tech, opt);
  e.baseline_cost = workload_cost(p_base, baseline_c, tech, opt);
  e.ratios = cost_ratios(e.cost, e.baseline_cost, opt.include_dram);
  return e;
}

inline AnalysisEntry analyze(const WorkloadProfile& p, const TunedConfig& c, const TunedConfig& baseline_c,
                             const TechConfig& tech, const AnalysisOptions& opt = {}) {
  if (c.capacity != baseline_c.capacity)
    throw CapacityMismatch("iso-capacity analysis needs equal capacities, got " + std::to_string(c.capacity) +
                           " and " + std::to_string(baseline_c.capacity) + " bytes");
  return compare_designs(p, c, p, baseline_c, tech, opt);
}

/// One entry per (profile, design) pair, profiles in input order and designs
/// in kind order. `designs` must hold the baseline kind.
inline AnalysisReport analyze_all(const std::vector<WorkloadProfile>& profiles,
                                  const std::map<MemoryKind, TunedConfig>& designs, MemoryKind baseline,
                                  const TechConfig& tech, const AnalysisOptions& opt = {}) {
  const auto base = designs.find(baseline);
  if (base == designs.end())
    throw InvalidValue("baseline", "no tuned design for baseline kind " + std::string(to_string(baseline)));
  AnalysisReport out;
  for (const auto& p : profiles)
    for (const auto& [kind, c] : designs) out.push_back(analyze(p, c, base->second, tech, opt));
  return out;
}

struct BatchPoint {
  std::uint32_t batch_size = 0;
  double edp_ratio = 0.0;
};

/// EDP ratio against the baseline per batch size, ascending. Uses the EDP
/// variant that matches opt.include_dram.
inline std::vector<BatchPoint> batch_sweep(const std::vector<WorkloadProfile>& profiles, const TunedConfig& c,
                                           const TunedConfig& baseline_c, const TechConfig& tech,
                                           const AnalysisOptions& opt = {}) {
  if (profiles.empty()) throw InvalidValue("profiles", "batch sweep needs at least two batch sizes");
  for (const auto& p : profiles)
    if (p.dnn != profiles.front().dnn || p.stage != profiles.front().stage)
      throw InvalidValue("profiles", "batch sweep profiles must share dnn and stage");
  std::vector<BatchPoint> out;
  for (const auto& p : profiles) {
    const auto e = analyze(p, c, baseline_c, tech, opt);
    out.push_back({p.batch_size, opt.include_dram ? e.ratios.edp_with_dram : e.ratios.edp});
  }
  std::sort(out.begin(), out.end(), [](const BatchPoint& a, const BatchPoint& b) { return a.batch_size < b.batch_size; });
  for (std::size_t i = 1; i < out.size(); ++i)
    if (out[i].batch_size == out[i - 1].batch_size)
      throw InvalidValue("profiles", "duplicate batch size " + std::to_string(out[i].batch_size));
  if (out.size() < 2) throw InvalidValue("profiles", "batch sweep needs at least two batch sizes");
  return out;
}

// ---------------------------------------------------------------------------
// Emission

inline std::vector<std::pair<std::string, double>> entry_metrics(const AnalysisEntry& e) {
  const auto& b = e.cost.breakdown;
  const auto& r = e.ratios;
  return {{"dynamic_read_mj", b.dynamic_read},
          {"dynamic_write_mj", b.dynamic_write},
          {"leakage_mj", b.leakage},
          {"dram_mj", b.dram},
          {"total_mj", b.total},
          {"delay_ns", e.include_dram ? e.cost.delay_with_dram : e.cost.delay},
          {"edp", e.cost.edp},
          {"edp_with_dram", e.cost.edp_with_dram},
          {"dynamic_read_ratio", r.dynamic_read},
          {"dynamic_write_ratio", r.dynamic_write},
          {"dynamic_ratio", r.dynamic},
          {"leakage_ratio", r.leakage},
          {"dram_ratio", r.dram},
          {"total_ratio", r.total},
          {"delay_ratio", r.delay},
          {"edp_ratio", r.edp},
          {"edp_with_dram_ratio", r.edp_with_dram}};
}

/// Long format: dnn,stage,batch_size,kind,metric,value.
inline std::string report_to_csv(const AnalysisReport& report) {
  std::string out = "dnn,stage,batch_size,kind,metric,value\n";
  for (const auto& e : report) {
    const std::string prefix = e.dnn + "," + std::string(to_string(e.stage)) + "," + std::to_string(e.batch_size) + "," +
                               std::string(to_string(e.kind)) + ",";
    for (const auto& [name, v] : entry_metrics(e)) out += prefix + name + "," + detail::format_double(v) + "\n";
  }
  return out;
}

inline nlohmann::ordered_json report_to_json(const AnalysisReport& report) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& e : report) {
    nlohmann::ordered_json j;
    j["dnn"] = e.dnn;
    j["stage"] = std::string(to_string(e.stage));
    j["batch_size"] = e.batch_size;
    j["kind"] = std::string(to_string(e.kind));
    j["capacity_bytes"] = e.capacity;
    j["baseline_kind"] = std::string(to_string(e.baseline_kind));
    j["baseline_capacity_bytes"] = e.baseline_capacity;
    j["include_dram"] = e.include_dram;
    nlohmann::ordered_json m;
    for (const auto& [name, v] : entry_metrics(e)) m[name] = v;
    j["metrics"] = m;
    arr.push_back(j);
  }
  return arr;
}

/// Normalized dynamic and leakage energy per workload and kind.
inline std::string energy_plot_csv(const AnalysisReport& report) {
  std::string out = "dnn,stage,batch_size,kind,dynamic_norm,leakage_norm\n";
  for (const auto& e : report)
    out += e.dnn + "," + std::string(to_string(e.stage)) + "," + std::to_string(e.batch_size) + "," +
           std::string(to_string(e.kind)) + "," +
           detail::format_double(e.ratios.dynamic) + "," + detail::format_double(e.ratios.leakage) + "\n";
  return out;
}

/// Normalized total energy and both EDP variants per workload and kind.
inline std::string edp_plot_csv(const AnalysisReport& report) {
  std::string out = "dnn,stage,batch_size,kind,energy_norm,edp_norm,edp_with_dram_norm\n";
  for (const auto& e : report)
    out += e.dnn + "," + std::string(to_string(e.stage)) + "," + std::to_string(e.batch_size) + "," +
           std::string(to_string(e.kind)) + "," +
           detail::format_double(e.ratios.total) + "," + detail::format_double(e.ratios.edp) + "," +
           detail::format_double(e.ratios.edp_with_dram) + "\n";
  return out;
}

struct BatchSeries {
  std::string dnn;
  Stage stage = Stage::Inference;
  MemoryKind kind = MemoryKind::SRAM;
  std::vector<BatchPoint> points;
};

inline std::string batch_plot_csv(const std::vector<BatchSeries>& series) {
  std::string out = "dnn,stage,kind,batch_size,edp_ratio\n";
  for (const auto& s : series)
    for (const auto& p : s.points)
      out += s.dnn + "," + std::string(to_string(s.stage)) + "," + std::string(to_string(s.kind)) + "," +
             std::to_string(p.batch_size) + "," + detail::format_double(p.edp_ratio) + "\n";
  return out;
}

}  // namespace nvmdse
