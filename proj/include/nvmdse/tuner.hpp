#pragma once

// EDAP-optimal tuning: for one memory kind and capacity, optimize for every
// (target, access type) pair and keep the design with the lowest EDAP.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nvmdse/cachemodel.hpp"
#include "nvmdse/kvtext.hpp"
#include "nvmdse/techlib.hpp"

namespace nvmdse {

/// Per-access read EDP plus write EDP, scaled by area (nJ*ns*mm^2).
/// Leakage is deliberately absent; it has its own optimization target.
inline double calculate_edap(const CachePPA& p) {
  return (p.read_energy * p.read_latency + p.write_energy * p.write_latency) * p.area;
}

/// Smallest cycle count whose duration covers `latency_ns` (at least 1).
inline std::uint32_t latency_to_cycles(double latency_ns, double clock_mhz) {
  const double cycles = std::ceil(latency_ns * clock_mhz * 1e-3);
  return static_cast<std::uint32_t>(std::max(1.0, cycles));
}

struct TuneCandidate {
  OptTarget target;
  AccessType access;
  double edap;
};

struct TunedConfig {
  MemoryKind kind = MemoryKind::SRAM;
  std::uint64_t capacity = 0;
  OptTarget chosen_target = OptTarget::ReadLatency;
  AccessType chosen_access = AccessType::Normal;
  CachePPA ppa;
  double edap = 0.0;
  std::uint32_t read_cycles = 1;
  std::uint32_t write_cycles = 1;
  /// EDAP of each optimize() result in (target, access) declaration order.
  std::vector<TuneCandidate> candidates;
};

inline TunedConfig tune(const BitcellParams& cell, std::uint64_t capacity, const TechConfig& tech,
                        const OrgBounds& bounds = {}) {
  const DesignSpace space(cell, capacity, tech, bounds);
  TunedConfig best;
  best.kind = cell.kind;
  best.capacity = capacity;
  double best_edap = std::numeric_limits<double>::infinity();
  best.candidates.reserve(kAllOptTargets.size() * kAllAccessTypes.size());
  for (const auto target : kAllOptTargets) {
    for (const auto acc : kAllAccessTypes) {
      const CachePPA design = optimize(space, target, acc);
      const double q = calculate_edap(design);
      best.candidates.push_back({target, acc, q});
      if (q < best_edap) {
        best_edap = q;
        best.chosen_target = target;
        best.chosen_access = acc;
        best.ppa = design;
      }
    }
  }
  best.edap = best_edap;
  best.read_cycles = latency_to_cycles(best.ppa.read_latency, tech.clock_frequency);
  best.write_cycles = latency_to_cycles(best.ppa.write_latency, tech.clock_frequency);
  return best;
}

/// Bitcells per kind; kinds without an entry fall back to the builtin cell.
using BitcellSet = std::map<MemoryKind, BitcellParams>;

inline BitcellParams bitcell_for(const BitcellSet& cells, MemoryKind kind) {
  const auto it = cells.find(kind);
  return it != cells.end() ? it->second : builtin_bitcell(kind);
}

inline TunedConfig tune(MemoryKind kind, std::uint64_t capacity, const TechConfig& tech, const BitcellSet& cells = {}) {
  return tune(bitcell_for(cells, kind), capacity, tech);
}

inline const std::vector<std::uint64_t>& default_capacities() {
  static const std::vector<std::uint64_t> caps = {1 * kMiB, 2 * kMiB, 4 * kMiB, 8 * kMiB, 16 * kMiB, 32 * kMiB};
  return caps;
}

struct TuneFailure {
  MemoryKind kind;
  std::uint64_t capacity;
  std::string error;
};

struct TuneAllResult {
  std::vector<TunedConfig> configs;
  std::vector<TuneFailure> failures;
};

/// One TunedConfig per (kind, capacity), ordered by kind then ascending
/// capacity. Failing pairs are collected rather than aborting the sweep.
inline TuneAllResult tune_all(std::vector<MemoryKind> kinds, std::vector<std::uint64_t> capacities,
                              const TechConfig& tech, const BitcellSet& cells = {}) {
  std::sort(kinds.begin(), kinds.end());
  kinds.erase(std::unique(kinds.begin(), kinds.end()), kinds.end());
  std::sort(capacities.begin(), capacities.end());
  capacities.erase(std::unique(capacities.begin(), capacities.end()), capacities.end());
  TuneAllResult out;
  for (const auto k : kinds) {
    for (const auto cap : capacities) {
      try {
        out.configs.push_back(tune(k, cap, tech, cells));
      } catch (const Error& e) {
        out.failures.push_back({k, cap, e.what()});
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Emission

inline std::string tuned_csv_header() {
  return "kind,capacity_bytes,capacity_mb,chosen_target,chosen_access,banks,mats_per_bank,subarrays_per_mat,rows,cols,"
         "senseamp_mux,read_latency_ns,write_latency_ns,read_energy_nj,write_energy_nj,leakage_power_mw,area_mm2,"
         "edap,read_cycles,write_cycles\n";
}

inline std::string to_csv_row(const TunedConfig& t) {
  const auto& p = t.ppa;
  const auto& o = p.organization;
  std::string row;
  row += std::string(to_string(t.kind)) + "," + std::to_string(t.capacity) + "," +
         detail::format_double(static_cast<double>(t.capacity) / kMiB) + "," + std::string(to_string(t.chosen_target)) +
         "," + std::string(to_string(t.chosen_access)) + ",";
  row += std::to_string(o.banks) + "," + std::to_string(o.mats_per_bank) + "," + std::to_string(o.subarrays_per_mat) +
         "," + std::to_string(o.rows) + "," + std::to_string(o.cols) + "," + std::to_string(o.senseamp_mux) + ",";
  for (const double v : {p.read_latency, p.write_latency, p.read_energy, p.write_energy, p.leakage_power, p.area, t.edap})
    row += detail::format_double(v) + ",";
  row += std::to_string(t.read_cycles) + "," + std::to_string(t.write_cycles) + "\n";
  return row;
}

inline std::string to_csv(const std::vector<TunedConfig>& configs) {
  std::string out = tuned_csv_header();
  for (const auto& t : configs) out += to_csv_row(t);
  return out;
}

inline nlohmann::ordered_json to_json(const TunedConfig& t) {
  const auto& p = t.ppa;
  const auto& o = p.organization;
  nlohmann::ordered_json j;
  j["kind"] = std::string(to_string(t.kind));
  j["capacity_bytes"] = t.capacity;
  j["chosen_target"] = std::string(to_string(t.chosen_target));
  j["chosen_access"] = std::string(to_string(t.chosen_access));
  j["organization"] = {{"banks", o.banks},
                       {"mats_per_bank", o.mats_per_bank},
                       {"subarrays_per_mat", o.subarrays_per_mat},
                       {"rows", o.rows},
                       {"cols", o.cols},
                       {"senseamp_mux", o.senseamp_mux},
                       {"line_size", o.line_size},
                       {"associativity", o.associativity}};
  j["read_latency_ns"] = p.read_latency;
  j["write_latency_ns"] = p.write_latency;
  j["read_energy_nj"] = p.read_energy;
  j["write_energy_nj"] = p.write_energy;
  j["leakage_power_mw"] = p.leakage_power;
  j["area_mm2"] = p.area;
  j["edap"] = t.edap;
  j["read_cycles"] = t.read_cycles;
  j["write_cycles"] = t.write_cycles;
  return j;
}

inline nlohmann::ordered_json to_json(const std::vector<TunedConfig>& configs) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& t : configs) arr.push_back(to_json(t));
  return arr;
}

}  // namespace nvmdse
