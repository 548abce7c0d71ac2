#pragma once

// Iso-area analysis: the largest MRAM capacity that fits an SRAM area budget,
// and EDP comparisons that charge each design its own simulated DRAM traffic.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "nvmdse/cachesim.hpp"
#include "nvmdse/error.hpp"
#include "nvmdse/isocap.hpp"
#include "nvmdse/tuner.hpp"

namespace nvmdse {

struct IsoAreaOptions {
  std::uint64_t granularity = kMiB;
  double slack = 0.025;
  /// Search stops here even if the budget is not yet exhausted.
  std::uint64_t max_capacity = 64 * kMiB;
};

struct IsoAreaResult {
  std::uint64_t capacity = 0;
  TunedConfig tuned;
  double budget = 0.0;  // mm^2, slack included
};

/// Scans capacities upward in steps of the granularity and returns the last
/// one whose EDAP-tuned area fits area_budget * (1 + slack). Capacities the
/// organization space cannot build are skipped.
inline IsoAreaResult iso_area_capacity(MemoryKind kind, double area_budget, const TechConfig& tech,
                                       const BitcellSet& cells = {}, const IsoAreaOptions& opt = {}) {
  if (!(area_budget > 0.0)) throw NonPositiveValue("area_budget");
  if (!(opt.slack >= 0.0)) throw InvalidValue("slack", "must be >= 0");
  if (opt.granularity == 0) throw NonPositiveValue("granularity");
  const double limit = area_budget * (1.0 + opt.slack);
  IsoAreaResult best;
  best.budget = limit;
  bool found = false;
  for (std::uint64_t cap = opt.granularity; cap <= opt.max_capacity; cap += opt.granularity) {
    TunedConfig t;
    try {
      t = tune(kind, cap, tech, cells);
    } catch (const InfeasibleCapacity&) {
      continue;
    }
    if (t.ppa.area > limit) break;
    best.capacity = cap;
    best.tuned = t;
    found = true;
  }
  if (!found)
    throw NoFeasibleCapacity(std::string(to_string(kind)) + " does not fit " + detail::format_double(limit) +
                             " mm^2 at any capacity step");
  return best;
}

/// Scales the simulated DRAM traffic per L2 access onto a profile's L2
/// transaction count: misses become DRAM reads, dirty evictions DRAM writes.
inline WorkloadProfile with_simulated_dram(WorkloadProfile p, const CacheStats& s) {
  if (s.accesses == 0) throw EmptyTrace();
  const double l2 = static_cast<double>(p.l2_tx());
  const double acc = static_cast<double>(s.accesses);
  p.dram_read_tx = static_cast<std::uint64_t>(std::llround(l2 * static_cast<double>(s.misses) / acc));
  p.dram_write_tx = static_cast<std::uint64_t>(std::llround(l2 * static_cast<double>(s.dirty_evictions) / acc));
  return p;
}

/// Big (typically MRAM) design against the base design, each charged its
/// own simulated DRAM traffic. Both EDP variants are always present.
inline AnalysisEntry isoarea_report(const WorkloadProfile& p, const CacheStats& stats_base, const CacheStats& stats_big,
                                    const TunedConfig& c_base, const TunedConfig& c_big, const TechConfig& tech,
                                    const AnalysisOptions& opt = {}) {
  return compare_designs(with_simulated_dram(p, stats_big), c_big, with_simulated_dram(p, stats_base), c_base, tech, opt);
}

struct ReductionPoint {
  std::uint64_t capacity = 0;
  double reduction = 0.0;  // percent vs the base capacity
};

/// DRAM-transaction reduction vs `base` for each capacity (line size and
/// associativity fixed, sets scale).
inline std::vector<ReductionPoint> reduction_series(const MemoryTrace& trace, const CacheConfig& base,
                                                    const std::vector<std::uint64_t>& capacities) {
  const auto base_stats = simulate_cache(trace, base);
  std::vector<ReductionPoint> out;
  for (const auto cap : capacities) {
    CacheConfig cfg = base;
    cfg.capacity = cap;
    out.push_back({cap, dram_reduction(base_stats, simulate_cache(trace, cfg))});
  }
  return out;
}

inline std::string reduction_csv(const std::vector<ReductionPoint>& points) {
  std::string out = "capacity_mb,dram_reduction_pct\n";
  for (const auto& p : points)
    out += detail::format_double(static_cast<double>(p.capacity) / kMiB) + "," + detail::format_double(p.reduction) +
           "\n";
  return out;
}

}  // namespace nvmdse
