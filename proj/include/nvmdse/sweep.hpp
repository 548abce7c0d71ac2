#pragma once

// Capacity scaling: tune every (kind, capacity), collect hardware and
// workload metrics as series, normalize against a baseline kind and locate
// crossovers on the grid.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "nvmdse/error.hpp"
#include "nvmdse/isocap.hpp"
#include "nvmdse/tuner.hpp"

namespace nvmdse {

inline constexpr std::array<std::string_view, 9> kSweepMetrics = {
    "area",           "read_latency",    "write_latency",    "read_energy", "write_energy",
    "leakage_power",  "workload_energy", "workload_latency", "workload_edp"};

inline bool is_workload_metric(std::string_view m) { return m.rfind("workload_", 0) == 0; }

struct SeriesPoint {
  std::uint64_t capacity = 0;
  double value = 0.0;
  std::optional<double> stdev;
  /// Per-profile values behind a workload point, in profile order.
  std::vector<double> samples;
};

struct ScalabilitySeries {
  std::string metric;
  MemoryKind kind = MemoryKind::SRAM;
  std::vector<SeriesPoint> points;
};

struct Crossover {
  std::string metric;
  MemoryKind kind_a = MemoryKind::SRAM;
  MemoryKind kind_b = MemoryKind::SRAM;
  std::uint64_t capacity_low = 0;
  std::uint64_t capacity_high = 0;
};

namespace detail {

/// Mean and population standard deviation (zero for a single sample).
inline std::pair<double, double> mean_stdev(const std::vector<double>& xs) {
  double sum = 0.0;
  for (const double x : xs) sum += x;
  const double mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (const double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size()))};
}

inline SeriesPoint sample_point(std::uint64_t capacity, std::vector<double> samples) {
  const auto [mean, sd] = mean_stdev(samples);
  return {capacity, mean, sd, std::move(samples)};
}

}  // namespace detail

struct SweepResult {
  std::vector<TunedConfig> configs;
  std::vector<ScalabilitySeries> series;  // kind-major, metric order of kSweepMetrics
};

/// Workload metrics use each profile's total energy, delay and EDP on the
/// tuned design; the EDP and delay variants follow opt.include_dram.
inline SweepResult scalability_sweep(std::vector<MemoryKind> kinds, std::vector<std::uint64_t> capacities,
                                     const std::vector<WorkloadProfile>& profiles, const TechConfig& tech,
                                     const BitcellSet& cells = {}, const AnalysisOptions& opt = {}) {
  if (capacities.empty()) throw InvalidValue("capacities", "capacity grid is empty");
  if (profiles.empty()) throw InvalidValue("profiles", "at least one workload profile is required");
  std::sort(kinds.begin(), kinds.end());
  kinds.erase(std::unique(kinds.begin(), kinds.end()), kinds.end());
  std::sort(capacities.begin(), capacities.end());
  capacities.erase(std::unique(capacities.begin(), capacities.end()), capacities.end());

  SweepResult out;
  for (const auto kind : kinds) {
    std::vector<ScalabilitySeries> ks;
    for (const auto m : kSweepMetrics) ks.push_back({std::string(m), kind, {}});
    for (const auto cap : capacities) {
      const TunedConfig t = tune(kind, cap, tech, cells);
      out.configs.push_back(t);
      const auto& p = t.ppa;
      const double hw[] = {p.area, p.read_latency, p.write_latency, p.read_energy, p.write_energy, p.leakage_power};
      for (std::size_t i = 0; i < 6; ++i) ks[i].points.push_back({cap, hw[i], std::nullopt, {}});
      std::vector<double> energy, latency, edp;
      for (const auto& prof : profiles) {
        const auto w = workload_cost(prof, t, tech, opt);
        energy.push_back(w.breakdown.total);
        latency.push_back(opt.include_dram ? w.delay_with_dram : w.delay);
        edp.push_back(opt.include_dram ? w.edp_with_dram : w.edp);
      }
      ks[6].points.push_back(detail::sample_point(cap, std::move(energy)));
      ks[7].points.push_back(detail::sample_point(cap, std::move(latency)));
      ks[8].points.push_back(detail::sample_point(cap, std::move(edp)));
    }
    for (auto& s : ks) out.series.push_back(std::move(s));
  }
  return out;
}

inline const ScalabilitySeries* find_series(const std::vector<ScalabilitySeries>& all, std::string_view metric,
                                            MemoryKind kind) {
  for (const auto& s : all)
    if (s.metric == metric && s.kind == kind) return &s;
  return nullptr;
}

namespace detail {

inline void require_same_grid(const ScalabilitySeries& a, const ScalabilitySeries& b) {
  bool same = a.points.size() == b.points.size();
  for (std::size_t i = 0; same && i < a.points.size(); ++i) same = a.points[i].capacity == b.points[i].capacity;
  if (!same) throw InvalidValue("series", "series '" + a.metric + "' do not share a capacity grid");
}

inline int sign(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace detail

/// Adjacent grid pairs where sign(a - b) flips between nonzero values.
/// Brackets only; no interpolation. A tie at a grid point is not a flip.
inline std::vector<Crossover> find_crossover(const ScalabilitySeries& a, const ScalabilitySeries& b) {
  detail::require_same_grid(a, b);
  std::vector<Crossover> out;
  for (std::size_t i = 0; i + 1 < a.points.size(); ++i) {
    const int s0 = detail::sign(a.points[i].value - b.points[i].value);
    const int s1 = detail::sign(a.points[i + 1].value - b.points[i + 1].value);
    if (s0 != 0 && s1 != 0 && s0 != s1)
      out.push_back({a.metric, a.kind, b.kind, a.points[i].capacity, a.points[i + 1].capacity});
  }
  return out;
}

/// Pointwise division by the baseline series. Points that carry per-profile
/// samples are normalized per profile first, then re-aggregated.
inline ScalabilitySeries normalized_series(const ScalabilitySeries& s, const ScalabilitySeries& baseline) {
  detail::require_same_grid(s, baseline);
  if (s.metric != baseline.metric)
    throw InvalidValue("baseline", "metric '" + baseline.metric + "' cannot normalize '" + s.metric + "'");
  ScalabilitySeries out{s.metric, s.kind, {}};
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    const auto& p = s.points[i];
    const auto& b = baseline.points[i];
    if (!p.samples.empty() && p.samples.size() == b.samples.size()) {
      std::vector<double> r(p.samples.size());
      for (std::size_t k = 0; k < r.size(); ++k) r[k] = safe_ratio(p.samples[k], b.samples[k]);
      out.points.push_back(detail::sample_point(p.capacity, std::move(r)));
    } else {
      out.points.push_back({p.capacity, safe_ratio(p.value, b.value), std::nullopt, {}});
    }
  }
  return out;
}

inline std::vector<ScalabilitySeries> normalize_all(const std::vector<ScalabilitySeries>& all, MemoryKind baseline) {
  std::vector<ScalabilitySeries> out;
  for (const auto& s : all) {
    const auto* b = find_series(all, s.metric, baseline);
    if (!b) throw InvalidValue("baseline", "no '" + s.metric + "' series for " + std::string(to_string(baseline)));
    out.push_back(normalized_series(s, *b));
  }
  return out;
}

/// Crossovers of every non-baseline kind against every other kind, per metric.
inline std::vector<Crossover> all_crossovers(const std::vector<ScalabilitySeries>& all) {
  std::vector<Crossover> out;
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = 0; j < all.size(); ++j)
      if (all[i].metric == all[j].metric && all[i].kind < all[j].kind)
        for (auto& c : find_crossover(all[i], all[j])) out.push_back(std::move(c));
  return out;
}

// ---------------------------------------------------------------------------
// Emission

inline std::string series_csv(const std::vector<ScalabilitySeries>& all) {
  std::string out = "metric,kind,capacity_mb,value,stdev\n";
  for (const auto& s : all)
    for (const auto& p : s.points)
      out += s.metric + "," + std::string(to_string(s.kind)) + "," +
             detail::format_double(static_cast<double>(p.capacity) / kMiB) + "," + detail::format_double(p.value) + "," +
             (p.stdev ? detail::format_double(*p.stdev) : std::string()) + "\n";
  return out;
}

inline std::string crossover_csv(const std::vector<Crossover>& all) {
  std::string out = "metric,kind_a,kind_b,cap_low_mb,cap_high_mb\n";
  for (const auto& c : all)
    out += c.metric + "," + std::string(to_string(c.kind_a)) + "," + std::string(to_string(c.kind_b)) + "," +
           detail::format_double(static_cast<double>(c.capacity_low) / kMiB) + "," +
           detail::format_double(static_cast<double>(c.capacity_high) / kMiB) + "\n";
  return out;
}

inline nlohmann::ordered_json series_json(const std::vector<ScalabilitySeries>& all) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& s : all) {
    nlohmann::ordered_json j;
    j["metric"] = s.metric;
    j["kind"] = std::string(to_string(s.kind));
    auto pts = nlohmann::ordered_json::array();
    for (const auto& p : s.points) {
      nlohmann::ordered_json q;
      q["capacity_bytes"] = p.capacity;
      q["value"] = p.value;
      if (p.stdev) q["stdev"] = *p.stdev;
      pts.push_back(q);
    }
    j["points"] = pts;
    arr.push_back(j);
  }
  return arr;
}

}  // namespace nvmdse
