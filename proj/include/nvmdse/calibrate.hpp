#pragma once

// Fits the free coefficients of the cache model (and the synthetic SRAM
// bitcell) to cache-level anchor designs by multiplicative coordinate
// descent on the maximum relative error.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nvmdse/error.hpp"
#include "nvmdse/kvtext.hpp"
#include "nvmdse/techlib.hpp"
#include "nvmdse/tuner.hpp"

namespace nvmdse {

enum class AnchorMetric { ReadLatency, WriteLatency, ReadEnergy, WriteEnergy, Leakage, Area };

inline constexpr std::array<AnchorMetric, 6> kAllAnchorMetrics = {AnchorMetric::ReadLatency, AnchorMetric::WriteLatency,
                                                                  AnchorMetric::ReadEnergy,  AnchorMetric::WriteEnergy,
                                                                  AnchorMetric::Leakage,     AnchorMetric::Area};

inline constexpr std::array<std::string_view, 6> kAnchorColumns = {"read_latency_ns", "write_latency_ns", "read_energy_nj",
                                                                   "write_energy_nj", "leakage_mw",       "area_mm2"};

inline std::string_view column_name(AnchorMetric m) { return kAnchorColumns[static_cast<std::size_t>(m)]; }

inline double anchor_value(const CachePPA& p, AnchorMetric m) {
  switch (m) {
    case AnchorMetric::ReadLatency: return p.read_latency;
    case AnchorMetric::WriteLatency: return p.write_latency;
    case AnchorMetric::ReadEnergy: return p.read_energy;
    case AnchorMetric::WriteEnergy: return p.write_energy;
    case AnchorMetric::Leakage: return p.leakage_power;
    case AnchorMetric::Area: return p.area;
  }
  return 0.0;
}

/// Target cache-level results for one (kind, capacity). Absent metrics are
/// not fitted.
struct Anchor {
  MemoryKind kind = MemoryKind::SRAM;
  std::uint64_t capacity = 0;  // bytes
  std::array<std::optional<double>, 6> values;

  std::optional<double>& operator[](AnchorMetric m) { return values[static_cast<std::size_t>(m)]; }
  const std::optional<double>& operator[](AnchorMetric m) const { return values[static_cast<std::size_t>(m)]; }
};

/// CSV with header kind,capacity_mb,read_latency_ns,write_latency_ns,
/// read_energy_nj,write_energy_nj,leakage_mw,area_mm2. Empty cells mean
/// "not anchored".
inline std::vector<Anchor> parse_anchors(std::string_view text) {
  std::vector<Anchor> out;
  std::vector<std::string> header;
  std::size_t row = 0;
  for (const auto& raw : detail::split(text, '\n')) {
    const auto line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto cells = detail::split(line, ',');
    for (auto& c : cells) c = std::string(detail::trim(c));
    if (header.empty()) {
      header = cells;
      if (header.size() != 8 || header[0] != "kind" || header[1] != "capacity_mb")
        throw SchemaError(0, header.empty() ? "" : header[0], "expected anchor header kind,capacity_mb,<6 metrics>");
      for (std::size_t i = 0; i < kAnchorColumns.size(); ++i)
        if (header[i + 2] != kAnchorColumns[i]) throw SchemaError(0, header[i + 2], "expected " + std::string(kAnchorColumns[i]));
      continue;
    }
    ++row;
    if (cells.size() != header.size())
      throw SchemaError(row, "", "expected " + std::to_string(header.size()) + " cells, got " + std::to_string(cells.size()));
    Anchor a;
    a.kind = parse_memory_kind(cells[0]);
    const auto mb = detail::parse_double(cells[1]);
    if (!mb || !(*mb > 0.0)) throw SchemaError(row, "capacity_mb", "expected a positive number");
    a.capacity = static_cast<std::uint64_t>(std::llround(*mb * static_cast<double>(kMiB)));
    bool any = false;
    for (std::size_t i = 0; i < kAnchorColumns.size(); ++i) {
      if (cells[i + 2].empty()) continue;
      const auto v = detail::parse_double(cells[i + 2]);
      if (!v || !(*v > 0.0)) throw SchemaError(row, header[i + 2], "expected a positive number or an empty cell");
      a.values[i] = *v;
      any = true;
    }
    if (!any) throw SchemaError(row, "", "anchor row has no metric values");
    out.push_back(a);
  }
  if (out.empty()) throw SchemaError(0, "", "no anchor rows");
  return out;
}

inline std::vector<Anchor> load_anchors(const std::string& path) { return parse_anchors(detail::read_file(path)); }

inline std::string anchors_to_csv(const std::vector<Anchor>& anchors) {
  std::string out = "kind,capacity_mb";
  for (const auto c : kAnchorColumns) out += "," + std::string(c);
  out += "\n";
  for (const auto& a : anchors) {
    out += std::string(to_string(a.kind)) + "," + detail::format_double(static_cast<double>(a.capacity) / kMiB);
    for (const auto& v : a.values) out += "," + (v ? detail::format_double(*v) : std::string());
    out += "\n";
  }
  return out;
}

/// Everything calibration may change: the technology coefficients and the
/// synthetic SRAM bitcell (symmetric writes).
struct ModelState {
  TechConfig tech;
  BitcellParams sram = builtin_bitcell(MemoryKind::SRAM);
};

struct AnchorResidual {
  MemoryKind kind;
  std::uint64_t capacity;
  AnchorMetric metric;
  double target;
  double model;
  double rel_error;  // model / target - 1
};

struct CalibrationResult {
  ModelState state;
  double max_error = 0.0;
  std::vector<AnchorResidual> residuals;
  std::size_t evaluations = 0;
  std::size_t sweeps = 0;
};

struct CalibrationOptions {
  /// Descent stops as soon as every anchor is within this relative error.
  double tolerance = 0.10;
  /// Final max error above this raises CalibrationDiverged.
  double ceiling = 0.15;
  std::size_t max_sweeps = 30;
  double initial_step = 1.5;  // multiplicative
  double min_step = 1.005;
  /// Each coefficient stays within [start / bound, start * bound].
  double bound = 100.0;
  /// Technology coefficients to fit; empty selects default_fit_fields().
  std::vector<std::string> fields;
  bool fit_sram_cell = true;
  /// Optional side condition; a step that improves the anchor score is taken
  /// only if the new state also satisfies it.
  std::function<bool(const ModelState&)> accept;
};

/// Model coefficients. Node constants, the clock, the supply and the
/// off-chip/compute references are not fitted.
inline const std::vector<std::string_view>& default_fit_fields() {
  static const std::vector<std::string_view> names = [] {
    static constexpr std::array<std::string_view, 6> fixed = {
        "node", "clock_frequency", "vdd", "mac_energy", "dram_access_energy", "dram_access_latency"};
    std::vector<std::string_view> out;
    for (const auto& f : tech_fields())
      if (std::find(fixed.begin(), fixed.end(), f.name) == fixed.end()) out.push_back(f.name);
    return out;
  }();
  return names;
}

namespace detail {

struct Coefficient {
  std::string name;
  std::function<double&(ModelState&)> ref;
  double lo = 0.0, hi = 0.0;
};

inline std::vector<Coefficient> coefficients(const ModelState& start, const CalibrationOptions& opt) {
  std::vector<Coefficient> out;
  std::vector<std::string> names = opt.fields;
  if (names.empty())
    for (const auto n : default_fit_fields()) names.emplace_back(n);
  for (const auto& n : names) {
    const auto& fields = tech_fields();
    const auto it = std::find_if(fields.begin(), fields.end(), [&](const TechField& f) { return f.name == n; });
    if (it == fields.end()) throw InvalidValue(n, "unknown technology field");
    const auto member = it->member;
    out.push_back({n, [member](ModelState& s) -> double& { return s.tech.*member; }, 0.0, 0.0});
  }
  if (opt.fit_sram_cell) {
    out.push_back({"sram.sense_latency", [](ModelState& s) -> double& { return s.sram.sense_latency; }, 0.0, 0.0});
    out.push_back({"sram.sense_energy", [](ModelState& s) -> double& { return s.sram.sense_energy; }, 0.0, 0.0});
    out.push_back({"sram.write_latency", [](ModelState& s) -> double& { return s.sram.write_latency_set; }, 0.0, 0.0});
    out.push_back({"sram.write_energy", [](ModelState& s) -> double& { return s.sram.write_energy_set; }, 0.0, 0.0});
  }
  ModelState probe = start;
  std::vector<Coefficient> movable;
  for (auto& c : out) {
    const double v = c.ref(probe);
    if (!(v > 0.0)) continue;  // multiplicative steps cannot move a zero
    c.lo = v / opt.bound;
    c.hi = v * opt.bound;
    if (c.name == "write_switch_fraction" || c.name == "tag_array_fraction") c.hi = std::min(c.hi, 1.0);
    movable.push_back(std::move(c));
  }
  return movable;
}

inline void sync_sram(ModelState& s) {
  s.sram.write_latency_reset = s.sram.write_latency_set;
  s.sram.write_energy_reset = s.sram.write_energy_set;
}

struct Score {
  double max_error = 0.0;
  double sse = 0.0;
  bool operator<(const Score& o) const {
    if (max_error < o.max_error - 1e-12) return true;
    if (max_error > o.max_error + 1e-12) return false;
    return sse < o.sse;
  }
};

}  // namespace detail

/// Tunes every anchored (kind, capacity) under `state` and compares.
inline std::vector<AnchorResidual> residuals(const std::vector<Anchor>& anchors, const ModelState& state,
                                            const BitcellSet& mram_cells = {}) {
  BitcellSet cells = mram_cells;
  cells[MemoryKind::SRAM] = state.sram;
  std::vector<AnchorResidual> out;
  for (const auto& a : anchors) {
    const auto t = tune(a.kind, a.capacity, state.tech, cells);
    for (const auto m : kAllAnchorMetrics) {
      if (!a[m]) continue;
      const double model = anchor_value(t.ppa, m);
      out.push_back({a.kind, a.capacity, m, *a[m], model, model / *a[m] - 1.0});
    }
  }
  return out;
}

inline double max_abs_error(const std::vector<AnchorResidual>& rs) {
  double m = 0.0;
  for (const auto& r : rs) m = std::max(m, std::abs(r.rel_error));
  return m;
}

inline std::string residual_table(const std::vector<AnchorResidual>& rs) {
  std::string out = "kind,capacity_mb,metric,target,model,rel_error\n";
  for (const auto& r : rs)
    out += std::string(to_string(r.kind)) + "," + detail::format_double(static_cast<double>(r.capacity) / kMiB) + "," +
           std::string(column_name(r.metric)) + "," + detail::format_double(r.target) + "," +
           detail::format_double(r.model) + "," + detail::format_double(r.rel_error) + "\n";
  return out;
}

inline CalibrationResult calibrate(const std::vector<Anchor>& anchors, const ModelState& start,
                                   const CalibrationOptions& opt = {}, const BitcellSet& mram_cells = {}) {
  if (anchors.empty()) throw InvalidValue("anchors", "at least one anchor is required");
  if (!(opt.initial_step > 1.0) || !(opt.min_step > 1.0)) throw InvalidValue("step", "steps must exceed 1");
  validate(start.tech);
  validate(start.sram);

  CalibrationResult res;
  ModelState cur = start;
  detail::sync_sram(cur);
  auto score = [&](const ModelState& s) {
    ++res.evaluations;
    const auto rs = residuals(anchors, s, mram_cells);
    detail::Score sc;
    for (const auto& r : rs) {
      sc.max_error = std::max(sc.max_error, std::abs(r.rel_error));
      sc.sse += r.rel_error * r.rel_error;
    }
    return sc;
  };

  auto coeffs = detail::coefficients(cur, opt);
  detail::Score best = score(cur);
  double step = opt.initial_step;
  while (best.max_error > opt.tolerance && step > opt.min_step && res.sweeps < opt.max_sweeps) {
    ++res.sweeps;
    bool improved = false;
    for (auto& c : coeffs) {
      const double v = c.ref(cur);
      for (const double f : {step, 1.0 / step}) {
        const double nv = std::clamp(v * f, c.lo, c.hi);
        if (nv == v) continue;
        ModelState trial = cur;
        c.ref(trial) = nv;
        detail::sync_sram(trial);
        const auto sc = score(trial);
        if (sc < best && (!opt.accept || opt.accept(trial))) {
          best = sc;
          cur = trial;
          improved = true;
          break;
        }
      }
      if (best.max_error <= opt.tolerance) break;
    }
    if (!improved) step = std::sqrt(step);
  }

  res.state = cur;
  res.residuals = residuals(anchors, cur, mram_cells);
  res.max_error = max_abs_error(res.residuals);
  if (res.max_error > opt.ceiling)
    throw CalibrationDiverged("max relative error " + detail::format_fixed(res.max_error * 100.0, 1) + "% exceeds the " +
                                  detail::format_fixed(opt.ceiling * 100.0, 1) + "% ceiling\n" +
                                  residual_table(res.residuals),
                              res.max_error);
  return res;
}

}  // namespace nvmdse
