#pragma once

// Technology constants and bitcell characterization parameters.
//
// Bitcell documents use device units: ps for latencies, pJ for energies.
// The cache model works in ns / nJ / mW / mm^2; BitcellParams exposes
// converted accessors for that.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nvmdse/error.hpp"
#include "nvmdse/kvtext.hpp"

namespace nvmdse {

enum class MemoryKind { SRAM, STT_MRAM, SOT_MRAM };

inline constexpr std::array<MemoryKind, 3> kAllKinds = {MemoryKind::SRAM, MemoryKind::STT_MRAM, MemoryKind::SOT_MRAM};

inline std::string_view to_string(MemoryKind k) {
  switch (k) {
    case MemoryKind::SRAM: return "SRAM";
    case MemoryKind::STT_MRAM: return "STT_MRAM";
    case MemoryKind::SOT_MRAM: return "SOT_MRAM";
  }
  return "?";
}

/// Short label used in report columns.
inline std::string_view short_name(MemoryKind k) {
  switch (k) {
    case MemoryKind::SRAM: return "SRAM";
    case MemoryKind::STT_MRAM: return "STT";
    case MemoryKind::SOT_MRAM: return "SOT";
  }
  return "?";
}

/// Accepts SRAM, STT_MRAM/STT-MRAM/STT, SOT_MRAM/SOT-MRAM/SOT (any case).
inline MemoryKind parse_memory_kind(std::string_view name) {
  std::string n;
  for (const char c : detail::trim(name)) n.push_back(c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (n == "SRAM") return MemoryKind::SRAM;
  if (n == "STT_MRAM" || n == "STT") return MemoryKind::STT_MRAM;
  if (n == "SOT_MRAM" || n == "SOT") return MemoryKind::SOT_MRAM;
  throw UnknownMemoryKind(std::string(name));
}

inline bool is_nonvolatile(MemoryKind k) { return k != MemoryKind::SRAM; }

struct BitcellParams {
  MemoryKind kind = MemoryKind::SRAM;
  double sense_latency = 0.0;        // ps
  double sense_energy = 0.0;         // pJ
  double write_latency_set = 0.0;    // ps
  double write_latency_reset = 0.0;  // ps
  double write_energy_set = 0.0;     // pJ
  double write_energy_reset = 0.0;   // pJ
  // Access-device fin counts. fin_count_write sizes the column write drivers
  // (area and leakage); fin_count_read sizes the per-column read mux.
  int fin_count_read = 1;
  int fin_count_write = 1;
  double area_norm = 1.0;  // relative to the foundry SRAM bitcell

  double sense_latency_ns() const { return sense_latency * 1e-3; }
  double sense_energy_nj() const { return sense_energy * 1e-3; }
  double write_latency_ns() const { return std::max(write_latency_set, write_latency_reset) * 1e-3; }
  double write_energy_nj() const { return 0.5 * (write_energy_set + write_energy_reset) * 1e-3; }

  friend bool operator==(const BitcellParams&, const BitcellParams&) = default;
};

/// Throws the first violated invariant, naming the field.
inline void validate(const BitcellParams& b) {
  const std::pair<const char*, double> positive[] = {
      {"sense_latency", b.sense_latency},         {"sense_energy", b.sense_energy},
      {"write_latency_set", b.write_latency_set}, {"write_latency_reset", b.write_latency_reset},
      {"write_energy_set", b.write_energy_set},   {"write_energy_reset", b.write_energy_reset},
      {"area_norm", b.area_norm},
  };
  for (const auto& [name, v] : positive)
    if (!(v > 0.0) || !std::isfinite(v)) throw NonPositiveValue(name);
  if (b.fin_count_read < 1) throw NonPositiveValue("fin_count_read");
  if (b.fin_count_write < 1) throw NonPositiveValue("fin_count_write");
  if (b.kind == MemoryKind::SRAM) {
    if (b.area_norm != 1.0) throw InvalidValue("area_norm", "SRAM bitcell defines the normalization (must be 1)");
    if (b.write_latency_set != b.write_latency_reset)
      throw InvalidValue("write_latency_reset", "SRAM writes are symmetric");
    if (b.write_energy_set != b.write_energy_reset) throw InvalidValue("write_energy_reset", "SRAM writes are symmetric");
  } else if (b.area_norm > 1.0) {
    throw InvalidValue("area_norm", "MRAM bitcell area must lie in (0, 1]");
  }
}

/// Device-level characterization of the MRAM cells at 16 nm. The SRAM entry
/// is synthetic: its values come out of calibration against cache-level
/// results and are calibration artifacts, not foundry data.
inline BitcellParams builtin_bitcell(MemoryKind kind) {
  switch (kind) {
    case MemoryKind::STT_MRAM:
      return {MemoryKind::STT_MRAM, 650.0, 0.076, 8400.0, 7780.0, 1.1, 2.2, 4, 4, 0.34};
    case MemoryKind::SOT_MRAM:
      return {MemoryKind::SOT_MRAM, 650.0, 0.020, 313.0, 243.0, 0.08, 0.08, 1, 3, 0.29};
    case MemoryKind::SRAM:
      break;
  }
  // Calibrated synthetic 6T cell (see data/sram_bitcell.cfg).
  return {MemoryKind::SRAM, 0.103911, 0.0135116, 0.100072, 0.100072, 3.28994e-05, 3.28994e-05, 1, 1, 1.0};
}

inline BitcellParams bitcell_from_document(const KvDocument& doc) {
  BitcellParams b;
  b.kind = parse_memory_kind(doc.str("kind"));
  b.sense_latency = doc.number("sense_latency");
  b.sense_energy = doc.number("sense_energy");
  b.write_latency_set = doc.number("write_latency_set");
  b.write_latency_reset = doc.number("write_latency_reset");
  b.write_energy_set = doc.number("write_energy_set");
  b.write_energy_reset = doc.number("write_energy_reset");
  b.fin_count_read = static_cast<int>(doc.integer("fin_count_read"));
  b.fin_count_write = static_cast<int>(doc.integer("fin_count_write"));
  b.area_norm = doc.number("area_norm");
  validate(b);
  return b;
}

inline BitcellParams load_bitcell(std::string_view text) { return bitcell_from_document(KvDocument::parse(text)); }

inline BitcellParams load_bitcell_file(const std::string& path) { return bitcell_from_document(KvDocument::load(path)); }

inline std::string serialize(const BitcellParams& b) {
  KvDocument d;
  d.set("kind", std::string(to_string(b.kind)));
  d.set("sense_latency", b.sense_latency);
  d.set("sense_energy", b.sense_energy);
  d.set("write_latency_set", b.write_latency_set);
  d.set("write_latency_reset", b.write_latency_reset);
  d.set("write_energy_set", b.write_energy_set);
  d.set("write_energy_reset", b.write_energy_reset);
  d.set("fin_count_read", std::to_string(b.fin_count_read));
  d.set("fin_count_write", std::to_string(b.fin_count_write));
  d.set("area_norm", b.area_norm);
  return "# units: latencies ps, energies pJ, area relative to the foundry SRAM bitcell\n" + d.serialize();
}

// ---------------------------------------------------------------------------
// Technology

/// Node-level constants plus the free coefficients of the analytical cache
/// model. Units are part of the field names where they are not obvious.
struct TechConfig {
  double node = 16;                           // nm
  double clock_frequency = 1481;              // MHz
  double vdd = 0.8;                           // V

  // Global interconnect (H-tree). RC delay 0.5*r*c*L^2; energy c*V^2 per bit per mm.
  double wire_res_per_mm = 2.49905;           // kOhm/mm
  double wire_cap_per_mm = 0.173731;          // pF/mm
  double htree_hop_delay = 0.000393431;       // ns per H-tree level

  // Array geometry.
  double sram_cell_area = 0.207986;           // um^2, foundry SRAM bitcell at `node`
  double decoder_width_base = 0.0331453;      // um
  double decoder_width_per_bit = 0.0136336;   // um per row-address bit
  double senseamp_area_volatile = 0.0834787;  // um^2, voltage-mode (SRAM)
  double senseamp_area_resistive = 0.183544;  // um^2, current-mode (MRAM)
  double write_driver_area = 0.0830372;       // um^2 per write fin per output column
  double column_mux_area = 0.287628;          // um^2 per read fin per column
  double mat_overhead_area = 7.84867;         // um^2 per mat
  double routing_area_fraction = 0.012518;
  double cache_overhead_area = 0.0592274;     // mm^2 per cache (control, I/O)

  // Delay.
  double decoder_delay_base = 0.00185436;     // ns
  double decoder_delay_per_stage = 0.0228751; // ns per address bit
  double wordline_delay = 125.954;            // ns per mm^2 of wordline length squared
  double bitline_delay = 1.62922;             // ns per 1000 rows
  double bitline_delay_resistive = 0.788457;  // ns per 1000 rows at the reference read current, MRAM only
  double senseamp_delay_base = 0.364625;      // ns
  double column_mux_delay = 0.000201495;      // ns per mux stage
  double driver_delay_base = 0.000677389;     // ns
  double tag_array_fraction = 0.108693;       // tag path delay relative to the data core
  double tag_compare_delay = 2.7135e-06;      // ns
  double way_select_delay = 0.0371115;        // ns
  double speculation_penalty = 0.000359611;   // ns, Normal access over Fast

  // Energy.
  double decoder_energy_per_stage = 5.56779e-05; // nJ
  double wordline_energy_per_cell = 7.82747e-05; // nJ per cell (per read fin on reads)
  double bitline_energy_per_cell = 1.22909e-12; // nJ per row on a switched column
  double senseamp_energy_volatile = 2.13071e-09; // nJ per sensed bit
  double senseamp_energy_resistive = 0.000173448; // nJ per sensed bit
  double driver_energy_base = 7.09022e-10;    // nJ per switched bit
  double write_bitline_loss = 0.000469829;    // nJ per switched bit per 1000 rows per ns of write pulse
  double tag_access_energy = 5.49331e-07;     // nJ
  double write_switch_fraction = 0.0321382;   // fraction of line bits switched per write

  // Leakage.
  double leakage_per_bitcell = 230.3;         // nW, volatile cells only
  double decoder_leakage_per_row = 1438.5;    // nW
  double senseamp_leakage_volatile = 0.00284968; // nW
  double senseamp_leakage_resistive = 1.54483; // nW
  double write_driver_leakage = 218.109;      // nW per write-driver fin
  double mat_leakage = 2.26706;               // uW per mat

  // Off-chip memory and the compute reference.
  double mac_energy = 0.0583;                 // nJ per MAC
  double dram_access_energy = 11.67;          // nJ per transaction (~200 MACs)
  double dram_access_latency = 100;           // ns per transaction

  double clock_period_ns() const { return 1e3 / clock_frequency; }

  friend bool operator==(const TechConfig&, const TechConfig&) = default;
};

/// Field table shared by parsing, serialization, validation and calibration.
struct TechField {
  std::string_view name;
  double TechConfig::*member;
  bool strictly_positive;
};

inline const std::vector<TechField>& tech_fields() {
  static const std::vector<TechField> fields = {
      {"node", &TechConfig::node, true},
      {"clock_frequency", &TechConfig::clock_frequency, true},
      {"vdd", &TechConfig::vdd, true},
      {"wire_res_per_mm", &TechConfig::wire_res_per_mm, false},
      {"wire_cap_per_mm", &TechConfig::wire_cap_per_mm, false},
      {"htree_hop_delay", &TechConfig::htree_hop_delay, false},
      {"sram_cell_area", &TechConfig::sram_cell_area, true},
      {"decoder_width_base", &TechConfig::decoder_width_base, false},
      {"decoder_width_per_bit", &TechConfig::decoder_width_per_bit, false},
      {"senseamp_area_volatile", &TechConfig::senseamp_area_volatile, false},
      {"senseamp_area_resistive", &TechConfig::senseamp_area_resistive, false},
      {"write_driver_area", &TechConfig::write_driver_area, false},
      {"column_mux_area", &TechConfig::column_mux_area, false},
      {"mat_overhead_area", &TechConfig::mat_overhead_area, false},
      {"routing_area_fraction", &TechConfig::routing_area_fraction, false},
      {"cache_overhead_area", &TechConfig::cache_overhead_area, false},
      {"decoder_delay_base", &TechConfig::decoder_delay_base, false},
      {"decoder_delay_per_stage", &TechConfig::decoder_delay_per_stage, false},
      {"wordline_delay", &TechConfig::wordline_delay, false},
      {"bitline_delay", &TechConfig::bitline_delay, false},
      {"bitline_delay_resistive", &TechConfig::bitline_delay_resistive, false},
      {"senseamp_delay_base", &TechConfig::senseamp_delay_base, false},
      {"column_mux_delay", &TechConfig::column_mux_delay, false},
      {"driver_delay_base", &TechConfig::driver_delay_base, false},
      {"tag_array_fraction", &TechConfig::tag_array_fraction, false},
      {"tag_compare_delay", &TechConfig::tag_compare_delay, false},
      {"way_select_delay", &TechConfig::way_select_delay, false},
      {"speculation_penalty", &TechConfig::speculation_penalty, false},
      {"decoder_energy_per_stage", &TechConfig::decoder_energy_per_stage, false},
      {"wordline_energy_per_cell", &TechConfig::wordline_energy_per_cell, false},
      {"bitline_energy_per_cell", &TechConfig::bitline_energy_per_cell, false},
      {"senseamp_energy_volatile", &TechConfig::senseamp_energy_volatile, false},
      {"senseamp_energy_resistive", &TechConfig::senseamp_energy_resistive, false},
      {"driver_energy_base", &TechConfig::driver_energy_base, false},
      {"write_bitline_loss", &TechConfig::write_bitline_loss, false},
      {"tag_access_energy", &TechConfig::tag_access_energy, false},
      {"write_switch_fraction", &TechConfig::write_switch_fraction, true},
      {"leakage_per_bitcell", &TechConfig::leakage_per_bitcell, false},
      {"decoder_leakage_per_row", &TechConfig::decoder_leakage_per_row, false},
      {"senseamp_leakage_volatile", &TechConfig::senseamp_leakage_volatile, false},
      {"senseamp_leakage_resistive", &TechConfig::senseamp_leakage_resistive, false},
      {"write_driver_leakage", &TechConfig::write_driver_leakage, false},
      {"mat_leakage", &TechConfig::mat_leakage, false},
      {"mac_energy", &TechConfig::mac_energy, true},
      {"dram_access_energy", &TechConfig::dram_access_energy, false},
      {"dram_access_latency", &TechConfig::dram_access_latency, false},
  };
  return fields;
}

inline void validate(const TechConfig& t) {
  for (const auto& f : tech_fields()) {
    const double v = t.*f.member;
    if (!std::isfinite(v) || v < 0.0 || (f.strictly_positive && v == 0.0)) throw NonPositiveValue(std::string(f.name));
  }
  if (t.write_switch_fraction > 1.0) throw InvalidValue("write_switch_fraction", "must lie in (0, 1]");
}

/// Missing keys keep their defaults so older files stay loadable; unknown
/// keys are rejected.
inline TechConfig tech_from_document(const KvDocument& doc) {
  TechConfig t;
  for (const auto& key : doc.keys()) {
    const auto& fields = tech_fields();
    const auto it = std::find_if(fields.begin(), fields.end(), [&](const TechField& f) { return f.name == key; });
    if (it == fields.end()) throw InvalidValue(key, "unknown technology field");
    t.*(it->member) = doc.number(key);
  }
  validate(t);
  return t;
}

inline TechConfig load_tech(std::string_view text) { return tech_from_document(KvDocument::parse(text)); }

inline TechConfig load_tech_file(const std::string& path) { return tech_from_document(KvDocument::load(path)); }

inline std::string serialize(const TechConfig& t) {
  KvDocument d;
  for (const auto& f : tech_fields()) d.set(std::string(f.name), t.*f.member);
  return "# units: nm, MHz, V, ns, nJ, um, um^2, kOhm/mm, pF/mm, nW, uW\n" + d.serialize();
}

}  // namespace nvmdse
