#pragma once

// First-order power/performance/area model of a set-associative cache built
// from a given bitcell. See docs/model_ledger.md (also printed by
// `nvmdse ledger`) for every formula; the comments here only name the stages.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nvmdse/error.hpp"
#include "nvmdse/techlib.hpp"

namespace nvmdse {

inline constexpr std::uint64_t kMiB = std::uint64_t{1} << 20;

enum class AccessType { Normal, Fast, Sequential };

inline constexpr std::array<AccessType, 3> kAllAccessTypes = {AccessType::Normal, AccessType::Fast,
                                                              AccessType::Sequential};

inline std::string_view to_string(AccessType a) {
  switch (a) {
    case AccessType::Normal: return "Normal";
    case AccessType::Fast: return "Fast";
    case AccessType::Sequential: return "Sequential";
  }
  return "?";
}

enum class OptTarget { ReadLatency, WriteLatency, ReadEnergy, WriteEnergy, ReadEDP, WriteEDP, Area, Leakage };

inline constexpr std::array<OptTarget, 8> kAllOptTargets = {
    OptTarget::ReadLatency, OptTarget::WriteLatency, OptTarget::ReadEnergy, OptTarget::WriteEnergy,
    OptTarget::ReadEDP,     OptTarget::WriteEDP,     OptTarget::Area,       OptTarget::Leakage};

inline std::string_view to_string(OptTarget t) {
  switch (t) {
    case OptTarget::ReadLatency: return "ReadLatency";
    case OptTarget::WriteLatency: return "WriteLatency";
    case OptTarget::ReadEnergy: return "ReadEnergy";
    case OptTarget::WriteEnergy: return "WriteEnergy";
    case OptTarget::ReadEDP: return "ReadEDP";
    case OptTarget::WriteEDP: return "WriteEDP";
    case OptTarget::Area: return "Area";
    case OptTarget::Leakage: return "Leakage";
  }
  return "?";
}

/// Internal layout. Capacity in bits is
///   banks * mats_per_bank * subarrays_per_mat * rows * cols
/// (one bit per cell). Everything but subarrays_per_mat is a power of two;
/// subarrays_per_mat absorbs non-power-of-two capacities such as 3 MB.
struct Organization {
  std::uint32_t banks = 1;
  std::uint32_t mats_per_bank = 1;
  std::uint32_t subarrays_per_mat = 1;
  std::uint32_t rows = 64;
  std::uint32_t cols = 64;
  std::uint32_t senseamp_mux = 1;
  std::uint32_t line_size = 128;  // bytes
  std::uint32_t associativity = 16;

  std::uint64_t capacity_bits() const {
    return std::uint64_t{banks} * mats_per_bank * subarrays_per_mat * rows * cols;
  }
  std::uint64_t capacity_bytes() const { return capacity_bits() / 8; }
  std::uint64_t subarrays() const { return std::uint64_t{banks} * mats_per_bank * subarrays_per_mat; }
  std::uint32_t line_bits() const { return line_size * 8; }
  /// Bits delivered by one activated subarray after column muxing.
  std::uint32_t bits_per_subarray() const { return cols / senseamp_mux; }

  friend bool operator==(const Organization&, const Organization&) = default;
};

struct OrgBounds {
  std::uint32_t min_rows = 64, max_rows = 1024;
  std::uint32_t min_cols = 64, max_cols = 1024;
  std::uint32_t max_banks = 64;
  std::uint32_t max_mats = 64;
  std::uint32_t max_subarrays = 16;
  std::uint32_t max_mux = 8;
  std::uint32_t line_size = 128;
  std::uint32_t associativity = 16;
};

struct CachePPA {
  MemoryKind kind = MemoryKind::SRAM;
  std::uint64_t capacity = 0;  // bytes
  double read_latency = 0.0;   // ns
  double write_latency = 0.0;  // ns
  double read_energy = 0.0;    // nJ per access
  double write_energy = 0.0;   // nJ per access
  double leakage_power = 0.0;  // mW
  double area = 0.0;           // mm^2
  Organization organization;
  AccessType access_type = AccessType::Normal;

  friend bool operator==(const CachePPA&, const CachePPA&) = default;
};

inline double metric(const CachePPA& p, OptTarget t) {
  switch (t) {
    case OptTarget::ReadLatency: return p.read_latency;
    case OptTarget::WriteLatency: return p.write_latency;
    case OptTarget::ReadEnergy: return p.read_energy;
    case OptTarget::WriteEnergy: return p.write_energy;
    case OptTarget::ReadEDP: return p.read_energy * p.read_latency;
    case OptTarget::WriteEDP: return p.write_energy * p.write_latency;
    case OptTarget::Area: return p.area;
    case OptTarget::Leakage: return p.leakage_power;
  }
  return 0.0;
}

namespace detail {

inline bool is_pow2(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

inline double log2u(std::uint64_t v) { return std::log2(static_cast<double>(v)); }

}  // namespace detail

/// Checks an organization against its own invariants and, if given, a
/// target capacity.
inline void validate(const Organization& o, std::optional<std::uint64_t> capacity_bytes = std::nullopt) {
  auto fail = [](const std::string& why) { throw InfeasibleOrganization(why); };
  if (!detail::is_pow2(o.banks) || !detail::is_pow2(o.mats_per_bank)) fail("banks and mats must be powers of two");
  if (!detail::is_pow2(o.rows) || !detail::is_pow2(o.cols)) fail("rows and cols must be powers of two");
  if (o.subarrays_per_mat < 1) fail("subarrays_per_mat must be >= 1");
  if (!detail::is_pow2(o.senseamp_mux) || o.senseamp_mux > o.cols) fail("senseamp_mux must be a power of two <= cols");
  if (o.line_size == 0 || o.associativity == 0) fail("line size and associativity must be >= 1");
  const std::uint64_t needed = (o.line_bits() + o.bits_per_subarray() - 1) / o.bits_per_subarray();
  if (needed > std::uint64_t{o.mats_per_bank} * o.subarrays_per_mat)
    fail("a bank cannot deliver a full line with this column muxing");
  if (capacity_bytes && o.capacity_bits() != *capacity_bytes * 8)
    fail("organization holds " + std::to_string(o.capacity_bits()) + " bits, expected " +
         std::to_string(*capacity_bytes * 8));
}

/// All organizations within bounds holding exactly `capacity` bytes, in
/// lexicographic (banks, mats, rows, cols, mux) order.
inline std::vector<Organization> enumerate_organizations(std::uint64_t capacity, const OrgBounds& bounds = {}) {
  const std::uint64_t way_bytes = std::uint64_t{bounds.line_size} * bounds.associativity;
  if (capacity == 0 || capacity % way_bytes != 0)
    throw InfeasibleCapacity(std::to_string(capacity) + " bytes is not a positive multiple of line_size x associativity (" +
                             std::to_string(way_bytes) + ")");
  const std::uint64_t bits = capacity * 8;
  std::vector<Organization> out;
  for (std::uint32_t b = 1; b <= bounds.max_banks; b *= 2)
    for (std::uint32_t m = 1; m <= bounds.max_mats; m *= 2)
      for (std::uint32_t r = bounds.min_rows; r <= bounds.max_rows; r *= 2)
        for (std::uint32_t c = bounds.min_cols; c <= bounds.max_cols; c *= 2) {
          const std::uint64_t per_subarray_group = std::uint64_t{b} * m * r * c;
          if (bits % per_subarray_group != 0) continue;
          const std::uint64_t s = bits / per_subarray_group;
          if (s < 1 || s > bounds.max_subarrays) continue;
          for (std::uint32_t x = 1; x <= bounds.max_mux; x *= 2) {
            Organization o{b, m, static_cast<std::uint32_t>(s), r, c, x, bounds.line_size, bounds.associativity};
            const std::uint64_t needed = (o.line_bits() + o.bits_per_subarray() - 1) / o.bits_per_subarray();
            if (needed > std::uint64_t{m} * s) continue;
            out.push_back(o);
          }
        }
  if (out.empty())
    throw InfeasibleCapacity("no organization within bounds holds " + std::to_string(capacity) + " bytes");
  return out;
}

/// Stage-level breakdown of one evaluated design; CachePPA keeps the totals.
struct DesignBreakdown {
  double area_mm2 = 0.0;
  double side_mm = 0.0;
  double t_decode = 0.0, t_wordline = 0.0, t_bitline = 0.0, t_sense = 0.0, t_route = 0.0, t_tag = 0.0;
  double e_decode = 0.0, e_wordline = 0.0, e_bitline = 0.0, e_sense = 0.0, e_route = 0.0;
  double leak_cells = 0.0, leak_periphery = 0.0;
};

namespace detail {

struct ReferenceRead {
  // Read current of the STT cell (sense energy / sense latency); sense
  // amplifier delay scales with the inverse of a cell's current relative to this.
  static constexpr double kCurrentProxy = 0.076 / 650.0;
};

}  // namespace detail

/// Evaluates one design point. Pure: identical inputs give bit-identical output.
inline CachePPA evaluate_design(const BitcellParams& cell, const Organization& org, AccessType acc,
                                const TechConfig& tech, DesignBreakdown* breakdown = nullptr) {
  validate(org);
  const bool nonvolatile = is_nonvolatile(cell.kind);
  const double B = org.banks, M = org.mats_per_bank, S = org.subarrays_per_mat;
  const double R = org.rows, C = org.cols, X = org.senseamp_mux;
  const double line_bits = org.line_bits();
  const double ways = org.associativity;
  const double bits = static_cast<double>(org.capacity_bits());

  // Geometry (um, then mm^2).
  const double cell_side = std::sqrt(cell.area_norm * tech.sram_cell_area);
  const double decoder_width = tech.decoder_width_base + tech.decoder_width_per_bit * std::log2(R);
  const double senseamp_area = nonvolatile ? tech.senseamp_area_resistive : tech.senseamp_area_volatile;
  // Sense amps and write drivers are shared by X columns; every column has
  // its own read mux device sized like the cell's read transistor.
  const double column_strip = (senseamp_area + tech.write_driver_area * cell.fin_count_write) / (X * cell_side) +
                              tech.column_mux_area * cell.fin_count_read / cell_side;
  const double subarray_area = (C * cell_side + decoder_width) * (R * cell_side + column_strip);
  const double mat_area = S * subarray_area + tech.mat_overhead_area;
  const double area = B * M * mat_area * (1.0 + tech.routing_area_fraction) * 1e-6 + tech.cache_overhead_area;
  const double side = std::sqrt(area);

  // Delay (ns).
  const double read_current = cell.sense_energy / cell.sense_latency / detail::ReferenceRead::kCurrentProxy;
  const double address_bits = std::log2(B * M * S * R);
  const double t_decode = tech.decoder_delay_base + tech.decoder_delay_per_stage * address_bits;
  const double wordline_mm = C * cell_side * 1e-3;
  const double t_wordline = tech.wordline_delay * wordline_mm * wordline_mm;
  // A resistive cell discharges the bitline through its own junction.
  const double t_bitline = tech.bitline_delay * (R / 1000.0) +
                           (nonvolatile ? tech.bitline_delay_resistive * (R / 1000.0) / read_current : 0.0);
  // Sense amplifier resolution slows with weaker cell read current.
  const double t_sense =
      cell.sense_latency_ns() + tech.senseamp_delay_base / read_current + tech.column_mux_delay * std::log2(X);
  const double t_route = 0.5 * tech.wire_res_per_mm * tech.wire_cap_per_mm * side * side +
                         tech.htree_hop_delay * std::log2(B * M);
  const double core = t_decode + t_wordline + t_bitline + t_sense;
  const double t_data = core + 2.0 * t_route;  // address in, data out
  const double t_tag = tech.tag_array_fraction * core + tech.tag_compare_delay;

  double read_latency = 0.0;
  switch (acc) {
    case AccessType::Fast: read_latency = std::max(t_tag, t_data) + tech.way_select_delay; break;
    case AccessType::Normal:
      read_latency = std::max(t_tag, t_data) + tech.way_select_delay + tech.speculation_penalty;
      break;
    case AccessType::Sequential: read_latency = t_tag + t_data; break;
  }
  const double write_latency =
      t_decode + t_wordline + cell.write_latency_ns() + tech.driver_delay_base + t_route;

  // Energy (nJ).
  const double sensed_ways = acc == AccessType::Sequential ? 1.0 : ways;
  const double routed_ways = acc == AccessType::Fast ? ways : 1.0;
  const double sensed_bits = line_bits * sensed_ways;
  const double per_subarray = org.bits_per_subarray();
  const double active_read = std::ceil(sensed_bits / per_subarray);
  const double active_write = std::ceil(line_bits / per_subarray);
  const double wire_energy_per_bit_mm = tech.wire_cap_per_mm * tech.vdd * tech.vdd * 1e-3;

  const double e_decode_read = tech.decoder_energy_per_stage * address_bits * (1.0 + active_read / sensed_ways);
  // The read wordline charges the gates of every read fin on the row.
  const double e_wordline_read = active_read * C * tech.wordline_energy_per_cell * cell.fin_count_read;
  // Volatile arrays swing every column of an activated row; resistive arrays
  // only draw current on the sensed columns.
  const double e_bitline_read = nonvolatile ? sensed_bits * R * tech.bitline_energy_per_cell
                                            : active_read * C * R * tech.bitline_energy_per_cell;
  const double senseamp_energy = nonvolatile ? tech.senseamp_energy_resistive : tech.senseamp_energy_volatile;
  const double e_sense_read = sensed_bits * (cell.sense_energy_nj() + senseamp_energy);
  const double e_route_read = line_bits * routed_ways * side * wire_energy_per_bit_mm;
  const double read_energy =
      e_decode_read + e_wordline_read + e_bitline_read + e_sense_read + e_route_read + tech.tag_access_energy;

  const double switched_bits = line_bits * tech.write_switch_fraction;
  const double e_bitline_write = nonvolatile ? line_bits * R * tech.bitline_energy_per_cell
                                             : active_write * C * R * tech.bitline_energy_per_cell;
  // Resistive loss in the bitline while the write pulse is held.
  const double e_write_loss = switched_bits * tech.write_bitline_loss * (R / 1000.0) * cell.write_latency_ns();
  const double write_energy = e_write_loss + tech.decoder_energy_per_stage * address_bits + active_write * C * tech.wordline_energy_per_cell +
                              switched_bits * (cell.write_energy_nj() + tech.driver_energy_base) + e_bitline_write +
                              line_bits * side * wire_energy_per_bit_mm + tech.tag_access_energy;

  // Leakage (mW). Nonvolatile cells retain data without power.
  const double leak_cells = nonvolatile ? 0.0 : tech.leakage_per_bitcell * bits * 1e-6;
  const double senseamp_leak = nonvolatile ? tech.senseamp_leakage_resistive : tech.senseamp_leakage_volatile;
  const double leak_periph =
      B * M * S * (R * tech.decoder_leakage_per_row + (C / X) * (senseamp_leak + tech.write_driver_leakage * cell.fin_count_write)) *
          1e-6 +
      B * M * tech.mat_leakage * 1e-3;

  if (breakdown) {
    *breakdown = DesignBreakdown{area,        side,           t_decode,        t_wordline,   t_bitline,
                                 t_sense,     t_route,        t_tag,           e_decode_read, e_wordline_read,
                                 e_bitline_read, e_sense_read, e_route_read,   leak_cells,   leak_periph};
  }

  CachePPA p;
  p.kind = cell.kind;
  p.capacity = org.capacity_bytes();
  p.read_latency = read_latency;
  p.write_latency = write_latency;
  p.read_energy = read_energy;
  p.write_energy = write_energy;
  p.leakage_power = leak_cells + leak_periph;
  p.area = area;
  p.organization = org;
  p.access_type = acc;
  return p;
}

/// Every (organization, access type) design for one bitcell and capacity,
/// evaluated once so that repeated optimize() calls share the work.
class DesignSpace {
 public:
  DesignSpace(const BitcellParams& cell, std::uint64_t capacity, const TechConfig& tech, const OrgBounds& bounds = {})
      : capacity_(capacity), orgs_(enumerate_organizations(capacity, bounds)) {
    for (std::size_t a = 0; a < kAllAccessTypes.size(); ++a) {
      designs_[a].reserve(orgs_.size());
      for (const auto& o : orgs_) designs_[a].push_back(evaluate_design(cell, o, kAllAccessTypes[a], tech));
    }
  }

  std::uint64_t capacity() const { return capacity_; }
  const std::vector<Organization>& organizations() const { return orgs_; }
  const std::vector<CachePPA>& designs(AccessType a) const { return designs_[static_cast<std::size_t>(a)]; }

 private:
  std::uint64_t capacity_;
  std::vector<Organization> orgs_;
  std::array<std::vector<CachePPA>, 3> designs_;
};

/// Design minimizing `target`; ties go to the earliest organization in
/// enumeration order.
inline CachePPA optimize(const DesignSpace& space, OptTarget target, AccessType acc) {
  const auto& ds = space.designs(acc);
  std::size_t best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double v = metric(ds[i], target);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  return ds[best];
}

inline CachePPA optimize(const BitcellParams& cell, std::uint64_t capacity, OptTarget target, AccessType acc,
                         const TechConfig& tech, const OrgBounds& bounds = {}) {
  return optimize(DesignSpace(cell, capacity, tech, bounds), target, acc);
}

}  // namespace nvmdse
