#pragma once

// DNN registry, profiler-counter profiles and memory traces.
//
// Profile CSV columns:
//   dnn,stage,batch_size,l2_read_tx,l2_write_tx,dram_read_tx,dram_write_tx[,exec_time_ms]
// batch_size may be left empty (or the column omitted); it then defaults to
// 4 for inference and 64 for training.
//
// Text trace: one "<hex address> <R|W>" record per line ('#' comments allowed).
// Binary trace: magic "NVMT1", then 9-byte records (u64 LE address, u8 op
// where 0 = read, 1 = write).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "nvmdse/error.hpp"
#include "nvmdse/kvtext.hpp"

namespace nvmdse {

struct DnnSpec {
  std::string name;
  double top5_error = 0.0;  // percent
  std::uint32_t conv_layers = 0;
  std::uint32_t fc_layers = 0;
  std::uint64_t total_weights = 0;
  std::uint64_t total_macs = 0;

  friend bool operator==(const DnnSpec&, const DnnSpec&) = default;
};

/// The five ImageNet networks used for the iso-capacity study.
inline std::vector<DnnSpec> builtin_dnns() {
  return {
      {"AlexNet", 16.4, 5, 3, 61'000'000, 724'000'000},
      {"GoogLeNet", 6.7, 57, 1, 7'000'000, 1'430'000'000},
      {"VGG-16", 7.3, 13, 3, 138'000'000, 15'500'000'000},
      {"ResNet-18", 10.71, 17, 1, 11'800'000, 2'000'000'000},
      {"SqueezeNet", 16.4, 26, 0, 1'200'000, 837'000'000},
  };
}

enum class Stage { Inference, Training };

inline std::string_view to_string(Stage s) { return s == Stage::Inference ? "Inference" : "Training"; }

inline std::optional<Stage> parse_stage(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "inference" || lower == "i") return Stage::Inference;
  if (lower == "training" || lower == "t") return Stage::Training;
  return std::nullopt;
}

inline std::uint32_t default_batch_size(Stage s) { return s == Stage::Inference ? 4 : 64; }

struct WorkloadProfile {
  std::string dnn;
  Stage stage = Stage::Inference;
  std::uint32_t batch_size = 4;
  std::uint64_t l2_read_tx = 0;
  std::uint64_t l2_write_tx = 0;
  std::uint64_t dram_read_tx = 0;
  std::uint64_t dram_write_tx = 0;
  std::optional<double> exec_time_ms;

  std::uint64_t l2_tx() const { return l2_read_tx + l2_write_tx; }
  std::uint64_t dram_tx() const { return dram_read_tx + dram_write_tx; }

  friend bool operator==(const WorkloadProfile&, const WorkloadProfile&) = default;
};

inline constexpr std::array<std::string_view, 8> kProfileColumns = {
    "dnn", "stage", "batch_size", "l2_read_tx", "l2_write_tx", "dram_read_tx", "dram_write_tx", "exec_time_ms"};

namespace detail {

inline std::uint64_t parse_count(const std::string& cell, std::size_t row, const std::string& column) {
  const auto v = parse_int(cell);
  if (!v) throw SchemaError(row, column, "expected an integer, got '" + cell + "'");
  if (*v < 0) throw NegativeCount(row, column);
  return static_cast<std::uint64_t>(*v);
}

}  // namespace detail

inline std::vector<WorkloadProfile> parse_profiles(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw SchemaError(0, "dnn", "missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = detail::split(line, ',');
  std::vector<int> idx(kProfileColumns.size(), -1);
  for (std::size_t i = 0; i < header.size(); ++i) {
    const auto name = std::string(detail::trim(header[i]));
    const auto it = std::find(kProfileColumns.begin(), kProfileColumns.end(), name);
    if (it == kProfileColumns.end()) throw SchemaError(0, name, "unknown column");
    auto& slot = idx[static_cast<std::size_t>(it - kProfileColumns.begin())];
    if (slot >= 0) throw SchemaError(0, name, "duplicate column");
    slot = static_cast<int>(i);
  }
  for (std::size_t c = 0; c < kProfileColumns.size(); ++c) {
    const auto& name = kProfileColumns[c];
    if (idx[c] < 0 && name != "batch_size" && name != "exec_time_ms")
      throw SchemaError(0, std::string(name), "required column missing");
  }

  std::vector<WorkloadProfile> out;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    ++row;
    const auto cells = detail::split(line, ',');
    if (cells.size() != header.size())
      throw SchemaError(row, "*", "expected " + std::to_string(header.size()) + " cells, got " +
                                      std::to_string(cells.size()));
    auto cell = [&](std::size_t c) { return std::string(detail::trim(cells[static_cast<std::size_t>(idx[c])])); };

    WorkloadProfile p;
    p.dnn = cell(0);
    if (p.dnn.empty()) throw SchemaError(row, "dnn", "empty");
    const auto stage = parse_stage(cell(1));
    if (!stage) throw SchemaError(row, "stage", "expected Inference or Training, got '" + cell(1) + "'");
    p.stage = *stage;
    p.batch_size = default_batch_size(p.stage);
    if (idx[2] >= 0 && !cell(2).empty()) {
      const auto b = detail::parse_count(cell(2), row, "batch_size");
      if (b < 1) throw SchemaError(row, "batch_size", "must be >= 1");
      p.batch_size = static_cast<std::uint32_t>(b);
    }
    p.l2_read_tx = detail::parse_count(cell(3), row, "l2_read_tx");
    p.l2_write_tx = detail::parse_count(cell(4), row, "l2_write_tx");
    p.dram_read_tx = detail::parse_count(cell(5), row, "dram_read_tx");
    p.dram_write_tx = detail::parse_count(cell(6), row, "dram_write_tx");
    if (idx[7] >= 0 && !cell(7).empty()) {
      const auto t = detail::parse_double(cell(7));
      if (!t) throw SchemaError(row, "exec_time_ms", "expected a number, got '" + cell(7) + "'");
      if (*t < 0.0) throw SchemaError(row, "exec_time_ms", "must be >= 0");
      p.exec_time_ms = *t;
    }
    out.push_back(std::move(p));
  }
  return out;
}

inline std::vector<WorkloadProfile> load_profiles(const std::string& path) {
  return parse_profiles(detail::read_file(path));
}

inline std::string profiles_to_csv(const std::vector<WorkloadProfile>& profiles) {
  std::string out = "dnn,stage,batch_size,l2_read_tx,l2_write_tx,dram_read_tx,dram_write_tx,exec_time_ms\n";
  for (const auto& p : profiles) {
    out += p.dnn + "," + std::string(to_string(p.stage)) + "," + std::to_string(p.batch_size) + "," +
           std::to_string(p.l2_read_tx) + "," + std::to_string(p.l2_write_tx) + "," +
           std::to_string(p.dram_read_tx) + "," + std::to_string(p.dram_write_tx) + "," +
           (p.exec_time_ms ? detail::format_double(*p.exec_time_ms) : std::string()) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic profiles

namespace detail {

/// Uniform double in [0, 1) from the top 53 bits; portable across standard
/// libraries, unlike std::uniform_real_distribution.
inline double unit_double(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace detail

/// Seeded stand-in for a profiler dump. The L2 split is exact; DRAM counters
/// follow a fixed miss model:
///   dram_read_tx  = round(l2_read_tx  * U(0.10, 0.30))
///   dram_write_tx = round(l2_write_tx * U(0.40, 0.80))
/// with both uniforms drawn in that order from mt19937_64(seed).
inline WorkloadProfile synth_profile(double read_fraction, std::uint64_t total_tx, std::uint64_t seed) {
  if (!(read_fraction >= 0.0 && read_fraction <= 1.0))
    throw InvalidValue("read_fraction", "must lie in [0, 1]");
  WorkloadProfile p;
  p.dnn = "synthetic";
  p.l2_read_tx = static_cast<std::uint64_t>(std::llround(read_fraction * static_cast<double>(total_tx)));
  p.l2_read_tx = std::min(p.l2_read_tx, total_tx);
  p.l2_write_tx = total_tx - p.l2_read_tx;
  std::mt19937_64 rng(seed);
  const double read_miss = 0.10 + 0.20 * detail::unit_double(rng);
  const double write_back = 0.40 + 0.40 * detail::unit_double(rng);
  p.dram_read_tx = static_cast<std::uint64_t>(std::llround(read_miss * static_cast<double>(p.l2_read_tx)));
  p.dram_write_tx = static_cast<std::uint64_t>(std::llround(write_back * static_cast<double>(p.l2_write_tx)));
  return p;
}

/// Parameters for the shipped synthetic workload suite (one profile per
/// builtin DNN and stage). Transactions scale with MACs x batch; the
/// execution time models a fixed sustained MAC throughput.
struct SuiteSpec {
  std::uint64_t seed = 42;
  double inference_read_fraction = 0.80;
  double training_read_fraction = 0.86;
  double tx_per_kmac = 1.0;           // L2 transactions per 1000 MACs (forward pass)
  double training_pass_factor = 3.0;  // forward + backward + weight update
  double gmacs_per_second = 2000.0;   // sustained throughput behind exec_time
  /// Training read fraction gain per doubling of the batch over the stage
  /// default; larger batches reuse weights more.
  double training_read_gain_per_doubling = 0.01;
  double max_read_fraction = 0.98;
};

inline double suite_read_fraction(Stage stage, std::uint32_t batch, const SuiteSpec& spec) {
  if (stage == Stage::Inference) return spec.inference_read_fraction;
  const double doublings = std::log2(static_cast<double>(batch) / default_batch_size(stage));
  return std::clamp(spec.training_read_fraction + spec.training_read_gain_per_doubling * doublings, 0.0,
                    spec.max_read_fraction);
}

inline WorkloadProfile synth_suite_profile(const DnnSpec& dnn, Stage stage, std::uint32_t batch,
                                           const SuiteSpec& spec, std::uint64_t seed) {
  const double passes = stage == Stage::Training ? spec.training_pass_factor : 1.0;
  const double macs = static_cast<double>(dnn.total_macs) * batch * passes;
  const auto total = static_cast<std::uint64_t>(std::llround(macs / 1000.0 * spec.tx_per_kmac));
  if (batch == 0) throw NonPositiveValue("batch_size");
  auto p = synth_profile(suite_read_fraction(stage, batch, spec), total, seed);
  p.dnn = dnn.name;
  p.stage = stage;
  p.batch_size = batch;
  p.exec_time_ms = macs / (spec.gmacs_per_second * 1e9) * 1e3;
  return p;
}

inline std::vector<WorkloadProfile> synth_suite(const SuiteSpec& spec = {}) {
  std::vector<WorkloadProfile> out;
  std::uint64_t k = 0;
  for (const auto& dnn : builtin_dnns()) {
    for (const Stage s : {Stage::Inference, Stage::Training}) {
      out.push_back(synth_suite_profile(dnn, s, default_batch_size(s), spec, spec.seed * 1000 + k++));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Traces

enum class MemOp : std::uint8_t { Read = 0, Write = 1 };

struct TraceRecord {
  std::uint64_t address = 0;
  MemOp op = MemOp::Read;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct MemoryTrace {
  std::vector<TraceRecord> records;
  std::uint32_t line_size_hint = 128;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

inline constexpr std::string_view kTraceMagic = "NVMT1";

inline MemoryTrace parse_text_trace(std::string_view text) {
  MemoryTrace trace;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = detail::trim(view);
    if (view.empty()) continue;
    const auto sp = view.find_first_of(" \t");
    if (sp == std::string_view::npos) throw MalformedRecord(line_no, "expected '<hex address> <R|W>'");
    auto addr = view.substr(0, sp);
    const auto op = detail::trim(view.substr(sp));
    if (addr.size() > 2 && addr[0] == '0' && (addr[1] == 'x' || addr[1] == 'X')) addr.remove_prefix(2);
    std::uint64_t a = 0;
    const auto [ptr, ec] = std::from_chars(addr.data(), addr.data() + addr.size(), a, 16);
    if (addr.empty() || ec != std::errc{} || ptr != addr.data() + addr.size())
      throw MalformedRecord(line_no, "bad address '" + std::string(addr) + "'");
    TraceRecord r{a, MemOp::Read};
    if (op == "R" || op == "r") {
      r.op = MemOp::Read;
    } else if (op == "W" || op == "w") {
      r.op = MemOp::Write;
    } else {
      throw MalformedRecord(line_no, "bad op '" + std::string(op) + "'");
    }
    trace.records.push_back(r);
  }
  return trace;
}

inline MemoryTrace parse_binary_trace(std::string_view bytes) {
  if (bytes.substr(0, kTraceMagic.size()) != kTraceMagic) throw MalformedRecord(0, "missing NVMT1 magic");
  bytes.remove_prefix(kTraceMagic.size());
  if (bytes.size() % 9 != 0) throw MalformedRecord(bytes.size() / 9 + 1, "truncated binary record");
  MemoryTrace trace;
  trace.records.reserve(bytes.size() / 9);
  for (std::size_t i = 0; i < bytes.size(); i += 9) {
    std::uint64_t a = 0;
    for (int b = 7; b >= 0; --b) a = (a << 8) | static_cast<unsigned char>(bytes[i + static_cast<std::size_t>(b)]);
    const auto op = static_cast<unsigned char>(bytes[i + 8]);
    if (op > 1) throw MalformedRecord(i / 9 + 1, "bad op byte " + std::to_string(op));
    trace.records.push_back({a, static_cast<MemOp>(op)});
  }
  return trace;
}

/// Loads either trace format, detected by the binary magic.
inline MemoryTrace load_trace(const std::string& path) {
  const auto bytes = detail::read_file(path);
  if (std::string_view(bytes).substr(0, kTraceMagic.size()) == kTraceMagic) return parse_binary_trace(bytes);
  return parse_text_trace(bytes);
}

inline std::string trace_to_text(const MemoryTrace& trace) {
  std::string out;
  out.reserve(trace.size() * 14);
  char buf[32];
  for (const auto& r : trace.records) {
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, r.address, 16);
    out.append("0x").append(buf, ptr).append(r.op == MemOp::Read ? " R\n" : " W\n");
  }
  return out;
}

inline std::string trace_to_binary(const MemoryTrace& trace) {
  std::string out(kTraceMagic);
  out.reserve(out.size() + trace.size() * 9);
  for (const auto& r : trace.records) {
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((r.address >> (8 * b)) & 0xff));
    out.push_back(static_cast<char>(r.op));
  }
  return out;
}

/// FNV-1a over the binary encoding; pins generated traces in tests.
inline std::uint64_t trace_digest(const MemoryTrace& trace) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 0x100000001b3ull;
  };
  for (const auto& r : trace.records) {
    for (int b = 0; b < 8; ++b) mix(static_cast<unsigned char>((r.address >> (8 * b)) & 0xff));
    mix(static_cast<unsigned char>(r.op));
  }
  return h;
}

/// Stack-distance controlled generator. Each access picks a reuse depth in
/// the LRU stack of previously touched lines:
///   - with probability `new_fraction` a never-seen line;
///   - with probability `near_fraction` a depth log-uniform in [1, near_max];
///   - otherwise a depth log-uniform in [far_min, far_max].
/// Depths beyond the current stack size fall back to a new line. Line ids
/// are scattered over the address space by an odd-multiplier bijection so
/// that set indexing sees no artificial stride.
struct TraceGenSpec {
  std::uint64_t accesses = 100'000;
  std::uint64_t seed = 1;
  std::uint32_t line_size = 128;
  double new_fraction = 0.05;
  double near_fraction = 0.6;
  double near_max = 256;
  double far_min = 4096;
  double far_max = 524288;
  double write_fraction = 0.2;

  static TraceGenSpec from_document(const KvDocument& doc) {
    TraceGenSpec s;
    s.accesses = static_cast<std::uint64_t>(doc.integer("accesses"));
    s.seed = static_cast<std::uint64_t>(doc.integer("seed"));
    if (doc.has("line_size")) s.line_size = static_cast<std::uint32_t>(doc.integer("line_size"));
    s.new_fraction = doc.number_or("new_fraction", s.new_fraction);
    s.near_fraction = doc.number_or("near_fraction", s.near_fraction);
    s.near_max = doc.number_or("near_max", s.near_max);
    s.far_min = doc.number_or("far_min", s.far_min);
    s.far_max = doc.number_or("far_max", s.far_max);
    s.write_fraction = doc.number_or("write_fraction", s.write_fraction);
    s.validate();
    return s;
  }

  KvDocument to_document() const {
    KvDocument d;
    d.set("accesses", std::to_string(accesses));
    d.set("seed", std::to_string(seed));
    d.set("line_size", std::to_string(line_size));
    d.set("new_fraction", new_fraction);
    d.set("near_fraction", near_fraction);
    d.set("near_max", near_max);
    d.set("far_min", far_min);
    d.set("far_max", far_max);
    d.set("write_fraction", write_fraction);
    return d;
  }

  void validate() const {
    auto prob = [](const char* name, double v) {
      if (!(v >= 0.0 && v <= 1.0)) throw InvalidValue(name, "must lie in [0, 1]");
    };
    prob("new_fraction", new_fraction);
    prob("near_fraction", near_fraction);
    prob("write_fraction", write_fraction);
    if (new_fraction + near_fraction > 1.0) throw InvalidValue("near_fraction", "new + near must be <= 1");
    if (line_size == 0 || (line_size & (line_size - 1)) != 0) throw InvalidValue("line_size", "power of two required");
    if (!(near_max >= 1.0)) throw InvalidValue("near_max", "must be >= 1");
    if (!(far_min >= 1.0 && far_max >= far_min)) throw InvalidValue("far_max", "need 1 <= far_min <= far_max");
  }
};

namespace detail {

// Fenwick tree over access timestamps; a set bit marks the most recent
// access of some line, so ranking by timestamp gives LRU stack order.
class Fenwick {
 public:
  explicit Fenwick(std::size_t n) : tree_(n + 1, 0), log_(1) {
    while ((std::size_t{1} << log_) <= n) ++log_;
  }

  void add(std::size_t i, int delta) {
    for (++i; i < tree_.size(); i += i & (~i + 1)) tree_[i] += delta;
  }

  /// Smallest index whose inclusive prefix sum reaches k (k >= 1).
  std::size_t find_kth(std::int64_t k) const {
    std::size_t pos = 0;
    for (int b = log_; b >= 0; --b) {
      const std::size_t next = pos + (std::size_t{1} << b);
      if (next < tree_.size() && tree_[next] < k) {
        pos = next;
        k -= tree_[next];
      }
    }
    return pos;  // 0-based index
  }

 private:
  std::vector<std::int64_t> tree_;
  int log_;
};

inline double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * unit_double(rng));
}

}  // namespace detail

inline MemoryTrace generate_trace(const TraceGenSpec& spec) {
  spec.validate();
  MemoryTrace trace;
  trace.line_size_hint = spec.line_size;
  trace.records.reserve(spec.accesses);
  std::mt19937_64 rng(spec.seed);
  detail::Fenwick active(spec.accesses);
  std::vector<std::uint64_t> line_at(spec.accesses);
  std::int64_t stack = 0;
  std::uint64_t next_line = 0;
  constexpr std::uint64_t kScatter = 0x9E3779B97F4A7C15ull;
  constexpr std::uint64_t kLineMask = (std::uint64_t{1} << 34) - 1;

  for (std::uint64_t t = 0; t < spec.accesses; ++t) {
    const double u = detail::unit_double(rng);
    std::int64_t depth = 0;  // 0 = new line
    if (u >= spec.new_fraction) {
      const bool near = u < spec.new_fraction + spec.near_fraction;
      const double d = near ? detail::log_uniform(rng, 1.0, spec.near_max)
                            : detail::log_uniform(rng, spec.far_min, spec.far_max);
      depth = std::max<std::int64_t>(1, static_cast<std::int64_t>(d));
      if (depth > stack) depth = 0;
    }
    std::uint64_t line = 0;
    if (depth == 0) {
      line = next_line++;
      ++stack;
    } else {
      // depth-th most recent == (stack - depth + 1)-th oldest
      const auto pos = active.find_kth(stack - depth + 1);
      line = line_at[pos];
      active.add(pos, -1);
    }
    active.add(t, +1);
    line_at[t] = line;
    const bool write = detail::unit_double(rng) < spec.write_fraction;
    const std::uint64_t offset = rng() % spec.line_size;
    const std::uint64_t scattered = (line * kScatter) & kLineMask;
    trace.records.push_back({scattered * spec.line_size + offset, write ? MemOp::Write : MemOp::Read});
  }
  return trace;
}

}  // namespace nvmdse
