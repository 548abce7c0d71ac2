// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nvmdse/calibrate.hpp"
#include "nvmdse/isoarea.hpp"
#include "nvmdse/pipeline.hpp"
#include "nvmdse/sweep.hpp"
#include "support/paths.hpp"
#include "support/reference_lru.hpp"
#include "support/table2.hpp"

using namespace nvmdse;
namespace fs = std::filesystem;

namespace {

// Tolerances and limits.
constexpr double kAnchorTolerance = 0.10;
constexpr double kIsoAreaSlack = 0.025;
constexpr double kAreaSttLo = 0.38, kAreaSttHi = 0.47, kAreaSotLo = 0.31, kAreaSotHi = 0.40;
constexpr double kLeakSttLo = 7.8, kLeakSttHi = 9.5, kLeakSotLo = 11.0, kLeakSotHi = 13.5;
constexpr int kOracleTraces = 1000;
constexpr std::size_t kOracleMaxAccesses = 10000;
constexpr std::uint64_t kOracleMaxLines = 64;
constexpr int kInclusionTraces = 100;
constexpr int kInclusionSteps = 5;
constexpr double kReductionLo = 10.0, kReductionHi = 25.0;
constexpr double kEdp32Max = 1.0 / 20.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double limit_s;
  std::function<Outcome()> check;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Model {
  TechConfig tech;
  BitcellSet cells;
};

// The shipped calibrated model, read from the data files the pipeline uses.
const Model& shipped() {
  static const Model m = [] {
    Model s;
    s.tech = load_tech_file(testing_paths::data("tech_16nm.cfg"));
    s.cells[MemoryKind::SRAM] = load_bitcell_file(testing_paths::data("sram_bitcell.cfg"));
    s.cells[MemoryKind::STT_MRAM] = load_bitcell_file(testing_paths::data("stt_bitcell.cfg"));
    s.cells[MemoryKind::SOT_MRAM] = load_bitcell_file(testing_paths::data("sot_bitcell.cfg"));
    return s;
  }();
  return m;
}

CachePPA ppa(MemoryKind k, std::uint64_t mb) { return tune(k, mb * kMiB, shipped().tech, shipped().cells).ppa; }

int run_cli(const std::string& args) {
  const int status = std::system((testing_paths::cli() + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("nvmdse_acceptance_" + name);
  fs::remove_all(p);
  return p;
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    out[fs::relative(e.path(), root).string()] = ss.str();
  }
  return out;
}

MemoryTrace random_trace(std::mt19937_64& rng, std::size_t n, std::uint64_t lines, std::uint32_t line) {
  MemoryTrace t;
  t.records.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    t.records.push_back({(rng() % lines) * line + rng() % line, rng() % 4 == 0 ? MemOp::Write : MemOp::Read});
  return t;
}

const MemoryTrace& golden() {
  static const MemoryTrace t =
      generate_trace(TraceGenSpec::from_document(KvDocument::load(testing_paths::data("golden_trace.cfg"))));
  return t;
}

// 1
Outcome table1() {
  struct Row {
    MemoryKind kind;
    double sl, se, wls, wlr, wes, wer;
    int fr, fw;
  };
  const Row rows[] = {{MemoryKind::STT_MRAM, 650, 0.076, 8400, 7780, 1.1, 2.2, 4, 4},
                      {MemoryKind::SOT_MRAM, 650, 0.020, 313, 243, 0.08, 0.08, 1, 3}};
  int mismatches = 0;
  for (const auto& r : rows) {
    for (const auto& b : {builtin_bitcell(r.kind), shipped().cells.at(r.kind)}) {
      mismatches += b.sense_latency != r.sl;
      mismatches += b.sense_energy != r.se;
      mismatches += b.write_latency_set != r.wls;
      mismatches += b.write_latency_reset != r.wlr;
      mismatches += b.write_energy_set != r.wes;
      mismatches += b.write_energy_reset != r.wer;
      mismatches += b.fin_count_read != r.fr;
      mismatches += b.fin_count_write != r.fw;
    }
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches over 16 values x {builtin, shipped file}"};
}

// 2
Outcome calibration() {
  const auto out = scratch("calibrate");
  const int rc = run_cli("calibrate --config " + testing_paths::data("pipeline.cfg") + " --output " + out.string());
  if (rc != 0) return {false, "calibrate exited " + std::to_string(rc)};
  const auto tech = load_tech_file((out / "calibrated_tech.cfg").string());
  BitcellSet cells = shipped().cells;
  cells[MemoryKind::SRAM] = load_bitcell_file((out / "calibrated_sram_bitcell.cfg").string());
  const auto anchors = load_anchors(testing_paths::data("table2_anchors.csv"));
  ModelState state{tech, cells.at(MemoryKind::SRAM)};
  BitcellSet mram = cells;
  mram.erase(MemoryKind::SRAM);
  const auto rs = residuals(anchors, state, mram);
  double worst = 0.0;
  std::string where;
  for (const auto& r : rs) {
    if (std::abs(r.rel_error) > worst) {
      worst = std::abs(r.rel_error);
      where = std::string(to_string(r.kind)) + " " + std::to_string(r.capacity / kMiB) + " MB " +
              std::string(column_name(r.metric));
    }
  }
  double worst3 = 0.0;
  for (const auto& col : table2::kColumns) {
    if (col.capacity_mb != 3) continue;
    const auto p = tune(col.kind, 3 * kMiB, tech, cells).ppa;
    for (const auto& [m, t] : {std::pair{p.read_latency, col.read_latency}, {p.write_latency, col.write_latency},
                               {p.read_energy, col.read_energy}, {p.write_energy, col.write_energy},
                               {p.leakage_power, col.leakage}, {p.area, col.area}})
      worst3 = std::max(worst3, std::abs(m / t - 1.0));
  }
  fs::remove_all(out);
  return {worst <= kAnchorTolerance && worst3 <= kAnchorTolerance,
          std::to_string(rs.size()) + " anchored metrics, worst " + fmt("%.1f%%", worst * 100) + " (" + where +
              "), worst at 3 MB " + fmt("%.1f%%", worst3 * 100) + ", limit " + fmt("%.0f%%", kAnchorTolerance * 100)};
}

// 3
Outcome isoarea() {
  const double budget = ppa(MemoryKind::SRAM, 3).area;
  IsoAreaOptions opt;
  opt.slack = kIsoAreaSlack;
  const auto stt = iso_area_capacity(MemoryKind::STT_MRAM, budget, shipped().tech, shipped().cells, opt).capacity / kMiB;
  const auto sot = iso_area_capacity(MemoryKind::SOT_MRAM, budget, shipped().tech, shipped().cells, opt).capacity / kMiB;
  return {stt == 7 && sot == 10, "STT " + std::to_string(stt) + " MB (want 7), SOT " + std::to_string(sot) +
                                     " MB (want 10), budget " + fmt("%.3f", budget * (1 + kIsoAreaSlack)) + " mm^2"};
}

// 4
Outcome area_ratios() {
  const double s = ppa(MemoryKind::SRAM, 3).area;
  const double a = ppa(MemoryKind::STT_MRAM, 3).area / s, b = ppa(MemoryKind::SOT_MRAM, 3).area / s;
  return {a >= kAreaSttLo && a <= kAreaSttHi && b >= kAreaSotLo && b <= kAreaSotHi,
          "STT/SRAM " + fmt("%.3f", a) + " in [0.38, 0.47], SOT/SRAM " + fmt("%.3f", b) + " in [0.31, 0.40]"};
}

// 5
Outcome leakage_ratios() {
  const double s = ppa(MemoryKind::SRAM, 3).leakage_power;
  const double a = s / ppa(MemoryKind::STT_MRAM, 3).leakage_power, b = s / ppa(MemoryKind::SOT_MRAM, 3).leakage_power;
  return {a >= kLeakSttLo && a <= kLeakSttHi && b >= kLeakSotLo && b <= kLeakSotHi,
          "SRAM/STT " + fmt("%.2f", a) + " in [7.8, 9.5], SRAM/SOT " + fmt("%.2f", b) + " in [11.0, 13.5]"};
}

// 6
Outcome oracle() {
  std::mt19937_64 rng(6);
  int bad = 0;
  for (int i = 0; i < kOracleTraces; ++i) {
    const std::uint32_t ways = 1u << (rng() % 7);  // 1..64
    const std::uint64_t sets = 1 + rng() % (kOracleMaxLines / ways);
    const std::uint32_t line = 32u << (rng() % 3);
    const CacheConfig cfg{sets * ways * line, line, ways};
    const auto t = random_trace(rng, 1 + rng() % kOracleMaxAccesses, 1 + rng() % (3 * kOracleMaxLines), line);
    bad += !(simulate_cache(t, cfg) == reference::simulate(t, cfg));
  }
  return {bad == 0, std::to_string(bad) + " mismatches in " + std::to_string(kOracleTraces) + " cases"};
}

// 7
Outcome inclusion() {
  std::mt19937_64 rng(7);
  int violations = 0;
  for (int i = 0; i < kInclusionTraces; ++i) {
    const auto t = random_trace(rng, 5000, 50 + rng() % 2000, 128);
    std::uint64_t lines = 4 + rng() % 12;
    auto prev = simulate_cache(t, CacheConfig::fully_associative(lines)).misses;
    for (int s = 0; s < kInclusionSteps; ++s) {
      lines *= 2;
      const auto next = simulate_cache(t, CacheConfig::fully_associative(lines)).misses;
      violations += next > prev;
      prev = next;
    }
  }
  return {violations == 0, std::to_string(violations) + " violations over " + std::to_string(kInclusionTraces) + " x " +
                               std::to_string(kInclusionSteps) + " doublings"};
}

// 8
Outcome reduction() {
  const auto base = simulate_cache(golden(), CacheConfig::set_associative(3 * kMiB));
  const double r7 = dram_reduction(base, simulate_cache(golden(), CacheConfig::set_associative(7 * kMiB)));
  const double r10 = dram_reduction(base, simulate_cache(golden(), CacheConfig::set_associative(10 * kMiB)));
  const auto in = [](double r) { return r >= kReductionLo && r <= kReductionHi; };
  return {in(r7) && in(r10) && r10 > r7,
          "3->7 MB " + fmt("%.2f%%", r7) + ", 3->10 MB " + fmt("%.2f%%", r10) + ", band [10, 25], 10 MB > 7 MB"};
}

// 9
Outcome inversion() {
  auto c = load_run_config(testing_paths::data("pipeline.cfg"));
  const auto base = tune(MemoryKind::SRAM, 3 * kMiB, shipped().tech, shipped().cells);
  const auto base_stats = simulate_cache(golden(), CacheConfig::set_associative(3 * kMiB));
  const auto profiles = load_workloads(c);
  AnalysisOptions opt = c.analysis;
  opt.include_dram = true;
  bool ok = true;
  std::string detail;
  for (const auto kind : {MemoryKind::STT_MRAM, MemoryKind::SOT_MRAM}) {
    const auto r = iso_area_capacity(kind, base.ppa.area, shipped().tech, shipped().cells);
    const auto stats = simulate_cache(golden(), CacheConfig::set_associative(r.capacity));
    double without = 0.0, with = 0.0;
    for (const auto& p : profiles) {
      const auto e = isoarea_report(p, base_stats, stats, base, r.tuned, shipped().tech, opt);
      without += e.ratios.edp;
      with += e.ratios.edp_with_dram;
    }
    without /= static_cast<double>(profiles.size());
    with /= static_cast<double>(profiles.size());
    ok = ok && with < without;
    detail += std::string(short_name(kind)) + " " + fmt("%.3f", with) + " with DRAM vs " + fmt("%.3f", without) + " without; ";
  }
  return {ok, detail + "means over " + std::to_string(profiles.size()) + " profiles"};
}

const SweepResult& default_sweep() {
  static const SweepResult r = [] {
    AnalysisOptions opt;
    opt.include_dram = false;
    return scalability_sweep({kAllKinds.begin(), kAllKinds.end()}, default_capacities(), synth_suite(), shipped().tech,
                             shipped().cells, opt);
  }();
  return r;
}

// 10
Outcome crossovers() {
  const auto& all = default_sweep().series;
  const auto S = MemoryKind::SRAM, T = MemoryKind::STT_MRAM, O = MemoryKind::SOT_MRAM;
  const auto* rl_s = find_series(all, "read_latency", S);
  bool a = true, c = true;
  for (std::size_t i = 0; i < rl_s->points.size(); ++i) {
    const auto mb = rl_s->points[i].capacity / kMiB;
    const double s = rl_s->points[i].value;
    const double t = find_series(all, "read_latency", T)->points[i].value;
    const double o = find_series(all, "read_latency", O)->points[i].value;
    if (mb <= 2) a = a && s < t && s < o;
    if (mb >= 8) a = a && s > t && s > o;
    const double ws = find_series(all, "write_energy", S)->points[i].value;
    if (mb >= 4)
      c = c && ws > find_series(all, "write_energy", T)->points[i].value &&
          ws > find_series(all, "write_energy", O)->points[i].value;
  }
  const auto re = find_crossover(*find_series(all, "read_energy", O), *find_series(all, "read_energy", S));
  const bool b = re.size() == 1 && re[0].capacity_low <= 4 * kMiB && re[0].capacity_high >= 8 * kMiB;
  std::string bracket = re.empty() ? "none" : "(" + std::to_string(re[0].capacity_low / kMiB) + ", " +
                                                  std::to_string(re[0].capacity_high / kMiB) + "] MB";
  return {a && b && c, std::string("(a) read latency ") + (a ? "ok" : "violated") + ", (b) SOT read-energy crossover " +
                           bracket + ", (c) SRAM write energy highest at >= 4 MB " + (c ? "ok" : "violated")};
}

// 11
Outcome magnitudes() {
  const auto norm = normalize_all(default_sweep().series, MemoryKind::SRAM);
  const double t = find_series(norm, "workload_edp", MemoryKind::STT_MRAM)->points.back().value;
  const double o = find_series(norm, "workload_edp", MemoryKind::SOT_MRAM)->points.back().value;
  return {t <= kEdp32Max && o <= kEdp32Max && o <= t,
          "32 MB EDP vs SRAM: STT " + fmt("%.4f", t) + " (1/" + fmt("%.0f", 1 / t) + "), SOT " + fmt("%.4f", o) + " (1/" +
              fmt("%.0f", 1 / o) + "), limit 1/20, SOT <= STT"};
}

// 12
Outcome determinism() {
  const auto a = scratch("run_a"), b = scratch("run_b");
  const std::string cfg = testing_paths::data("pipeline.cfg");
  const int ra = run_cli("all --config " + cfg + " --output " + a.string());
  const int rb = run_cli("all --config " + cfg + " --output " + b.string());
  if (ra != 0 || rb != 0) return {false, "pipeline exited " + std::to_string(ra) + "/" + std::to_string(rb)};
  const auto ta = read_tree(a), tb = read_tree(b);
  fs::remove_all(a);
  fs::remove_all(b);
  return {!ta.empty() && ta == tb, std::to_string(ta.size()) + " files, trees " + (ta == tb ? "identical" : "differ")};
}

// 13
Outcome properties() {
  std::mt19937_64 rng(13);
  int failures = 0;
  const auto& tech = shipped().tech;
  const auto& cells = shipped().cells;

  // Capacity conservation and argmin soundness.
  for (const std::uint64_t mb : {1, 3, 6, 10}) {
    for (const auto kind : kAllKinds) {
      const DesignSpace space(cells.at(kind), mb * kMiB, tech);
      for (const auto& o : space.organizations()) failures += o.capacity_bytes() != mb * kMiB;
      for (const auto target : kAllOptTargets)
        for (const auto acc : kAllAccessTypes) {
          const auto best = optimize(space, target, acc);
          for (const auto& d : space.designs(acc)) failures += metric(d, target) < metric(best, target);
        }
      const auto t = tune(kind, mb * kMiB, tech, cells);
      for (const auto& c : t.candidates) failures += c.edap < t.edap;
    }
  }

  // Breakdown conservation and linearity in transaction counts.
  const auto sot = tune(MemoryKind::SOT_MRAM, 3 * kMiB, tech, cells);
  for (int i = 0; i < 500; ++i) {
    WorkloadProfile p;
    p.l2_read_tx = rng() % 1000000;
    p.l2_write_tx = 1 + rng() % 1000000;
    p.dram_read_tx = rng() % 10000;
    p.dram_write_tx = rng() % 10000;
    if (rng() % 2) p.exec_time_ms = 1.0 + static_cast<double>(rng() % 100);
    AnalysisOptions opt;
    opt.include_dram = rng() % 2;
    const auto w = workload_cost(p, sot, tech, opt);
    const auto& b = w.breakdown;
    failures += std::abs(b.total - (b.dynamic_read + b.dynamic_write + b.leakage + b.dram)) > 1e-9 * b.total;
    WorkloadProfile q = p;
    const std::uint64_t k = 2 + rng() % 5;
    q.l2_read_tx *= k;
    q.l2_write_tx *= k;
    const auto e1 = dynamic_energy(p, sot), ek = dynamic_energy(q, sot);
    failures += std::abs(ek.read - static_cast<double>(k) * e1.read) > 1e-9 * (1.0 + ek.read);
    failures += std::abs(ek.write - static_cast<double>(k) * e1.write) > 1e-9 * (1.0 + ek.write);
  }

  // Normalization transitivity.
  const auto& all = default_sweep().series;
  for (const auto m : kSweepMetrics) {
    const auto* a = find_series(all, m, MemoryKind::SOT_MRAM);
    const auto* b = find_series(all, m, MemoryKind::STT_MRAM);
    const auto* c = find_series(all, m, MemoryKind::SRAM);
    const auto ac = normalized_series(*a, *c), ab = normalized_series(*a, *b), bc = normalized_series(*b, *c);
    for (std::size_t i = 0; i < ac.points.size(); ++i) {
      if (is_workload_metric(m)) continue;  // per-profile means do not compose
      failures += std::abs(ac.points[i].value - ab.points[i].value * bc.points[i].value) > 1e-12 * ac.points[i].value;
    }
  }
  return {failures == 0, std::to_string(failures) + " property violations"};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "builtin MRAM bitcell values", 1, table1},
      {2, "calibration reproduces the anchor table", 30, calibration},
      {3, "iso-area capacities", 30, isoarea},
      {4, "area ratios at 3 MB", 5, area_ratios},
      {5, "leakage ratios at 3 MB", 5, leakage_ratios},
      {6, "cache simulator matches the LRU oracle", 60, oracle},
      {7, "fully-associative LRU inclusion", 30, inclusion},
      {8, "DRAM reduction band on the golden trace", 60, reduction},
      {9, "iso-area EDP inversion with DRAM", 60, inversion},
      {10, "scalability crossovers", 60, crossovers},
      {11, "scalability EDP magnitudes at 32 MB", 120, magnitudes},
      {12, "pipeline determinism", 300, determinism},
      {13, "invariant suites", 120, properties},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = s < c.limit_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("%s %2d  %s: %s [%.2f s, limit %.0f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                o.detail.c_str(), s, c.limit_s, in_time ? "" : ", over time");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
