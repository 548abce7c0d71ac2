#include <gtest/gtest.h>

#include <random>

#include "nvmdse/isoarea.hpp"

using namespace nvmdse;

namespace {

const TechConfig kTech{};

double sram_budget() { return tune(MemoryKind::SRAM, 3 * kMiB, kTech).ppa.area; }

MemoryTrace random_trace(std::uint64_t seed, std::size_t n, std::uint64_t lines) {
  std::mt19937_64 rng(seed);
  MemoryTrace t;
  for (std::size_t i = 0; i < n; ++i) t.records.push_back({(rng() % lines) * 128, rng() % 5 == 0 ? MemOp::Write : MemOp::Read});
  return t;
}

}  // namespace

TEST(IsoArea, MramCapacitiesUnderTheSramBudget) {
  const double budget = sram_budget();
  EXPECT_EQ(iso_area_capacity(MemoryKind::STT_MRAM, budget, kTech).capacity, 7 * kMiB);
  EXPECT_EQ(iso_area_capacity(MemoryKind::SOT_MRAM, budget, kTech).capacity, 10 * kMiB);
}

TEST(IsoArea, ResultFitsAndTheNextStepDoesNot) {
  const double budget = sram_budget();
  for (const auto kind : {MemoryKind::STT_MRAM, MemoryKind::SOT_MRAM}) {
    const auto r = iso_area_capacity(kind, budget, kTech);
    EXPECT_DOUBLE_EQ(r.budget, budget * 1.025);
    EXPECT_LE(r.tuned.ppa.area, r.budget);
    EXPECT_GT(tune(kind, r.capacity + kMiB, kTech).ppa.area, r.budget);
  }
}

TEST(IsoArea, SramAgainstItsOwnBudget) {
  EXPECT_EQ(iso_area_capacity(MemoryKind::SRAM, sram_budget(), kTech, {}, {kMiB, 0.0}).capacity, 3 * kMiB);
}

TEST(IsoArea, TinyBudgetHasNoFeasibleCapacity) {
  EXPECT_THROW(iso_area_capacity(MemoryKind::SOT_MRAM, 0.01, kTech), NoFeasibleCapacity);
  EXPECT_THROW(iso_area_capacity(MemoryKind::SOT_MRAM, 0.0, kTech), NonPositiveValue);
  EXPECT_THROW(iso_area_capacity(MemoryKind::SOT_MRAM, 1.0, kTech, {}, {kMiB, -0.1}), InvalidValue);
}

TEST(IsoArea, LargerBudgetNeverShrinksCapacity) {
  std::uint64_t prev = 0;
  for (const double b : {2.0, 4.0, 6.0, 9.0}) {
    const auto c = iso_area_capacity(MemoryKind::STT_MRAM, b, kTech).capacity;
    EXPECT_GE(c, prev);
    prev = c;
  }
}

TEST(SimulatedDram, MissesScaleOntoTheProfile) {
  WorkloadProfile p;
  p.l2_read_tx = 800;
  p.l2_write_tx = 200;
  CacheStats s;
  s.accesses = 100;
  s.misses = 10;
  s.dirty_evictions = 3;
  const auto q = with_simulated_dram(p, s);
  EXPECT_EQ(q.dram_read_tx, 100u);
  EXPECT_EQ(q.dram_write_tx, 30u);
  EXPECT_THROW(with_simulated_dram(p, CacheStats{}), EmptyTrace);
}

TEST(SimulatedDram, FewerBigCacheMissesLowerTheDramAwareRatio) {
  const auto base = tune(MemoryKind::SRAM, 3 * kMiB, kTech);
  const auto big = tune(MemoryKind::SOT_MRAM, 10 * kMiB, kTech);
  const CacheStats s3{1000, 800, 200, 40, 240};
  AnalysisOptions opt;
  opt.include_dram = true;
  double prev = 1e300;
  for (const std::uint64_t misses : {200u, 160u, 120u, 80u}) {
    const CacheStats s10{1000, 1000 - misses, misses, misses / 5, misses + misses / 5};
    const auto e = isoarea_report(synth_suite().front(), s3, s10, base, big, kTech, opt);
    EXPECT_LT(e.ratios.edp_with_dram, prev);
    prev = e.ratios.edp_with_dram;
  }
}

TEST(Reduction, SeriesMatchesDirectSimulation) {
  const auto t = random_trace(4, 20000, 4000);
  const auto base = CacheConfig::set_associative(128 * 1024);
  const std::vector<std::uint64_t> caps = {256 * 1024, 384 * 1024, 512 * 1024};
  const auto pts = reduction_series(t, base, caps);
  ASSERT_EQ(pts.size(), 3u);
  for (std::size_t i = 0; i < caps.size(); ++i) {
    EXPECT_EQ(pts[i].capacity, caps[i]);
    EXPECT_DOUBLE_EQ(pts[i].reduction, dram_reduction(t, base, CacheConfig::set_associative(caps[i])));
  }
  const auto csv = reduction_csv(pts);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

TEST(Reduction, InvertingBaseAndTargetFlipsTheSign) {
  const auto t = random_trace(8, 20000, 4000);
  const auto small = simulate_cache(t, CacheConfig::set_associative(128 * 1024));
  const auto big = simulate_cache(t, CacheConfig::set_associative(256 * 1024));
  EXPECT_GT(dram_reduction(small, big), 0.0);
  EXPECT_LT(dram_reduction(big, small), 0.0);
}
