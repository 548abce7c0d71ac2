#include <gtest/gtest.h>

#include "nvmdse/techlib.hpp"
#include "support/paths.hpp"

using namespace nvmdse;

TEST(Bitcell, SttMatchesDeviceTable) {
  const auto b = builtin_bitcell(MemoryKind::STT_MRAM);
  EXPECT_EQ(b.sense_latency, 650.0);
  EXPECT_EQ(b.sense_energy, 0.076);
  EXPECT_EQ(b.write_latency_set, 8400.0);
  EXPECT_EQ(b.write_latency_reset, 7780.0);
  EXPECT_EQ(b.write_energy_set, 1.1);
  EXPECT_EQ(b.write_energy_reset, 2.2);
  EXPECT_EQ(b.fin_count_read, 4);
  EXPECT_EQ(b.fin_count_write, 4);
  EXPECT_EQ(b.area_norm, 0.34);
}

TEST(Bitcell, SotMatchesDeviceTable) {
  const auto b = builtin_bitcell(MemoryKind::SOT_MRAM);
  EXPECT_EQ(b.sense_latency, 650.0);
  EXPECT_EQ(b.sense_energy, 0.020);
  EXPECT_EQ(b.write_latency_set, 313.0);
  EXPECT_EQ(b.write_latency_reset, 243.0);
  EXPECT_EQ(b.write_energy_set, 0.08);
  EXPECT_EQ(b.write_energy_reset, 0.08);
  EXPECT_EQ(b.fin_count_read, 1);
  EXPECT_EQ(b.fin_count_write, 3);
  EXPECT_EQ(b.area_norm, 0.29);
}

TEST(Bitcell, SramIsTheNormalizationAndSymmetric) {
  const auto b = builtin_bitcell(MemoryKind::SRAM);
  EXPECT_EQ(b.area_norm, 1.0);
  EXPECT_EQ(b.write_latency_set, b.write_latency_reset);
  EXPECT_EQ(b.write_energy_set, b.write_energy_reset);
  EXPECT_NO_THROW(validate(b));
}

TEST(Bitcell, DocumentRoundTripsToBuiltin) {
  for (const auto k : kAllKinds) {
    const auto b = builtin_bitcell(k);
    EXPECT_EQ(load_bitcell(serialize(b)), b) << to_string(k);
  }
}

TEST(Bitcell, ShippedFilesEqualBuiltins) {
  EXPECT_EQ(load_bitcell_file(testing_paths::data("stt_bitcell.cfg")), builtin_bitcell(MemoryKind::STT_MRAM));
  EXPECT_EQ(load_bitcell_file(testing_paths::data("sot_bitcell.cfg")), builtin_bitcell(MemoryKind::SOT_MRAM));
  EXPECT_EQ(load_bitcell_file(testing_paths::data("sram_bitcell.cfg")), builtin_bitcell(MemoryKind::SRAM));
}

namespace {

std::string stt_doc(const std::string& replace_key = "", const std::string& value = "") {
  std::string out;
  const std::pair<const char*, const char*> rows[] = {
      {"kind", "STT_MRAM"},          {"sense_latency", "650"},      {"sense_energy", "0.076"},
      {"write_latency_set", "8400"}, {"write_latency_reset", "7780"}, {"write_energy_set", "1.1"},
      {"write_energy_reset", "2.2"}, {"fin_count_read", "4"},       {"fin_count_write", "4"},
      {"area_norm", "0.34"}};
  for (const auto& [k, v] : rows) {
    if (k == replace_key) {
      if (!value.empty()) out += std::string(k) + " = " + value + "\n";
    } else {
      out += std::string(k) + " = " + v + "\n";
    }
  }
  return out;
}

}  // namespace

TEST(Bitcell, ParsedDocumentEqualsBuiltin) {
  EXPECT_EQ(load_bitcell(stt_doc()), builtin_bitcell(MemoryKind::STT_MRAM));
}

TEST(Bitcell, NegativeWriteEnergyIsRejected) {
  try {
    load_bitcell(stt_doc("write_energy_set", "-1"));
    FAIL() << "expected NonPositiveValue";
  } catch (const NonPositiveValue& e) {
    EXPECT_EQ(e.field(), "write_energy_set");
  }
}

TEST(Bitcell, MissingAreaNormIsRejected) {
  try {
    load_bitcell(stt_doc("area_norm"));
    FAIL() << "expected MissingField";
  } catch (const MissingField& e) {
    EXPECT_EQ(e.field(), "area_norm");
  }
}

TEST(Bitcell, UnknownKindIsRejected) { EXPECT_THROW(load_bitcell(stt_doc("kind", "PCM")), UnknownMemoryKind); }

TEST(Bitcell, MramLargerThanSramIsRejected) {
  EXPECT_THROW(load_bitcell(stt_doc("area_norm", "1.2")), InvalidValue);
}

TEST(Bitcell, ZeroFinsAreRejected) { EXPECT_THROW(load_bitcell(stt_doc("fin_count_write", "0")), NonPositiveValue); }

TEST(MemoryKindNames, ParseAcceptsAliases) {
  EXPECT_EQ(parse_memory_kind("stt"), MemoryKind::STT_MRAM);
  EXPECT_EQ(parse_memory_kind("SOT-MRAM"), MemoryKind::SOT_MRAM);
  EXPECT_EQ(parse_memory_kind(" sram "), MemoryKind::SRAM);
  for (const auto k : kAllKinds) EXPECT_EQ(parse_memory_kind(to_string(k)), k);
}

TEST(Tech, RoundTrip) {
  const TechConfig t;
  const auto back = load_tech(serialize(t));
  for (const auto& f : tech_fields()) EXPECT_EQ(back.*f.member, t.*f.member) << f.name;
}

TEST(Tech, ShippedFileEqualsDefaults) {
  const auto shipped = load_tech_file(testing_paths::data("tech_16nm.cfg"));
  const TechConfig t;
  for (const auto& f : tech_fields()) EXPECT_EQ(shipped.*f.member, t.*f.member) << f.name;
}

TEST(Tech, UnknownKeyIsRejected) { EXPECT_THROW(load_tech("bogus = 1\n"), InvalidValue); }

TEST(Tech, NegativeCoefficientIsRejected) {
  try {
    load_tech("bitline_delay = -0.1\n");
    FAIL() << "expected NonPositiveValue";
  } catch (const NonPositiveValue& e) {
    EXPECT_EQ(e.field(), "bitline_delay");
  }
}

TEST(Tech, ZeroClockIsRejected) { EXPECT_THROW(load_tech("clock_frequency = 0\n"), NonPositiveValue); }

TEST(Tech, MissingFileIsFileNotFound) { EXPECT_THROW(load_tech_file("/nonexistent/tech.cfg"), FileNotFound); }
