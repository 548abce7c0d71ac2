#include <gtest/gtest.h>

#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "support/paths.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

RunResult run(const std::string& args) {
  const fs::path err_file = fs::temp_directory_path() / ("nvmdse_cli_err_" + std::to_string(::getpid()));
  const std::string cmd = testing_paths::cli() + " " + args + " 2>" + err_file.string();
  RunResult r;
  FILE* p = ::popen(cmd.c_str(), "r");
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(err_file);
  std::stringstream ss;
  ss << in.rdbuf();
  r.err = ss.str();
  fs::remove(err_file);
  return r;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("nvmdse_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override {
    fs::permissions(dir_, fs::perms::owner_all, fs::perm_options::add);
    fs::remove_all(dir_);
  }
  fs::path write_config(const std::string& body) {
    const auto p = dir_ / "run.cfg";
    std::ofstream(p) << body;
    return p;
  }
  fs::path dir_;
};

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

std::string shipped() { return testing_paths::data("pipeline.cfg"); }

}  // namespace

TEST_F(Cli, TuneThreeKindsAtThreeMegabytes) {
  const auto cfg = write_config("capacities_mb = 3\n");
  const auto r = run("tune --config " + cfg.string() + " --output " + (dir_ / "out").string());
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(dir_ / "out" / "tuned.csv");
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 4);
}

TEST_F(Cli, UnknownSubcommandIsAUsageError) { EXPECT_EQ(run("frobnicate").code, 2); }

TEST_F(Cli, MissingSubcommandIsAUsageError) { EXPECT_EQ(run("").code, 2); }

TEST_F(Cli, EmptyGridIsAUsageError) {
  const auto cfg = write_config("capacities_mb =\n");
  EXPECT_EQ(run("sweep --config " + cfg.string() + " --output " + (dir_ / "out").string()).code, 2);
  EXPECT_FALSE(fs::exists(dir_ / "out"));
}

TEST_F(Cli, MissingAnchorsFileNamesFileNotFound) {
  const auto cfg = write_config("anchors = nowhere.csv\n");
  const auto r = run("calibrate --config " + cfg.string());
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("FileNotFound"), std::string::npos) << r.err;
}

TEST_F(Cli, MissingConfigFileNamesFileNotFound) {
  const auto r = run("tune --config " + (dir_ / "absent.cfg").string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("FileNotFound"), std::string::npos);
}

TEST_F(Cli, DryRunWritesNothing) {
  const auto r = run("all --dry-run --config " + shipped() + " --output " + (dir_ / "out").string());
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_FALSE(fs::exists(dir_ / "out"));
}

TEST_F(Cli, ReadOnlyOutputIsARuntimeError) {
  if (::geteuid() == 0) GTEST_SKIP() << "root ignores directory permissions";
  const auto out = dir_ / "ro";
  fs::create_directories(out);
  fs::permissions(out, fs::perms::owner_read | fs::perms::owner_exec);
  const auto cfg = write_config("capacities_mb = 1\n");
  const auto r = run("tune --config " + cfg.string() + " --output " + out.string());
  EXPECT_EQ(r.code, 1);
}

TEST_F(Cli, UnwritableOutputPathIsARuntimeError) {
  const auto blocker = dir_ / "file";
  std::ofstream(blocker) << "x";
  const auto cfg = write_config("capacities_mb = 1\n");
  const auto r = run("tune --config " + cfg.string() + " --output " + (blocker / "sub").string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("IoError"), std::string::npos) << r.err;
}

TEST_F(Cli, GenTraceSeedChangesTheDigest) {
  const auto spec = dir_ / "spec.cfg";
  std::ofstream(spec) << "accesses = 1000\nseed = 1\n";
  const auto a = run("gen-trace --spec " + spec.string() + " --output " + (dir_ / "a").string());
  const auto b = run("gen-trace --spec " + spec.string() + " --seed 2 --output " + (dir_ / "b").string());
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_TRUE(fs::exists(dir_ / "a" / "trace.nvmt"));
  EXPECT_NE(a.out, b.out);
}

TEST_F(Cli, GenProfileWritesCsv) {
  const auto r = run("gen-profile --output " + (dir_ / "p").string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir_ / "p" / "profiles.csv"));
}

TEST_F(Cli, FullPipelineIsDeterministicAndFast) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto a = run("all --config " + shipped() + " --output " + (dir_ / "a").string());
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_LT(seconds, 60.0);
  const auto b = run("all --config " + shipped() + " --output " + (dir_ / "b").string());
  ASSERT_EQ(b.code, 0) << b.err;
  const auto ta = read_tree(dir_ / "a"), tb = read_tree(dir_ / "b");
  EXPECT_GE(ta.size(), 20u);
  EXPECT_EQ(ta, tb);
  for (const auto& [name, body] : ta) {
    EXPECT_EQ(body.find('\r'), std::string::npos) << name;
    EXPECT_EQ(name.find(".tmp"), std::string::npos) << name;
  }
}
