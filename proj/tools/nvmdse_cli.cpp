// nvmdse: command-line front end for the cache design-space pipeline.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <unistd.h>

#include "nvmdse/pipeline.hpp"

namespace fs = std::filesystem;
using namespace nvmdse;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GlobalFlags {
  std::string config;
  std::string output;
  std::int64_t seed = -1;
  bool keep_going = false;
  bool dry_run = false;
};

void write_atomic(const fs::path& dir, const std::string& name, const std::string& content) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const fs::path target = dir / name;
  const fs::path tmp = dir / ("." + name + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) {
      fs::remove(tmp, ec);
      throw IoError("short write to " + tmp.string());
    }
  }
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename into " + target.string());
  }
}

void emit(const RunConfig& c, const StageResult& r, bool keep_going) {
  for (const auto& [name, content] : r.files) write_atomic(c.output, name, content);
  for (const auto& m : r.messages) std::cout << m << "\n";
  for (const auto& f : r.failures) std::cerr << "error: " << f << "\n";
  if (!r.failures.empty() && !keep_going) throw Error("ItemFailures", std::to_string(r.failures.size()) + " item(s) failed");
}

RunConfig make_config(const GlobalFlags& g) {
  RunConfig c;
  try {
    if (!g.config.empty()) {
      if (!fs::exists(g.config)) throw FileNotFound(g.config);
      c = load_run_config(g.config);
    } else {
      c.base_dir = fs::current_path();
    }
    if (!g.output.empty()) c.output = g.output;
    if (g.seed >= 0) c.seed = static_cast<std::uint64_t>(g.seed);
    validate(c);
  } catch (const FieldError& e) {
    throw UsageError(e.what());
  }
  return c;
}

TraceGenSpec trace_spec(const RunConfig& c, const std::string& spec_path) {
  TraceGenSpec spec;
  if (!spec_path.empty()) {
    spec = TraceGenSpec::from_document(KvDocument::load(spec_path));
  } else if (c.trace && c.trace->extension() == ".cfg") {
    spec = TraceGenSpec::from_document(KvDocument::load(c.trace->string()));
  }
  if (c.seed) spec.seed = *c.seed;
  spec.validate();
  return spec;
}

void dry_run_report(const RunConfig& c, const std::string& stage) {
  (void)load_inputs(c);
  std::cout << "config ok: stage " << stage << ", " << c.kinds.size() << " kind(s), " << c.capacities.size()
            << " capacities, output " << c.output.string() << " (dry run, nothing written)\n";
}

int run(const std::string& stage, const GlobalFlags& g, const std::string& spec_path, const std::string& format) {
  const RunConfig c = make_config(g);
  if (g.dry_run) {
    dry_run_report(c, stage);
    return kExitOk;
  }
  if (stage == "gen-trace") {
    const auto trace = generate_trace(trace_spec(c, spec_path));
    const bool text = format == "text";
    write_atomic(c.output, text ? "trace.txt" : "trace.nvmt", text ? trace_to_text(trace) : trace_to_binary(trace));
    char digest[17];
    std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(trace_digest(trace)));
    std::cout << trace.records.size() << " records, digest " << digest << "\n";
    return kExitOk;
  }
  if (stage == "gen-profile") {
    const auto profiles = synthetic_batch_profiles(c);
    write_atomic(c.output, "profiles.csv", profiles_to_csv(profiles));
    std::cout << profiles.size() << " profiles\n";
    return kExitOk;
  }

  PipelineInputs in = load_inputs(c);
  const bool all = stage == "all";
  if (stage == "calibrate" || (all && c.anchors)) emit(c, run_calibrate(c, in), g.keep_going);
  if (stage == "tune" || all) emit(c, run_tune(c, in, g.keep_going), g.keep_going);
  if (stage == "isocap" || all) emit(c, run_isocap(c, in), g.keep_going);
  if (stage == "isoarea" || (all && c.trace)) emit(c, run_isoarea(c, in, g.keep_going), g.keep_going);
  if (stage == "sweep" || all) emit(c, run_sweep(c, in, g.keep_going), g.keep_going);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cache design-space exploration for SRAM, STT-MRAM and SOT-MRAM last-level caches"};
  app.require_subcommand(1);
  GlobalFlags g;
  app.add_option("--config", g.config, "Run configuration file");
  app.add_option("--output", g.output, "Output directory (overrides the config)");
  app.add_option("--seed", g.seed, "Seed override for synthetic generators")->check(CLI::NonNegativeNumber);
  app.add_flag("--keep-going", g.keep_going, "Report per-item errors without failing the run");
  app.add_flag("--dry-run", g.dry_run, "Validate the configuration and write nothing");

  std::string spec_path;
  std::string format = "binary";
  const std::vector<std::pair<const char*, const char*>> stages = {
      {"calibrate", "Fit model coefficients to the anchor table"},
      {"tune", "Tune every (kind, capacity) on the grid"},
      {"isocap", "Iso-capacity workload comparison"},
      {"isoarea", "Iso-area capacities, DRAM reduction and workload comparison"},
      {"sweep", "Capacity scalability sweep and crossovers"},
      {"gen-trace", "Write a synthetic memory trace"},
      {"gen-profile", "Write the synthetic workload profile suite"},
      {"all", "Run calibrate, tune, isocap, isoarea and sweep in sequence"}};
  for (const auto& [name, help] : stages) {
    auto* sub = app.add_subcommand(name, help);
    sub->fallthrough();
    if (std::string(name) == "gen-trace") {
      sub->add_option("--spec", spec_path, "Trace generator spec (defaults to the config's trace spec)");
      sub->add_option("--format", format, "text or binary")->check(CLI::IsMember({"text", "binary"}));
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    return run(app.get_subcommands().front()->get_name(), g, spec_path, format);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
