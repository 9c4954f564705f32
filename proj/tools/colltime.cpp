#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bench.hpp"
#include "colltime/parallel.hpp"
#include "colltime/runner/config.hpp"
#include "colltime/runner/experiments.hpp"
#include "colltime/runner/manifest.hpp"
#include "colltime/runner/report.hpp"
#include "colltime/runner/verify.hpp"

namespace {

using namespace colltime::runner;

// Machine-readable failure report on stderr.
int fail(const std::string& kind, const std::string& invariant, const std::string& message, int code) {
  nlohmann::ordered_json j;
  j["status"] = "error";
  j["error"] = kind;
  j["invariant"] = invariant;
  j["message"] = message;
  std::cerr << j.dump() << '\n';
  return code;
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed, unsigned workers,
            const std::optional<std::string>& out, bool strict) {
  try {
    auto cfg = load_config(config_path);
    if (seed) cfg.seed = *seed;
    validate(cfg);
    const auto dir = resolve_output_dir(cfg, out);
    const auto res = run(cfg, {workers, strict}, dir);
    for (const auto& a : res.output.assertions) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.6g <= %.6g", a.value, a.threshold);
      std::cout << (a.passed ? "PASS " : "FAIL ") << a.name << "  " << (std::isnan(a.threshold) ? a.detail : buf)
                << '\n';
    }
    std::cout << "wrote " << res.manifest.files.size() << " files to " << dir.string() << " (" << res.manifest.status
              << ")\n";
    return res.passed() ? 0 : 1;
  } catch (const ConfigError& e) {
    return fail("config", e.invariant(), e.what(), 2);
  } catch (const std::exception& e) {
    return fail("runtime", "", e.what(), 3);
  }
}

int cmd_report(const std::vector<std::string>& paths, const std::optional<std::string>& out) {
  try {
    std::vector<std::filesystem::path> ps(paths.begin(), paths.end());
    const auto res = report(ps, out.value_or("report"));
    for (const auto& f : res.files) std::cout << f.string() << '\n';
    return 0;
  } catch (const IntegrityError& e) {
    return fail("integrity", "file_hash", e.what(), 4);
  } catch (const ReportError& e) {
    return fail("report", "consistent_runs", e.what(), 5);
  } catch (const std::exception& e) {
    return fail("runtime", "", e.what(), 3);
  }
}

int cmd_verify(unsigned workers, bool json) {
  const auto results = run_invariant_suite(workers);
  bool ok = true;
  for (const auto& r : results) {
    ok = ok && r.passed;
    if (!json) std::printf("%s %-32s value=%-10.3g tol=%-8.3g %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                           r.value, r.threshold, r.detail.c_str());
  }
  if (json) std::cout << to_json(results).dump(2) << '\n';
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collision local times of planar random walks: exact transforms, Monte Carlo and checks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tool_version());

  unsigned workers = colltime::default_workers();
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  bool strict = false;
  std::string config;

  auto* run_cmd = app.add_subcommand("run", "run one configured experiment");
  run_cmd->add_option("--config", config, "INI experiment file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--seed", seed, "override the config seed");
  run_cmd->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  run_cmd->add_option("--out", out, "run directory (overrides COLLTIME_OUT_DIR and the config)");
  run_cmd->add_flag("--strict-truncation", strict, "fail when a lattice box loses more mass than the cap");

  std::vector<std::string> manifests;
  auto* report_cmd = app.add_subcommand("report", "merge runs into per-theorem trend tables");
  report_cmd->add_option("manifests", manifests, "manifest.json files or run directories")->required();
  report_cmd->add_option("--out", out, "report directory (default ./report)");

  bool json = false;
  auto* verify_cmd = app.add_subcommand("verify", "run the invariant suite");
  verify_cmd->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  verify_cmd->add_flag("--json", json, "print results as JSON");

  std::int64_t scale = 128;
  auto* bench_cmd = app.add_subcommand("bench", "kernel and DP throughput");
  bench_cmd->add_option("--N", scale, "horizon for the lattice kernels")->check(CLI::Range(8, 4096));
  bench_cmd->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  if (*run_cmd) return cmd_run(config, seed, workers, out, strict);
  if (*report_cmd) return cmd_report(manifests, out);
  if (*verify_cmd) return cmd_verify(workers, json);
  if (*bench_cmd) return colltime::tools::run_bench(std::cout, scale, workers);
  return 0;
}
