#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "colltime/runner/config.hpp"
#include "colltime/runner/manifest.hpp"

namespace colltime::runner {

/// One configured check. value and threshold are the numbers compared
/// (threshold is NaN for pure monotonicity checks).
struct Assertion {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;

  nlohmann::ordered_json to_json() const;
};

/// One line of a run's summary table. theorem is one of "A", "B", "1.1",
/// "DPRE" for rows that `report` merges, or "check" for oracle/identity runs.
/// NaN fields are written as empty cells.
struct SummaryRow {
  std::string theorem;
  std::int64_t N = 0;
  std::string quantity;
  double statistic = 0.0;
  double target = 0.0;
  double gap = 0.0;
  double se = 0.0;

  friend bool operator==(const SummaryRow&, const SummaryRow&) = default;
};

std::string summary_csv(const std::vector<SummaryRow>& rows);
std::vector<SummaryRow> parse_summary_csv(const std::string& text);

struct ExperimentOutput {
  std::vector<DataFile> files;
  std::vector<SummaryRow> summary;
  std::vector<Assertion> assertions;
  std::vector<std::string> log;

  bool passed() const;
};

struct RunOptions {
  unsigned workers = 1;
  bool strict_truncation = false;
};

/// Computes everything in memory; nothing touches the filesystem.
ExperimentOutput run_experiment(const ExperimentConfig& config, const RunOptions& options);

struct RunResult {
  RunManifest manifest;
  std::filesystem::path directory;
  ExperimentOutput output;
  bool passed() const { return manifest.status == "pass"; }
};

/// --out, then $COLLTIME_OUT_DIR, then the config's `out`, then
/// runs/<kind>-seed<seed>.
std::filesystem::path resolve_output_dir(const ExperimentConfig& config, const std::optional<std::string>& flag);

/// Validates (ConfigError, nothing written), runs, then writes the data files,
/// summary.csv, assertions.json, failures.json when an assertion fails,
/// run.log and manifest.json into `directory`.
RunResult run(const ExperimentConfig& config, const RunOptions& options, const std::filesystem::path& directory);

}  // namespace colltime::runner
