#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace colltime::runner {

/// A file as produced by an experiment, before it is written. Roles: "data"
/// (deterministic, hash-stable across reruns), "summary" (the per-run summary
/// table, also deterministic) and "log" (timings, free text).
struct DataFile {
  std::string path;  ///< relative to the run directory
  std::string role;
  std::string content;
};

struct FileRecord {
  std::string path;
  std::string role;
  std::string sha256;
  std::uint64_t bytes = 0;

  friend bool operator==(const FileRecord&, const FileRecord&) = default;
};

struct RunManifest {
  std::string tool = "colltime";
  std::string version;
  std::string kind;
  std::string config;  ///< canonical INI snapshot
  std::uint64_t seed = 0;
  int h = 0;
  std::vector<double> betas;  ///< pair order; per-walk betas for dpre runs
  unsigned workers = 1;
  bool strict_truncation = false;
  std::string started_at;  ///< UTC, ISO 8601
  std::string finished_at;
  double runtime_seconds = 0.0;
  std::string status;  ///< "pass" or "fail"
  std::vector<FileRecord> files;

  nlohmann::ordered_json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);

  const FileRecord* find_role(std::string_view role) const;
};

class IntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string tool_version();
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);
std::string utc_timestamp();

RunManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);

/// Recomputes the hash of every listed file below `run_dir`; throws
/// IntegrityError on a missing file or a hash mismatch.
void verify_files(const RunManifest& manifest, const std::filesystem::path& run_dir);

}  // namespace colltime::runner
