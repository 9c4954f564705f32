#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace colltime::runner {

class ReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ReportResult {
  std::vector<std::filesystem::path> files;
  std::size_t runs = 0;
};

/// Merges runs into one trend table per theorem (theorem_A.csv, theorem_B.csv,
/// theorem_1_1.csv, dpre.csv), one row per N with columns
/// N,statistic,target,gap,SE; the 1.1 table adds factorization_gap, filled
/// from a pair-baseline run at the same N when one is merged. Every summary
/// row also lands in summary_long.csv.
///
/// Each argument is a manifest.json or a run directory holding one. Hashes are
/// checked first (IntegrityError). Runs feeding one table must agree on h and
/// on the betas, and an N may appear only once per table (ReportError).
ReportResult report(const std::vector<std::filesystem::path>& manifests, const std::filesystem::path& out_dir);

}  // namespace colltime::runner
