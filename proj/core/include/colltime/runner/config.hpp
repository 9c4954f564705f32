#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "colltime/replica.hpp"

namespace colltime::runner {

enum class ExperimentKind {
  rn_asymptotics,
  erdos_taylor,
  gamma_total,
  laplace,
  pair_baseline,
  dpre,
  oracle_chain,
  replica_identity,
  renewal,
  crude_bounds,
  rewired,
};

std::string_view to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_kind(std::string_view text);
std::vector<ExperimentKind> all_kinds();

/// Box half-width per horizon: "sqrt:c" gives ceil(c sqrt N), "fixed:r" gives r,
/// "tail" picks the smallest box whose exit bound is below the truncation cap.
struct RadiusPolicy {
  enum class Mode { sqrt_scaled, fixed, tail };
  Mode mode = Mode::sqrt_scaled;
  double value = 8.0;

  std::int64_t radius_for(std::int64_t N, double cap = 1e-9) const;
  std::string to_string() const;
  static RadiusPolicy parse(std::string_view text);

  friend bool operator==(const RadiusPolicy&, const RadiusPolicy&) = default;
};

/// Validation failure; `invariant` names the violated rule for the failure report.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string invariant, const std::string& what)
      : std::runtime_error(what), invariant_(std::move(invariant)) {}
  const std::string& invariant() const noexcept { return invariant_; }

 private:
  std::string invariant_;
};

// INI layout:
//
//   [experiment]  kind, N (comma list), h, replicates, seed, radius, r_max,
//                 write_samples, out
//   [betas]       pairs = b12, b13, ... (lexicographic) or all = b;
//                 walks = b1, ..., bh (polymer runs); grid = sweep values
//   [tolerance]   free keys, numeric
struct ExperimentConfig {
  std::optional<ExperimentKind> kind;
  std::vector<std::int64_t> N;
  int h = 2;
  std::vector<double> pair_betas;
  std::vector<double> walk_betas;
  std::vector<double> beta_grid;
  std::int64_t replicates = 1;
  std::uint64_t seed = 0;
  RadiusPolicy radius{};
  int r_max = 0;
  bool write_samples = false;
  std::map<std::string, double> tolerance;
  std::string output_dir;

  BetaMatrix beta_matrix() const;
  double tol(const std::string& key, double fallback) const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_string(const std::string& text);
ExperimentConfig load_config(const std::string& path);
/// Canonical INI text; parse_config_string(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

/// Throws ConfigError on the first violated rule.
void validate(const ExperimentConfig& config);

}  // namespace colltime::runner
