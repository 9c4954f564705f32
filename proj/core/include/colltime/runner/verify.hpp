#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace colltime::runner {

struct InvariantResult {
  std::string name;
  bool passed = false;
  double value = 0.0;      ///< measured discrepancy
  double threshold = 0.0;  ///< allowed discrepancy
  std::string detail;
};

/// Fast invariant checks over every compute module (seconds in total): RNG
/// known answers, kernel mass balance, the exact-oracle chain at small N, the
/// replica and renewal identities, worker-count independence of the samplers,
/// and the config round trip.
std::vector<InvariantResult> run_invariant_suite(unsigned workers);

nlohmann::ordered_json to_json(const std::vector<InvariantResult>& results);

}  // namespace colltime::runner
