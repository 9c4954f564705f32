#pragma once

#include <stdexcept>
#include <string>

namespace colltime {

/// Strict-mode rejection: the lattice box loses more mass than the configured cap.
class TruncationError : public std::runtime_error {
 public:
  TruncationError(const std::string& what, double deficit, double cap)
      : std::runtime_error(what), deficit_(deficit), cap_(cap) {}
  double deficit() const noexcept { return deficit_; }
  double cap() const noexcept { return cap_; }

 private:
  double deficit_;
  double cap_;
};

/// An exact evaluation was asked for an instance beyond its enumeration budget.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TruncationPolicy {
  bool strict = false;
  double cap = 1e-9;
};

}  // namespace colltime
