#pragma once

#include <string>
#include <vector>

namespace qtm {

struct CheckResult {
  std::string name;
  double measured = 0.0;   // deviation or fitted value, as named
  double tolerance = 0.0;  // pass iff measured <= tolerance
  bool passed = false;
  std::string detail;
};

enum class ValidationScope { Quick, Full };

/// Invariant suites of every module, usable as a standalone health check.
/// `tolerance_scale` multiplies every tolerance (a self-test hook: a scale of
/// zero must fail).
std::vector<CheckResult> run_validation(ValidationScope scope, double tolerance_scale = 1.0);

}  // namespace qtm
