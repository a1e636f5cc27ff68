#pragma once

// Acceptance criteria A1-A8 with pinned seeds.

#include <iosfwd>
#include <string>
#include <vector>

namespace modwalk::cli {

enum class Suite { Quick, Full };

struct VerifyOptions {
  Suite suite = Suite::Quick;
  int workers = 1;
  /// Fault injection: flip the sign of the drift of every simulated model.
  bool inject_drift_sign_error = false;
  /// Restrict to these criterion ids; empty runs all.
  std::vector<std::string> only;
  /// Progress and detail lines; may be null.
  std::ostream* log = nullptr;
};

struct CriterionResult {
  std::string id;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

std::vector<CriterionResult> run_verify(const VerifyOptions& options);

/// One line per criterion: "A1 PASS  12.3s  detail".
void print_results(const std::vector<CriterionResult>& results, std::ostream& out);

/// 0 when every criterion passed, 1 otherwise.
int verify_exit_code(const std::vector<CriterionResult>& results);

}  // namespace modwalk::cli
