#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "xcrate/validation/interop.hpp"

namespace xcrate::validation {

enum class CheckStatus { pass, fail, skipped };

std::string_view to_string(CheckStatus s);
CheckStatus check_status_from_string(std::string_view s);

struct FunctionReport {
  std::string function_id;
  bool uses_external_apis = false;
  bool compiled = false;
  CheckStatus go_roundtrip = CheckStatus::skipped;
  CheckStatus full_roundtrip = CheckStatus::skipped;
  CheckStatus io_equiv = CheckStatus::skipped;
  std::string note;  // skip or failure reason
  InteropAttempts attempts;  // summed over the input and output tuples
  int body_attempts = 0;
  std::optional<std::size_t> counterexample;
  std::vector<std::string> diagnostics;

  /// io_equiv = pass => full_roundtrip = pass => go_roundtrip = pass, and
  /// nothing passes without compiling.
  bool phase_ordered() const;
};

struct Rates {
  std::size_t n_full = 0;
  std::size_t n_dep = 0;
  std::optional<double> comp_full, comp_dep, equiv_full, equiv_dep;  // percentages
};

struct ValidationReport {
  std::vector<FunctionReport> functions;

  Rates rates() const;
  nlohmann::json to_json() const;
  static ValidationReport from_json(const nlohmann::json &j);
};

}  // namespace xcrate::validation
