#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace xcrate {

enum class ErrorCode {
  malformed_doc,
  cyclic_dependency,
  missing_dependency_doc,
  unresolved_reexport,
  unknown_ranker,
  ranker_failure,
  no_candidate,
  malformed_override,
  replay_miss,
  provider_error,
  unbound_dependency,
  schema_rejected,
  compiler_unavailable,
  schema_compile_error,
  generation_failed,
  harness_error,
  budget_exhausted,
  signature_mismatch,
  missing_kb,
  malformed_input,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// One exception type per error kind so callers can catch precisely.
template <ErrorCode C>
class CodedError : public Error {
 public:
  explicit CodedError(const std::string &message) : Error(C, message) {}
};

using MalformedDoc = CodedError<ErrorCode::malformed_doc>;
using CyclicDependency = CodedError<ErrorCode::cyclic_dependency>;
using MissingDependencyDoc = CodedError<ErrorCode::missing_dependency_doc>;
using UnresolvedReexport = CodedError<ErrorCode::unresolved_reexport>;
using UnknownRanker = CodedError<ErrorCode::unknown_ranker>;
using RankerFailure = CodedError<ErrorCode::ranker_failure>;
using NoCandidate = CodedError<ErrorCode::no_candidate>;
using MalformedOverride = CodedError<ErrorCode::malformed_override>;
using ReplayMiss = CodedError<ErrorCode::replay_miss>;
using ProviderError = CodedError<ErrorCode::provider_error>;
using UnboundDependency = CodedError<ErrorCode::unbound_dependency>;
using SchemaRejected = CodedError<ErrorCode::schema_rejected>;
using CompilerUnavailable = CodedError<ErrorCode::compiler_unavailable>;
using SchemaCompileError = CodedError<ErrorCode::schema_compile_error>;
using GenerationFailed = CodedError<ErrorCode::generation_failed>;
using HarnessError = CodedError<ErrorCode::harness_error>;
using BudgetExhausted = CodedError<ErrorCode::budget_exhausted>;
using SignatureMismatch = CodedError<ErrorCode::signature_mismatch>;
using MissingKb = CodedError<ErrorCode::missing_kb>;
using MalformedInput = CodedError<ErrorCode::malformed_input>;

}  // namespace xcrate
