#include "xcrate/error.hpp"

namespace xcrate {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::malformed_doc: return "MalformedDoc";
    case ErrorCode::cyclic_dependency: return "CyclicDependency";
    case ErrorCode::missing_dependency_doc: return "MissingDependencyDoc";
    case ErrorCode::unresolved_reexport: return "UnresolvedReexport";
    case ErrorCode::unknown_ranker: return "UnknownRanker";
    case ErrorCode::ranker_failure: return "RankerFailure";
    case ErrorCode::no_candidate: return "NoCandidate";
    case ErrorCode::malformed_override: return "MalformedOverride";
    case ErrorCode::replay_miss: return "ReplayMiss";
    case ErrorCode::provider_error: return "ProviderError";
    case ErrorCode::unbound_dependency: return "UnboundDependency";
    case ErrorCode::schema_rejected: return "SchemaRejected";
    case ErrorCode::compiler_unavailable: return "CompilerUnavailable";
    case ErrorCode::schema_compile_error: return "SchemaCompileError";
    case ErrorCode::generation_failed: return "GenerationFailed";
    case ErrorCode::harness_error: return "HarnessError";
    case ErrorCode::budget_exhausted: return "BudgetExhausted";
    case ErrorCode::signature_mismatch: return "SignatureMismatch";
    case ErrorCode::missing_kb: return "MissingKb";
    case ErrorCode::malformed_input: return "MalformedInput";
  }
  return "Unknown";
}

}  // namespace xcrate
