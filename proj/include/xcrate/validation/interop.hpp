#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "xcrate/carrier/compile.hpp"
#include "xcrate/validation/checks.hpp"
#include "xcrate/validation/glue.hpp"
#include "xcrate/validation/toolchain.hpp"

namespace xcrate::validation {

struct Budget {
  int schema_retries = 3;
  int glue_retries = 3;
  int body_retries = 5;

  /// `"s,g,b"`. Throws MalformedInput.
  static Budget parse(std::string_view text);
  std::string str() const;
};

struct InteropAttempts {
  int schema = 0;
  int source_glue = 0;
  int target_glue = 0;

  friend bool operator==(const InteropAttempts &, const InteropAttempts &) = default;
};

struct TypeUnderTest {
  carrier::GoTypeDef go_type;
  std::string target_type;      // Rust type name
  std::string target_type_def;  // its translated definition
  ObservedValues values;
};

/// Everything establish_interop reads or extends. Validated schemas and
/// adapters are added to `registry` and `adapters`.
struct InteropEnv {
  carrier::SchemaRegistry *registry = nullptr;
  AdapterStore *adapters = nullptr;
  Toolchain *source = nullptr;
  Toolchain *target = nullptr;
  llm::LlmGateway *gateway = nullptr;
  const GlueKnowledge *knowledge = nullptr;
  carrier::CompileOptions protoc;
  std::filesystem::path work_dir;
  std::vector<carrier::GoTypeDef> go_types;  // validated source types, for nested adapters
  std::vector<std::string> target_items;     // translated items every target build needs
};

struct InteropTrace {
  InteropAttempts attempts;
  CheckResult go_roundtrip;
  CheckResult full_roundtrip;
  std::vector<std::string> log;  // one line per attempt
};

struct InteropResult {
  carrier::CarrierSchema schema;
  AdapterPair source;
  AdapterPair target;
  InteropTrace trace;
};

/// Two-phase interoperability: (1) regenerate schema and source adapters
/// together until the source round trip passes, charging schema_retries;
/// (2) regenerate only target adapters until the full round trip passes,
/// charging glue_retries. Throws BudgetExhausted; `trace`, when given,
/// reflects the attempts made either way.
InteropResult establish_interop(const TypeUnderTest &type, InteropEnv &env, const Budget &budget,
                                InteropTrace *trace = nullptr);

struct FunctionUnderTest {
  carrier::GoFunction go_function;
  std::string input_type;   // source tuple type names
  std::string output_type;
  TargetCall call;
  std::vector<std::string> target_items;  // translated function and tuple structs
};

struct HarnessPair {
  BuildResult source;
  BuildResult target;

  bool ok() const { return source.ok && target.ok; }
  FunctionHarnesses harnesses(const FunctionUnderTest &fn) const;
};

/// Builds both execute-capable harnesses. Requires validated adapters for
/// the input and output tuples.
HarnessPair build_function_harnesses(const FunctionUnderTest &fn, InteropEnv &env);

struct FrozenFunction {
  std::string function_id;
  carrier::GoFunction go_function;
  RustFnSig signature;
  std::string current_item;  // translated function, as last compiled
  std::vector<std::string> context_items;  // frozen types and adapters shown to the model
};

struct BodyAttempt {
  bool passed = false;
  std::string feedback;
};

/// Builds and validates one candidate item.
using BodyValidator = std::function<BodyAttempt(const std::string &candidate)>;

struct RegenerationStats {
  int attempts = 0;
  int validator_runs = 0;
  int signature_rejections = 0;
  std::string last_feedback;
};

std::string body_prompt(const FrozenFunction &frozen, int attempt, const std::string &feedback);

/// Asks for a new body while the signature stays frozen. A candidate whose
/// parsed signature differs is rejected before `validate` runs and still
/// costs one attempt. Throws BudgetExhausted.
std::string regenerate_body(const FrozenFunction &frozen, const Budget &budget, llm::LlmGateway &gateway,
                            const BodyValidator &validate, const std::string &initial_feedback = "",
                            RegenerationStats *stats = nullptr);

}  // namespace xcrate::validation
