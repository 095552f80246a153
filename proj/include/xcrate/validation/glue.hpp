#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xcrate/carrier/go_types.hpp"
#include "xcrate/carrier/schema.hpp"
#include "xcrate/crate_mapper.hpp"
#include "xcrate/go_api.hpp"
#include "xcrate/knowledge_base.hpp"
#include "xcrate/llm_gateway.hpp"
#include "xcrate/validation/harness.hpp"

namespace xcrate::validation {

/// Adapters of one type on one side: forward into the carrier, backward out
/// of it. Both live in the same source text.
struct AdapterPair {
  Side side = Side::source_side;
  std::string type;  // source type name
  std::string forward_name;
  std::string backward_name;
  std::string forward_src;
  std::string backward_src;
  std::string support_src;  // imports and helpers outside the two adapters
  std::vector<std::string> kb_hits_used;
  bool derived = false;  // produced without the model

  std::string source() const;
};

/// `ToProtoRSAIdentity` / `FromProtoRSAIdentity`.
std::string go_forward_name(std::string_view source_type);
std::string go_backward_name(std::string_view source_type);
/// `to_proto_rsa_identity` / `from_proto_rsa_identity`.
std::string rust_forward_name(std::string_view source_type);
std::string rust_backward_name(std::string_view source_type);
/// Target-side name of a translated source type: `RsaIdentity`.
std::string rust_type_name(std::string_view source_type);

/// Concatenates Go glue units into one file of package `package_name`,
/// hoisting and deduplicating their imports.
std::string combine_go_units(const std::vector<std::string> &units, const std::string &package_name = "carrier");

/// Validated adapters, reused by name when nested types are generated.
class AdapterStore {
 public:
  void put(const AdapterPair &pair);
  const AdapterPair *find(Side side, std::string_view type) const;
  /// The adapters of `types` and everything they depend on, dependencies
  /// first, as recorded by `set_dependencies`.
  std::vector<const AdapterPair *> closure(Side side, const std::vector<std::string> &types) const;
  void set_dependencies(const std::string &type, std::vector<std::string> deps);

 private:
  std::map<std::pair<Side, std::string>, AdapterPair> pairs_;
  std::map<std::string, std::vector<std::string>> deps_;
};

/// Library knowledge used in glue prompts.
struct GlueKnowledge {
  const std::map<std::string, kb::KnowledgeBase> *kbs = nullptr;  // by crate
  const mapping::CrateMapping *mapping = nullptr;
  std::vector<go::GoApiEntry> go_index;
  std::map<std::string, std::string> package_aliases;  // `rsa` -> `crypto/rsa`
  int top_n = kb::kDefaultTopN;
};

struct Suggestion {
  std::string source_api;
  std::vector<kb::RankedResult> results;
};

/// For every qualified field type of `def`, the top-n target APIs from the
/// knowledge base of the mapped crate. Throws MissingKb when a package has
/// no mapping or its crate no knowledge base.
std::vector<Suggestion> library_suggestions(const carrier::GoTypeDef &def, const GlueKnowledge &knowledge);

struct GlueRequest {
  Side side = Side::source_side;
  carrier::GoTypeDef go_type;
  std::string target_type_def;  // Rust definition of the translated type
  carrier::CarrierSchema schema;
  std::string carrier_def;  // the generated carrier struct for this side
  int attempt = 1;
  std::string feedback;     // failure of the previous attempt
};

std::string glue_prompt(const GlueRequest &request, const std::vector<Suggestion> &suggestions,
                        const AdapterStore &store);

/// Mechanical adapters for types whose fields are builtins, byte arrays,
/// sequences of those, or types with validated adapters. nullopt otherwise.
std::optional<AdapterPair> derive_glue(const GlueRequest &request, const carrier::SchemaRegistry &registry,
                                       const AdapterStore &store);

/// Prompts the model for both adapters of one side. Throws GenerationFailed
/// when the reply lacks either adapter, ReplayMiss and ProviderError from
/// the gateway.
AdapterPair gen_glue(const GlueRequest &request, const GlueKnowledge &knowledge, const AdapterStore &store,
                     llm::LlmGateway &gateway);

}  // namespace xcrate::validation
