#pragma once

// Per-item translation: the unit handed to the model, its retrieval
// context and the prompt built from both.

#include <map>
#include <string>
#include <vector>

#include "xcrate/api_index.hpp"
#include "xcrate/crate_mapper.hpp"
#include "xcrate/go_api.hpp"
#include "xcrate/knowledge_base.hpp"
#include "xcrate/llm_gateway.hpp"
#include "xcrate/pipeline/go_source.hpp"

namespace xcrate::pipeline {

enum class UnitKind { type_def, function };

std::string_view to_string(UnitKind k);

struct TranslationUnit {
  std::string item_id;
  UnitKind kind = UnitKind::function;
  std::string source_text;
  std::string dependency_summary;  // translated in-scope types and callee signatures
  std::vector<go::GoApiEntry> go_apis_used;  // each distinct API once
};

/// External APIs a declaration uses: package members it names, entries for
/// the library types in its signature or fields, and methods of those types
/// that it calls. Only entries of `go_index` qualify.
std::vector<go::GoApiEntry> apis_used(const GoFunctionDecl &fn, const GoSourceFile &src,
                                      const std::vector<go::GoApiEntry> &go_index);
std::vector<go::GoApiEntry> apis_used(const carrier::GoTypeDef &type, const GoSourceFile &src,
                                      const std::vector<go::GoApiEntry> &go_index);

struct ApiSuggestion {
  std::string api_id;
  std::vector<std::string> import_paths;
  std::string signature;
  std::string doc;
};

struct SourceApiContext {
  std::string source_api;  // `sha512.New`
  std::string crate;
  std::vector<ApiSuggestion> suggestions;
};

struct RagContext {
  std::vector<SourceApiContext> apis;
  bool empty() const { return apis.empty(); }
};

/// Queries the knowledge base of each used API's mapped crate for the top
/// `n` entries. Throws MissingKb when a package is unmapped or its crate has
/// no knowledge base.
RagContext build_rag_context(const TranslationUnit &unit, const mapping::CrateMapping &mapping,
                             const std::map<std::string, kb::KnowledgeBase> &kbs, int n = kb::kDefaultTopN);

struct PromptOptions {
  bool with_imports = true;
};

std::string translation_prompt(const TranslationUnit &unit, const RagContext &context,
                               const PromptOptions &options = {});

/// The Rust code block of the model's answer. Throws GenerationFailed on an
/// empty answer, ReplayMiss and ProviderError from the gateway.
std::string translate_unit(const TranslationUnit &unit, const RagContext &context, llm::LlmGateway &gateway,
                           const PromptOptions &options = {});

/// `use` paths of `rust_source` into one of the indexed crates that are not
/// valid import paths there. Paths into other crates are not checked.
std::vector<std::string> invalid_imports(const std::string &rust_source,
                                         const std::map<std::string, index::ApiIndex> &indexes);

}  // namespace xcrate::pipeline
