#pragma once

// Assigns each source package exactly one target crate before translation.

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "xcrate/go_api.hpp"
#include "xcrate/llm_gateway.hpp"

namespace xcrate::mapping {

enum class Provenance { proposed_by_llm, keyword_search, manual };

std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view s);

struct CandidateCrate {
  std::string crate;
  std::string description;
  std::vector<std::string> keywords;
};

using CandidateCatalog = std::vector<CandidateCrate>;

/// `[{crate, description, keywords: [...]}]`. Throws MalformedInput.
CandidateCatalog parse_catalog(const nlohmann::json &j);
CandidateCatalog load_catalog(const std::filesystem::path &path);

struct CrateMapping {
  std::map<std::string, std::string> entries;
  std::map<std::string, Provenance> provenance;

  /// Throws MissingKb when the package is not mapped.
  const std::string &crate_for(const std::string &package) const;
  nlohmann::json to_json() const;
};

struct KeywordHit {
  std::string crate;
  int matches = 0;
};

/// Catalog crates whose name or keywords share a token with the package path,
/// summary or API names; most matches first, then by name.
std::vector<KeywordHit> keyword_search(const go::GoPackageDoc &package, const CandidateCatalog &catalog);

std::string proposal_prompt(const go::GoPackageDoc &package);

/// Crate name proposed by the model, or nullopt when it has no answer
/// (replay miss, provider failure, empty reply).
std::optional<std::string> llm_proposal(const go::GoPackageDoc &package, llm::LlmGateway *gateway);

/// Packages already present in `preset` keep that mapping. Throws NoCandidate
/// naming every package left without a crate.
CrateMapping match_crates(const std::vector<go::GoPackageDoc> &packages, const CandidateCatalog &catalog,
                          llm::LlmGateway *gateway, const CrateMapping &preset = {});

/// Overrides file: `{go_package: crate}`. Throws MalformedOverride.
CrateMapping apply_overrides(CrateMapping mapping, const nlohmann::json &overrides);
CrateMapping load_manual_overrides(CrateMapping mapping, const std::filesystem::path &overrides_file);

}  // namespace xcrate::mapping
