#pragma once

// Source-side API records as produced by the documentation sidecar.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace xcrate::go {

struct GoApiEntry {
  std::string package;  // import path, e.g. "crypto/sha512"
  std::string name;     // "New", or "PrivateKey.Seed" for methods
  std::string doc;
  std::string signature;

  /// Last package segment plus name: "sha512.New".
  std::string qualified_name() const;

  friend bool operator==(const GoApiEntry &, const GoApiEntry &) = default;
};

struct GoPackageDoc {
  std::string package;
  std::string summary;  // package-level documentation
  std::vector<GoApiEntry> entries;
};

/// Parses the sidecar index: a JSON array of `{package, name, doc, signature}`.
/// Throws MalformedInput, including on duplicate (package, name) pairs.
std::vector<GoApiEntry> parse_go_index(const nlohmann::json &j);
std::vector<GoApiEntry> load_go_index(const std::filesystem::path &path);
nlohmann::json to_json(const std::vector<GoApiEntry> &entries);

/// Groups entries by package. `summaries` maps package -> package doc.
std::vector<GoPackageDoc> group_packages(const std::vector<GoApiEntry> &entries,
                                         const std::map<std::string, std::string> &summaries = {});

}  // namespace xcrate::go
