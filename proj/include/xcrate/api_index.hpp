#pragma once

// Per-crate inventory of publicly usable API items and the import paths that
// make each of them callable from outside the crate.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "xcrate/doc_model.hpp"

namespace xcrate::index {

using doc::DependencyGraph;
using doc::ItemDoc;
using doc::ModuleDoc;
using doc::Path;

inline constexpr int kIndexFormatVersion = 1;
inline constexpr int kMaxReexportDepth = 8;

enum class ApiKind { type, trait, method, function };

std::string_view to_string(ApiKind k);
ApiKind api_kind_from_string(std::string_view s);

struct ApiEntry {
  std::string api_id;  // `Type`, `Type::method`, `Trait::method`, `function`
  ApiKind kind = ApiKind::type;
  std::string doc;
  std::string signature;
  // Sorted shortest first. For methods: the owner's paths plus, for
  // trait-provided methods, the paths of the providing trait.
  std::vector<Path> import_paths;
  // Defining location, e.g. `ed25519_fixture::signing::SigningKey`. Stable
  // across re-exports, so it identifies an item across crates.
  std::string def_key;
  std::string owner_key;  // methods only: def_key of the type or trait
  std::string trait_key;  // trait-provided methods only

  friend bool operator==(const ApiEntry &, const ApiEntry &) = default;
};

class ApiIndex {
 public:
  ApiIndex() = default;
  /// Sorts entries by api_id.
  ApiIndex(std::string crate_name, std::vector<ApiEntry> entries);

  const std::string &crate_name() const { return crate_; }
  const std::vector<ApiEntry> &entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  const ApiEntry *find(std::string_view api_id) const;
  const ApiEntry *find_by_def(std::string_view def_key) const;
  /// Non-method entries importable at exactly `path`.
  std::vector<const ApiEntry *> find_by_path(const Path &path) const;
  /// True if `path` is one of the import paths of a non-method entry.
  bool has_import_path(const Path &path) const;

  friend bool operator==(const ApiIndex &, const ApiIndex &) = default;

 private:
  std::string crate_;
  std::vector<ApiEntry> entries_;
};

using CratesMap = std::map<std::string, ApiIndex>;

/// Trait reference awaiting the revision pass. A known def_key wins; otherwise
/// the trait is looked up by name among the crate's indexed traits.
struct TraitRef {
  std::string def_key;
  std::string name;
};

struct PendingMethod {
  std::string method_name;
  std::string def_key;
  std::string doc;
  std::string signature;
  std::string owner_key;
  std::optional<TraitRef> defining_trait;  // nullopt for inherent methods
};

/// Traversal output: entries keyed by def_key with their collected paths,
/// plus method placeholders that only the revision pass can resolve.
struct PartialIndex {
  std::map<std::string, ApiEntry> entries;
  std::map<std::string, PendingMethod> pending;
  std::vector<std::string> warnings;

  void add_entry(ApiEntry entry);
  void add_pending(PendingMethod method);
  void merge(PartialIndex other);
};

/// Collects notes such as dropped methods; optional everywhere.
struct ExtractionLog {
  std::vector<std::string> warnings;
};

PartialIndex extract_type(const Path &prefix, const ItemDoc &type, const Path &defining_path);
PartialIndex extract_trait(const Path &prefix, const ItemDoc &trait, const Path &defining_path);

/// Walks `module` (whose parent is reachable at `prefix`, empty at the root)
/// and every public submodule, resolving internal re-exports against
/// `crate_root` and external ones against `crates_map`.
PartialIndex traverse_module(const Path &prefix, const ModuleDoc &module,
                             const ModuleDoc &crate_root, const CratesMap &crates_map);

/// Traversal followed by the revision pass that rewrites every method
/// placeholder to the providing trait's import paths, or drops the method when
/// that trait is not part of the index.
ApiIndex compute_items_map(const ModuleDoc &crate_root, const CratesMap &crates_map,
                           ExtractionLog *log = nullptr);

/// Builds finalized indexes for the crate and all of its transitive
/// dependencies, in post-order.
CratesMap extract_crate(const ModuleDoc &root, const std::map<std::string, ModuleDoc> &dep_docs,
                        const DependencyGraph &dep_graph, ExtractionLog *log = nullptr);

using CrateTrees = std::map<std::string, const ModuleDoc *>;

/// True iff `path` names a public item reached from a crate root through
/// public modules only, where a public `pub use` in a reachable module counts
/// as an alias for its target.
bool is_valid_import_path(const Path &path, const CrateTrees &trees);

nlohmann::json to_json(const ApiIndex &index);
ApiIndex index_from_json(const nlohmann::json &j);

}  // namespace xcrate::index
