#pragma once

// Structural model of a crate's documentation: modules hold items and
// `pub use` declarations, types carry impl blocks, traits carry method
// declarations. Trees are immutable once parsed.

#include <compare>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace xcrate::doc {

inline constexpr int kDocFormatVersion = 1;

enum class Visibility { public_, private_ };

std::string_view to_string(Visibility v);

/// A `::`-separated path. The first segment names a crate (or `crate` inside
/// re-export declarations), the last names an item.
class Path {
 public:
  Path() = default;
  explicit Path(std::vector<std::string> segments);

  /// Throws MalformedDoc on empty input or empty segments.
  static Path parse(std::string_view text);

  const std::vector<std::string> &segments() const { return segments_; }
  std::size_t size() const { return segments_.size(); }
  bool empty() const { return segments_.empty(); }
  const std::string &front() const { return segments_.front(); }
  const std::string &back() const { return segments_.back(); }

  Path child(std::string_view segment) const;
  Path parent() const;
  bool starts_with(const Path &prefix) const;
  /// Replaces `old_prefix` with `new_prefix`; the caller guarantees starts_with(old_prefix).
  Path rebase(const Path &old_prefix, const Path &new_prefix) const;

  std::string str() const;

  friend bool operator==(const Path &, const Path &) = default;
  friend std::strong_ordering operator<=>(const Path &, const Path &) = default;

 private:
  std::vector<std::string> segments_;
};

/// Shortest first (fewest segments), then lexicographic on rendering.
bool shorter_path(const Path &a, const Path &b);

struct FunctionDoc {
  std::string name;
  std::string doc;
  std::string signature;

  friend bool operator==(const FunctionDoc &, const FunctionDoc &) = default;
};

struct ImplBlockDoc {
  std::optional<std::string> trait_name;  // absent for inherent impls
  std::string for_type;
  std::vector<FunctionDoc> methods;

  friend bool operator==(const ImplBlockDoc &, const ImplBlockDoc &) = default;
};

struct ReexportDecl {
  Path path;
  Visibility visibility = Visibility::public_;

  friend bool operator==(const ReexportDecl &, const ReexportDecl &) = default;
};

enum class ItemKind { module, type, trait, function };

std::string_view to_string(ItemKind k);

struct ModuleDoc;

struct ItemDoc {
  ItemKind kind = ItemKind::type;
  std::string name;
  std::string generics;  // opaque display suffix such as "<D: Digest>"
  std::string doc;
  Visibility visibility = Visibility::public_;
  std::string signature;                    // functions only
  std::vector<ImplBlockDoc> impl_blocks;    // types only
  std::vector<FunctionDoc> methods;         // traits only
  std::shared_ptr<const ModuleDoc> submodule;  // modules only

  bool is_public() const { return visibility == Visibility::public_; }
  std::string display_name() const { return name + generics; }

  friend bool operator==(const ItemDoc &a, const ItemDoc &b);
};

struct ModuleDoc {
  std::string name;
  std::string doc;
  std::vector<ItemDoc> items;
  std::vector<ReexportDecl> reexports;
  Visibility visibility = Visibility::public_;

  const ItemDoc *find_item(std::string_view item_name) const;
  /// Public re-export whose last segment is `alias`, if any.
  const ReexportDecl *find_reexport(std::string_view alias) const;
  bool is_public() const { return visibility == Visibility::public_; }

  friend bool operator==(const ModuleDoc &, const ModuleDoc &) = default;
};

struct CrateDoc {
  std::string crate_name;
  ModuleDoc root;
};

/// Accepts either the file form `{format_version, crate_name, root}` or a bare
/// root ModuleDoc. Throws MalformedDoc on any schema or invariant violation.
ModuleDoc parse_crate_doc(std::string_view doc_json);
CrateDoc parse_crate_doc_file(std::string_view doc_json);

/// Checks every node invariant; throws MalformedDoc. Used by the parser and by
/// programmatically built trees.
void validate_module_tree(const ModuleDoc &root);

nlohmann::json to_json(const ModuleDoc &module);
nlohmann::json crate_doc_to_json(const ModuleDoc &root);

using DependencyGraph = std::map<std::string, std::vector<std::string>>;

DependencyGraph parse_dependency_graph(std::string_view json_text);

/// Reachable crates in post-order (each after all of its dependencies, the
/// queried crate last). Sibling dependencies are visited in lexicographic
/// order. Throws CyclicDependency.
std::vector<std::string> transitive_dependencies(const std::string &crate_name,
                                                 const DependencyGraph &graph);

}  // namespace xcrate::doc
