#pragma once

// Random crate trees for property tests: nested modules with mixed
// visibility, impl blocks naming local or external traits, and internal,
// chained and external re-exports.

#include <algorithm>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "xcrate/api_index.hpp"
#include "xcrate/doc_model.hpp"

namespace xcrate::fixtures {

struct SyntheticConfig {
  int max_depth = 5;
  double reexport_probability = 0.3;
  double private_probability = 0.35;
  int max_items_per_module = 5;
};

class SyntheticCrateBuilder {
 public:
  SyntheticCrateBuilder(std::uint64_t seed, SyntheticConfig config = {})
      : rng_(seed), config_(config) {}

  // A crate named `name`. Item names are prefixed with `tag` so that two
  // generated crates never share identifiers.
  doc::ModuleDoc build(const std::string &name, const std::string &tag,
                       const std::vector<std::string> &external_traits = {},
                       const std::vector<doc::Path> &external_targets = {}) {
    crate_ = name;
    tag_ = tag;
    counter_ = 0;
    nodes_.clear();
    local_traits_.clear();
    auto root = std::make_unique<Node>();
    root->name = name;
    root->path = doc::Path({name});
    grow(*root, 0);
    std::vector<std::string> traits = local_traits_;
    traits.insert(traits.end(), external_traits.begin(), external_traits.end());
    add_impls(traits);
    add_reexports(external_targets);
    doc::ModuleDoc out = freeze(*root);
    root_ = std::move(root);
    return out;
  }

  // Public module paths and item paths that are valid imports of a frozen
  // crate, for use as external re-export targets by a dependent crate.
  static std::vector<doc::Path> importable_targets(const index::ApiIndex &idx,
                                                   const doc::ModuleDoc &root) {
    std::vector<doc::Path> out;
    for (const auto &e : idx.entries()) {
      if (e.kind == index::ApiKind::method) continue;
      for (const auto &p : e.import_paths) out.push_back(p);
    }
    std::vector<doc::Path> modules;
    collect_public_modules(root, doc::Path({root.name}), modules);
    // A module is only addressable through the index when something lives below it.
    for (const auto &m : modules) {
      bool populated = std::any_of(out.begin(), out.end(), [&m](const doc::Path &p) {
        return p.size() > m.size() && p.starts_with(m);
      });
      if (populated) out.push_back(m);
    }
    return out;
  }

  static std::vector<std::string> trait_names(const index::ApiIndex &idx) {
    std::vector<std::string> out;
    for (const auto &e : idx.entries()) {
      if (e.kind == index::ApiKind::trait) out.push_back(e.api_id);
    }
    return out;
  }

 private:
  struct Node {
    doc::ItemKind kind = doc::ItemKind::module;
    std::string name;
    doc::Visibility visibility = doc::Visibility::public_;
    doc::Path path;
    std::vector<std::unique_ptr<Node>> children;  // modules only
    std::vector<doc::ImplBlockDoc> impls;         // types only
    std::vector<doc::FunctionDoc> methods;        // traits only
    std::vector<doc::ReexportDecl> reexports;     // modules only
    std::set<std::string> names;                  // modules only: items and aliases
  };

  static void collect_public_modules(const doc::ModuleDoc &m, const doc::Path &p,
                                     std::vector<doc::Path> &out) {
    for (const auto &item : m.items) {
      if (item.kind == doc::ItemKind::module && item.is_public()) {
        out.push_back(p.child(item.name));
        collect_public_modules(*item.submodule, p.child(item.name), out);
      }
    }
  }

  bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }
  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  template <typename T>
  const T &pick(const std::vector<T> &v) {
    return v[static_cast<std::size_t>(uniform(0, static_cast<int>(v.size()) - 1))];
  }

  std::string fresh(const char *kind) { return tag_ + kind + std::to_string(counter_++); }

  void grow(Node &module, int depth) {
    nodes_.push_back(&module);
    int n = uniform(depth == 0 ? 2 : 1, config_.max_items_per_module);
    for (int i = 0; i < n; ++i) {
      auto child = std::make_unique<Node>();
      int roll = uniform(0, depth + 1 < config_.max_depth ? 3 : 2);
      child->kind = roll == 0 ? doc::ItemKind::type
                    : roll == 1 ? doc::ItemKind::trait
                    : roll == 2 ? doc::ItemKind::function
                                : doc::ItemKind::module;
      const char *prefix = child->kind == doc::ItemKind::type    ? "T"
                           : child->kind == doc::ItemKind::trait ? "Tr"
                           : child->kind == doc::ItemKind::function ? "f"
                                                                     : "m";
      child->name = fresh(prefix);
      child->visibility = chance(config_.private_probability) ? doc::Visibility::private_
                                                              : doc::Visibility::public_;
      child->path = module.path.child(child->name);
      if (child->kind == doc::ItemKind::trait) {
        local_traits_.push_back(child->name);
        int m = uniform(0, 2);
        for (int k = 0; k < m; ++k) child->methods.push_back({"tm" + std::to_string(k), "trait method", ""});
      }
      if (child->kind == doc::ItemKind::module) grow(*child, depth + 1);
      module.names.insert(child->name);
      module.children.push_back(std::move(child));
    }
  }

  void add_impls(const std::vector<std::string> &traits) {
    for (Node *module : nodes_) {
      for (auto &child : module->children) {
        if (child->kind != doc::ItemKind::type) continue;
        if (chance(0.6)) {
          child->impls.push_back({std::nullopt, child->name, {{"new", "Create one.", "fn new() -> Self"}}});
        }
        if (!traits.empty() && chance(0.7)) {
          std::string trait = pick(traits);
          child->impls.push_back({trait, child->name, {{"via_" + trait, "Trait provided.", ""}}});
        }
      }
    }
  }

  void place(const doc::Path &target, bool internal) {
    Node *dest = pick(nodes_);
    const std::string &alias = target.back();
    if (dest->names.count(alias)) return;
    if (internal && target.parent() == dest->path) return;
    doc::Path written = target;
    if (internal && chance(0.5)) {
      std::vector<std::string> segs = target.segments();
      segs[0] = "crate";
      written = doc::Path(std::move(segs));
    }
    doc::Visibility vis = chance(0.85) ? doc::Visibility::public_ : doc::Visibility::private_;
    dest->reexports.push_back({written, vis});
    dest->names.insert(alias);
    alias_paths_.push_back(dest->path.child(alias));
  }

  void add_reexports(const std::vector<doc::Path> &external_targets) {
    alias_paths_.clear();
    std::vector<doc::Path> items;
    for (Node *module : nodes_) {
      for (auto &child : module->children) items.push_back(child->path);
    }
    for (const auto &p : items) {
      if (chance(config_.reexport_probability)) place(p, true);
    }
    // Re-exports of re-exports, in creation order so chains cannot loop.
    std::vector<doc::Path> first_hops = alias_paths_;
    for (const auto &p : first_hops) {
      if (chance(config_.reexport_probability)) place(p, true);
    }
    for (const auto &p : external_targets) {
      if (chance(config_.reexport_probability)) place(p, false);
    }
  }

  doc::ModuleDoc freeze(const Node &node) {
    doc::ModuleDoc m;
    m.name = node.name;
    m.doc = "module " + node.name;
    m.visibility = node.visibility;
    m.reexports = node.reexports;
    for (const auto &child : node.children) {
      doc::ItemDoc item;
      item.kind = child->kind;
      item.name = child->name;
      item.doc = "doc for " + child->name;
      item.visibility = child->visibility;
      item.impl_blocks = child->impls;
      item.methods = child->methods;
      if (child->kind == doc::ItemKind::function) item.signature = "fn " + child->name + "()";
      if (child->kind == doc::ItemKind::module) {
        item.submodule = std::make_shared<const doc::ModuleDoc>(freeze(*child));
      }
      m.items.push_back(std::move(item));
    }
    return m;
  }

  std::mt19937_64 rng_;
  SyntheticConfig config_;
  std::string crate_;
  std::string tag_;
  int counter_ = 0;
  std::vector<Node *> nodes_;
  std::vector<std::string> local_traits_;
  std::vector<doc::Path> alias_paths_;
  std::unique_ptr<Node> root_;
};

}  // namespace xcrate::fixtures
