#include "xcrate/api_index.hpp"

#include <algorithm>
#include <set>

#include "xcrate/error.hpp"

namespace xcrate::index {

using nlohmann::json;

std::string_view to_string(ApiKind k) {
  switch (k) {
    case ApiKind::type: return "type";
    case ApiKind::trait: return "trait";
    case ApiKind::method: return "method";
    case ApiKind::function: return "function";
  }
  return "?";
}

ApiKind api_kind_from_string(std::string_view s) {
  if (s == "type") return ApiKind::type;
  if (s == "trait") return ApiKind::trait;
  if (s == "method") return ApiKind::method;
  if (s == "function") return ApiKind::function;
  throw MalformedInput("unknown api kind '" + std::string(s) + "'");
}

namespace {

void normalize_paths(std::vector<Path> &paths) {
  std::sort(paths.begin(), paths.end(), doc::shorter_path);
  paths.erase(std::unique(paths.begin(), paths.end()), paths.end());
}

void union_paths(std::vector<Path> &into, const std::vector<Path> &from) {
  into.insert(into.end(), from.begin(), from.end());
  normalize_paths(into);
}

bool is_local_root(const std::string &segment, const std::string &crate) {
  return segment == "crate" || segment == crate;
}

// Method def keys are `<owner>::<name>` or `<owner>::<name>@<trait reference>`.
std::string method_name_from_def(const std::string &def_key, const std::string &owner_key) {
  std::string rest = def_key.substr(owner_key.size() + 2);
  return rest.substr(0, rest.find('@'));
}

std::string method_def_key(const std::string &owner_key, const std::string &name,
                           const std::optional<std::string> &trait) {
  std::string key = owner_key + "::" + name;
  if (trait) key += "@" + *trait;
  return key;
}

}  // namespace

// ---------------------------------------------------------------------------
// ApiIndex

ApiIndex::ApiIndex(std::string crate_name, std::vector<ApiEntry> entries)
    : crate_(std::move(crate_name)), entries_(std::move(entries)) {
  for (auto &e : entries_) normalize_paths(e.import_paths);
  std::sort(entries_.begin(), entries_.end(),
            [](const ApiEntry &a, const ApiEntry &b) { return a.api_id < b.api_id; });
}

const ApiEntry *ApiIndex::find(std::string_view api_id) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), api_id,
                             [](const ApiEntry &e, std::string_view id) { return e.api_id < id; });
  if (it != entries_.end() && it->api_id == api_id) return &*it;
  return nullptr;
}

const ApiEntry *ApiIndex::find_by_def(std::string_view def_key) const {
  for (const auto &e : entries_) {
    if (e.def_key == def_key) return &e;
  }
  return nullptr;
}

std::vector<const ApiEntry *> ApiIndex::find_by_path(const Path &path) const {
  std::vector<const ApiEntry *> out;
  for (const auto &e : entries_) {
    if (e.kind == ApiKind::method) continue;
    if (std::find(e.import_paths.begin(), e.import_paths.end(), path) != e.import_paths.end()) {
      out.push_back(&e);
    }
  }
  return out;
}

bool ApiIndex::has_import_path(const Path &path) const { return !find_by_path(path).empty(); }

// ---------------------------------------------------------------------------
// PartialIndex

void PartialIndex::add_entry(ApiEntry entry) {
  auto it = entries.find(entry.def_key);
  if (it == entries.end()) {
    normalize_paths(entry.import_paths);
    std::string key = entry.def_key;
    entries.emplace(std::move(key), std::move(entry));
    return;
  }
  union_paths(it->second.import_paths, entry.import_paths);
}

void PartialIndex::add_pending(PendingMethod method) {
  std::string key = method.def_key;
  pending.emplace(std::move(key), std::move(method));
}

void PartialIndex::merge(PartialIndex other) {
  for (auto &[key, e] : other.entries) add_entry(std::move(e));
  for (auto &[key, p] : other.pending) add_pending(std::move(p));
  warnings.insert(warnings.end(), other.warnings.begin(), other.warnings.end());
}

// ---------------------------------------------------------------------------
// Item extraction

PartialIndex extract_type(const Path &prefix, const ItemDoc &type, const Path &defining_path) {
  PartialIndex out;
  ApiEntry entry;
  entry.api_id = type.name;
  entry.kind = ApiKind::type;
  entry.doc = type.doc;
  entry.import_paths = {prefix.child(type.name)};
  entry.def_key = defining_path.str();
  out.add_entry(entry);
  for (const auto &block : type.impl_blocks) {
    for (const auto &f : block.methods) {
      PendingMethod pm;
      pm.method_name = f.name;
      pm.def_key = method_def_key(entry.def_key, f.name, block.trait_name);
      pm.doc = f.doc;
      pm.signature = f.signature;
      pm.owner_key = entry.def_key;
      if (block.trait_name) pm.defining_trait = TraitRef{"", *block.trait_name};
      out.add_pending(std::move(pm));
    }
  }
  return out;
}

PartialIndex extract_trait(const Path &prefix, const ItemDoc &trait, const Path &defining_path) {
  PartialIndex out;
  Path trait_path = prefix.child(trait.name);
  ApiEntry entry;
  entry.api_id = trait.name;
  entry.kind = ApiKind::trait;
  entry.doc = trait.doc;
  entry.import_paths = {trait_path};
  entry.def_key = defining_path.str();
  out.add_entry(entry);
  for (const auto &f : trait.methods) {
    ApiEntry m;
    m.api_id = trait.name + "::" + f.name;
    m.kind = ApiKind::method;
    m.doc = f.doc;
    m.signature = f.signature;
    m.import_paths = {trait_path};
    m.def_key = entry.def_key + "::" + f.name;
    m.owner_key = entry.def_key;
    m.trait_key = entry.def_key;
    out.add_entry(std::move(m));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Traversal

namespace {

struct InternalTarget {
  const ItemDoc *item = nullptr;
  const ModuleDoc *container = nullptr;
  std::optional<Path> external;  // set when the chain leaves the crate
};

class Traversal {
 public:
  Traversal(const ModuleDoc &root, const CratesMap &crates) : root_(root), crates_(crates) {
    index_definitions(root_, Path({root_.name}));
  }

  PartialIndex run(const Path &prefix, const ModuleDoc &module) {
    PartialIndex out;
    visit(prefix, module, out);
    return out;
  }

 private:
  void index_definitions(const ModuleDoc &m, const Path &path) {
    for (const auto &item : m.items) {
      Path p = path.child(item.name);
      definitions_.emplace(&item, p);
      containers_.emplace(&item, &m);
      if (item.kind == doc::ItemKind::module) index_definitions(*item.submodule, p);
    }
  }

  const Path &definition_of(const ItemDoc &item) const { return definitions_.at(&item); }

  bool is_local(const Path &p) const { return is_local_root(p.front(), root_.name); }

  static const doc::ReexportDecl *find_any_reexport(const ModuleDoc &m, std::string_view alias) {
    for (const auto &re : m.reexports) {
      if (re.path.back() == alias) return &re;
    }
    return nullptr;
  }

  // Resolves a crate-internal path, ignoring intermediate visibility and
  // following `use` aliases up to kMaxReexportDepth hops.
  InternalTarget resolve_internal(const Path &target, int depth) const {
    if (depth > kMaxReexportDepth) {
      throw UnresolvedReexport("re-export chain deeper than " +
                               std::to_string(kMaxReexportDepth) + " at '" + target.str() + "'");
    }
    const auto &segs = target.segments();
    const ModuleDoc *m = &root_;
    for (std::size_t i = 1; i < segs.size(); ++i) {
      const std::string &seg = segs[i];
      bool last = i + 1 == segs.size();
      if (const ItemDoc *item = m->find_item(seg)) {
        if (last) return {item, m, std::nullopt};
        if (item->kind != doc::ItemKind::module) break;
        m = item->submodule.get();
        continue;
      }
      if (const auto *re = find_any_reexport(*m, seg)) {
        std::vector<std::string> rest(segs.begin() + static_cast<std::ptrdiff_t>(i) + 1, segs.end());
        auto extend = [&rest](Path p) {
          for (const auto &s : rest) p = p.child(s);
          return p;
        };
        if (!is_local(re->path)) return {nullptr, nullptr, extend(re->path)};
        InternalTarget hop = resolve_internal(re->path, depth + 1);
        if (hop.external) return {nullptr, nullptr, extend(*hop.external)};
        if (last) return hop;
        if (hop.item->kind != doc::ItemKind::module) break;
        m = hop.item->submodule.get();
        continue;
      }
      break;
    }
    throw UnresolvedReexport("cannot resolve '" + target.str() + "' in crate " + root_.name);
  }

  // Trait providing an impl block, resolved in the scope of the implementing
  // type's module where possible.
  TraitRef resolve_trait_ref(const std::string &text, const ModuleDoc &scope) const {
    Path p = Path::parse(text);
    try {
      if (p.size() == 1) {
        if (const ItemDoc *item = scope.find_item(p.back())) {
          if (item->kind == doc::ItemKind::trait) return {definition_of(*item).str(), p.back()};
          return {"", p.back()};
        }
        const auto *re = find_any_reexport(scope, p.back());
        if (!re) return {"", p.back()};
        p = re->path;
      }
      if (is_local(p)) {
        InternalTarget t = resolve_internal(p, 1);
        if (!t.external) {
          if (t.item->kind == doc::ItemKind::trait) return {definition_of(*t.item).str(), p.back()};
          return {"", p.back()};
        }
        p = *t.external;
      }
      if (auto it = crates_.find(p.front()); it != crates_.end()) {
        for (const ApiEntry *e : it->second.find_by_path(p)) {
          if (e->kind == ApiKind::trait) return {e->def_key, p.back()};
        }
      }
    } catch (const UnresolvedReexport &) {
    }
    return {"", p.back()};
  }

  void import_external_entry(const ApiIndex &dep, const ApiEntry &e, const std::vector<Path> &paths,
                             PartialIndex &out) const {
    ApiEntry copy = e;
    copy.import_paths = paths;
    out.add_entry(copy);
    for (const auto &m : dep.entries()) {
      if (m.kind != ApiKind::method || m.owner_key != e.def_key) continue;
      if (e.kind == ApiKind::trait) {
        ApiEntry decl = m;
        decl.import_paths = paths;
        out.add_entry(std::move(decl));
        continue;
      }
      PendingMethod pm;
      pm.method_name = method_name_from_def(m.def_key, m.owner_key);
      pm.def_key = m.def_key;
      pm.doc = m.doc;
      pm.signature = m.signature;
      pm.owner_key = e.def_key;
      if (!m.trait_key.empty()) {
        std::string trait_name = m.trait_key.substr(m.trait_key.rfind("::") + 2);
        pm.defining_trait = TraitRef{m.trait_key, trait_name};
      }
      out.add_pending(std::move(pm));
    }
  }

  void add_external(const Path &module_path, const Path &target, PartialIndex &out) const {
    auto it = crates_.find(target.front());
    if (it == crates_.end()) {
      throw UnresolvedReexport("re-export '" + target.str() + "' names crate '" + target.front() +
                               "' which has no index");
    }
    const ApiIndex &dep = it->second;
    Path alias_path = module_path.child(target.back());
    auto direct = dep.find_by_path(target);
    if (!direct.empty()) {
      for (const ApiEntry *e : direct) import_external_entry(dep, *e, {alias_path}, out);
      return;
    }
    // Re-export of a whole module or crate: rebase every path below it.
    bool any = false;
    for (const auto &e : dep.entries()) {
      if (e.kind == ApiKind::method) continue;
      std::vector<Path> rebased;
      for (const auto &q : e.import_paths) {
        if (q.size() > target.size() && q.starts_with(target)) {
          rebased.push_back(q.rebase(target, alias_path));
        }
      }
      if (!rebased.empty()) {
        import_external_entry(dep, e, rebased, out);
        any = true;
      }
    }
    if (!any) {
      throw UnresolvedReexport("re-export '" + target.str() + "' not found in index of crate " +
                               target.front());
    }
  }

  void add_item(const Path &module_path, const ItemDoc &item, PartialIndex &out) {
    switch (item.kind) {
      case doc::ItemKind::module:
        visit(module_path, *item.submodule, out);
        break;
      case doc::ItemKind::trait:
        out.merge(extract_trait(module_path, item, definition_of(item)));
        break;
      case doc::ItemKind::type: {
        PartialIndex part = extract_type(module_path, item, definition_of(item));
        const ModuleDoc &scope = *containers_.at(&item);
        for (auto &[key, pm] : part.pending) {
          if (pm.defining_trait) pm.defining_trait = resolve_trait_ref(pm.defining_trait->name, scope);
        }
        out.merge(std::move(part));
        break;
      }
      case doc::ItemKind::function: {
        ApiEntry f;
        f.api_id = item.name;
        f.kind = ApiKind::function;
        f.doc = item.doc;
        f.signature = item.signature;
        f.import_paths = {module_path.child(item.name)};
        f.def_key = definition_of(item).str();
        out.add_entry(std::move(f));
        break;
      }
    }
  }

  void visit(const Path &prefix, const ModuleDoc &module, PartialIndex &out) {
    if (!active_.insert(&module).second) return;  // re-export cycle back into an open module
    Path here = prefix.empty() ? Path({module.name}) : prefix.child(module.name);

    std::vector<const ItemDoc *> locals;
    for (const auto &item : module.items) {
      if (item.is_public()) {
        locals.push_back(&item);
      } else if (item.kind == doc::ItemKind::type && !item.impl_blocks.empty()) {
        out.warnings.push_back("dropping methods of private type " + definition_of(item).str());
      }
    }
    for (const auto &re : module.reexports) {
      if (re.visibility != doc::Visibility::public_) continue;
      if (!is_local(re.path)) {
        add_external(here, re.path, out);
        continue;
      }
      InternalTarget t = resolve_internal(re.path, 1);
      if (t.external) {
        add_external(here, *t.external, out);
      } else if (!t.item->is_public()) {
        out.warnings.push_back("ignoring re-export of private item '" + re.path.str() + "'");
      } else {
        locals.push_back(t.item);
      }
    }
    for (const ItemDoc *item : locals) add_item(here, *item, out);
    active_.erase(&module);
  }

  const ModuleDoc &root_;
  const CratesMap &crates_;
  std::map<const ItemDoc *, Path> definitions_;
  std::map<const ItemDoc *, const ModuleDoc *> containers_;
  std::set<const ModuleDoc *> active_;
};

// Revision pass plus display-name assignment.
ApiIndex finalize(const std::string &crate, PartialIndex partial, ExtractionLog *log) {
  auto warn = [&](std::string msg) {
    if (log) log->warnings.push_back(std::move(msg));
  };
  for (auto &w : partial.warnings) warn(std::move(w));

  std::map<std::string, ApiEntry> entries = std::move(partial.entries);
  std::vector<ApiEntry> methods;

  for (auto &[key, pm] : partial.pending) {
    auto owner = entries.find(pm.owner_key);
    if (owner == entries.end()) {
      warn("dropping method " + pm.def_key + ": owner not indexed");
      continue;
    }
    ApiEntry m;
    m.kind = ApiKind::method;
    m.doc = pm.doc;
    m.signature = pm.signature;
    m.def_key = pm.def_key;
    m.owner_key = pm.owner_key;
    m.import_paths = owner->second.import_paths;
    if (pm.defining_trait) {
      const ApiEntry *trait = nullptr;
      if (!pm.defining_trait->def_key.empty()) {
        auto it = entries.find(pm.defining_trait->def_key);
        if (it != entries.end() && it->second.kind == ApiKind::trait) trait = &it->second;
      } else {
        std::vector<const ApiEntry *> candidates;
        for (const auto &[k, e] : entries) {
          if (e.kind == ApiKind::trait && e.api_id == pm.defining_trait->name) candidates.push_back(&e);
        }
        std::stable_sort(candidates.begin(), candidates.end(),
                         [&crate](const ApiEntry *a, const ApiEntry *b) {
                           bool la = a->def_key.rfind(crate + "::", 0) == 0;
                           bool lb = b->def_key.rfind(crate + "::", 0) == 0;
                           if (la != lb) return la;
                           return a->def_key < b->def_key;
                         });
        if (candidates.size() > 1) {
          warn("trait name '" + pm.defining_trait->name + "' is ambiguous for " + pm.def_key +
               "; using " + candidates.front()->def_key);
        }
        if (!candidates.empty()) trait = candidates.front();
      }
      if (!trait) {
        warn("dropping method " + pm.def_key + ": trait '" + pm.defining_trait->name +
             "' is not importable");
        continue;
      }
      union_paths(m.import_paths, trait->import_paths);
      m.trait_key = trait->def_key;
    }
    methods.push_back(std::move(m));
  }
  for (auto &m : methods) {
    std::string key = m.def_key;
    entries[key] = std::move(m);
  }

  // Display names: plain names unless two distinct items collide.
  std::map<std::string, std::vector<ApiEntry *>> by_id;
  for (auto &[key, e] : entries) {
    if (e.kind != ApiKind::method) by_id[e.api_id].push_back(&e);
  }
  std::set<std::string> taken;
  for (auto &[id, group] : by_id) {
    if (group.size() == 1) {
      taken.insert(id);
      continue;
    }
    for (ApiEntry *e : group) {
      auto pos = e->def_key.find("::");
      std::string qualified = pos == std::string::npos ? e->def_key : e->def_key.substr(pos + 2);
      e->api_id = taken.count(qualified) ? e->def_key : qualified;
      taken.insert(e->api_id);
    }
  }
  std::map<std::string, std::vector<ApiEntry *>> method_ids;
  for (auto &[key, e] : entries) {
    if (e.kind != ApiKind::method) continue;
    auto owner = entries.find(e.owner_key);
    std::string owner_id = owner != entries.end()
                               ? owner->second.api_id
                               : e.owner_key.substr(e.owner_key.rfind("::") + 2);
    e.api_id = owner_id + "::" + method_name_from_def(e.def_key, e.owner_key);
    method_ids[e.api_id].push_back(&e);
  }
  for (auto &[id, group] : method_ids) {
    if (group.size() == 1) continue;
    for (ApiEntry *e : group) {
      if (e->trait_key.empty() || e->trait_key == e->owner_key) continue;
      auto owner = entries.find(e->owner_key);
      auto trait = entries.find(e->trait_key);
      e->api_id = "<" + owner->second.api_id + " as " + trait->second.api_id +
                  ">::" + method_name_from_def(e->def_key, e->owner_key);
    }
  }

  std::vector<ApiEntry> out;
  out.reserve(entries.size());
  for (auto &[key, e] : entries) out.push_back(std::move(e));
  return ApiIndex(crate, std::move(out));
}

}  // namespace

PartialIndex traverse_module(const Path &prefix, const ModuleDoc &module,
                             const ModuleDoc &crate_root, const CratesMap &crates_map) {
  Traversal t(crate_root, crates_map);
  return t.run(prefix, module);
}

ApiIndex compute_items_map(const ModuleDoc &crate_root, const CratesMap &crates_map,
                           ExtractionLog *log) {
  PartialIndex partial = traverse_module(Path{}, crate_root, crate_root, crates_map);
  return finalize(crate_root.name, std::move(partial), log);
}

CratesMap extract_crate(const ModuleDoc &root, const std::map<std::string, ModuleDoc> &dep_docs,
                        const DependencyGraph &dep_graph, ExtractionLog *log) {
  CratesMap crates;
  for (const auto &name : doc::transitive_dependencies(root.name, dep_graph)) {
    const ModuleDoc *module = nullptr;
    if (name == root.name) {
      module = &root;
    } else if (auto it = dep_docs.find(name); it != dep_docs.end()) {
      module = &it->second;
    } else {
      throw MissingDependencyDoc("no documentation for dependency '" + name + "'");
    }
    crates[name] = compute_items_map(*module, crates, log);
  }
  return crates;
}

// ---------------------------------------------------------------------------
// Validity oracle. Deliberately independent from the traversal above: it
// resolves a concrete path from the root instead of enumerating paths.

namespace {

struct Node {
  std::string crate;
  const ItemDoc *item = nullptr;      // nullptr for a crate root
  const ModuleDoc *module = nullptr;  // set when the node is a module
};

std::optional<Node> resolve_public(const Path &p, const CrateTrees &trees, int depth);

std::optional<Node> resolve_in_crate(const Path &p, const std::string &crate,
                                     const CrateTrees &trees, int depth) {
  if (depth > kMaxReexportDepth) return std::nullopt;
  auto tree = trees.find(crate);
  if (tree == trees.end()) return std::nullopt;
  Node node{crate, nullptr, tree->second};
  for (std::size_t j = 1; j < p.size(); ++j) {
    if (!node.module) return std::nullopt;
    const std::string &seg = p.segments()[j];
    std::optional<Node> next;
    if (const ItemDoc *item = node.module->find_item(seg)) {
      next = Node{node.crate, item, item->submodule.get()};
    } else {
      const doc::ReexportDecl *alias = nullptr;
      for (const auto &re : node.module->reexports) {
        if (re.path.back() == seg) alias = &re;
      }
      if (!alias) return std::nullopt;
      if (is_local_root(alias->path.front(), node.crate)) {
        next = resolve_in_crate(alias->path, node.crate, trees, depth + 1);
      } else {
        next = resolve_public(alias->path, trees, depth + 1);
      }
    }
    if (!next) return std::nullopt;
    node = *next;
  }
  return node;
}

std::optional<Node> resolve_public(const Path &p, const CrateTrees &trees, int depth) {
  if (depth > kMaxReexportDepth) return std::nullopt;
  auto tree = trees.find(p.front());
  if (tree == trees.end()) return std::nullopt;
  Node node{p.front(), nullptr, tree->second};
  for (std::size_t j = 1; j < p.size(); ++j) {
    if (!node.module) return std::nullopt;  // only modules have members on an import path
    const std::string &seg = p.segments()[j];
    std::optional<Node> next;
    if (const ItemDoc *item = node.module->find_item(seg)) {
      if (!item->is_public()) return std::nullopt;
      next = Node{node.crate, item, item->submodule.get()};
    } else if (const doc::ReexportDecl *re = node.module->find_reexport(seg)) {
      if (is_local_root(re->path.front(), node.crate)) {
        next = resolve_in_crate(re->path, node.crate, trees, depth + 1);
      } else {
        next = resolve_public(re->path, trees, depth + 1);
      }
      if (!next || !next->item || !next->item->is_public()) return std::nullopt;
    } else {
      return std::nullopt;
    }
    node = *next;
  }
  return node;
}

}  // namespace

bool is_valid_import_path(const Path &path, const CrateTrees &trees) {
  if (path.size() < 2) return false;
  auto node = resolve_public(path, trees, 0);
  return node && node->item && node->item->is_public();
}

// ---------------------------------------------------------------------------
// Serialization

json to_json(const ApiIndex &index) {
  json entries = json::array();
  for (const auto &e : index.entries()) {
    json paths = json::array();
    for (const auto &p : e.import_paths) paths.push_back(p.str());
    json je = {{"api_id", e.api_id},
               {"kind", std::string(to_string(e.kind))},
               {"doc", e.doc},
               {"import_paths", std::move(paths)},
               {"def_key", e.def_key}};
    if (!e.signature.empty()) je["signature"] = e.signature;
    if (!e.owner_key.empty()) je["owner"] = e.owner_key;
    if (!e.trait_key.empty()) je["trait"] = e.trait_key;
    entries.push_back(std::move(je));
  }
  return {{"format_version", kIndexFormatVersion}, {"crate", index.crate_name()},
          {"entries", std::move(entries)}};
}

ApiIndex index_from_json(const json &j) {
  try {
    if (j.at("format_version").get<int>() != kIndexFormatVersion) {
      throw MalformedInput("unsupported ApiIndex format_version");
    }
    std::vector<ApiEntry> entries;
    for (const auto &je : j.at("entries")) {
      ApiEntry e;
      e.api_id = je.at("api_id").get<std::string>();
      e.kind = api_kind_from_string(je.at("kind").get<std::string>());
      e.doc = je.value("doc", "");
      e.signature = je.value("signature", "");
      for (const auto &p : je.at("import_paths")) e.import_paths.push_back(Path::parse(p.get<std::string>()));
      if (e.import_paths.empty()) throw MalformedInput("entry " + e.api_id + " has no import paths");
      e.def_key = je.value("def_key", e.import_paths.front().str());
      e.owner_key = je.value("owner", "");
      e.trait_key = je.value("trait", "");
      entries.push_back(std::move(e));
    }
    return ApiIndex(j.at("crate").get<std::string>(), std::move(entries));
  } catch (const json::exception &e) {
    throw MalformedInput(std::string("ApiIndex JSON: ") + e.what());
  } catch (const MalformedDoc &e) {
    throw MalformedInput(std::string("ApiIndex JSON: ") + e.what());
  }
}

}  // namespace xcrate::index
