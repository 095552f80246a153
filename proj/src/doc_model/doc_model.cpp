#include "xcrate/doc_model.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "xcrate/error.hpp"
#include "xcrate/util/text.hpp"

namespace xcrate::doc {

using nlohmann::json;

std::string_view to_string(Visibility v) {
  return v == Visibility::public_ ? "public" : "private";
}

std::string_view to_string(ItemKind k) {
  switch (k) {
    case ItemKind::module: return "module";
    case ItemKind::type: return "type";
    case ItemKind::trait: return "trait";
    case ItemKind::function: return "function";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Path

Path::Path(std::vector<std::string> segments) : segments_(std::move(segments)) {}

Path Path::parse(std::string_view text) {
  std::string trimmed = util::trim(text);
  if (trimmed.empty()) throw MalformedDoc("empty path");
  auto parts = util::split(trimmed, "::");
  for (auto &p : parts) {
    p = util::trim(p);
    if (p.empty()) throw MalformedDoc("empty segment in path '" + trimmed + "'");
  }
  return Path(std::move(parts));
}

Path Path::child(std::string_view segment) const {
  Path p = *this;
  p.segments_.emplace_back(segment);
  return p;
}

Path Path::parent() const {
  Path p = *this;
  if (!p.segments_.empty()) p.segments_.pop_back();
  return p;
}

bool Path::starts_with(const Path &prefix) const {
  if (prefix.size() > size()) return false;
  return std::equal(prefix.segments_.begin(), prefix.segments_.end(), segments_.begin());
}

Path Path::rebase(const Path &old_prefix, const Path &new_prefix) const {
  std::vector<std::string> out = new_prefix.segments_;
  out.insert(out.end(), segments_.begin() + static_cast<std::ptrdiff_t>(old_prefix.size()),
             segments_.end());
  return Path(std::move(out));
}

std::string Path::str() const { return util::join(segments_, "::"); }

bool shorter_path(const Path &a, const Path &b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a.str() < b.str();
}

// ---------------------------------------------------------------------------
// Tree helpers

bool operator==(const ItemDoc &a, const ItemDoc &b) {
  if (a.kind != b.kind || a.name != b.name || a.generics != b.generics || a.doc != b.doc ||
      a.visibility != b.visibility || a.signature != b.signature ||
      a.impl_blocks != b.impl_blocks || a.methods != b.methods) {
    return false;
  }
  if (static_cast<bool>(a.submodule) != static_cast<bool>(b.submodule)) return false;
  return !a.submodule || *a.submodule == *b.submodule;
}

const ItemDoc *ModuleDoc::find_item(std::string_view item_name) const {
  for (const auto &item : items) {
    if (item.name == item_name) return &item;
  }
  return nullptr;
}

const ReexportDecl *ModuleDoc::find_reexport(std::string_view alias) const {
  for (const auto &re : reexports) {
    if (re.visibility == Visibility::public_ && re.path.back() == alias) return &re;
  }
  return nullptr;
}

namespace {

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto ok_first = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
  auto ok_rest = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
  if (!ok_first(s[0])) return false;
  return std::all_of(s.begin() + 1, s.end(), ok_rest);
}

void check_identifier(std::string_view s, std::string_view what, std::string_view where) {
  if (!is_identifier(s)) {
    throw MalformedDoc(std::string(what) + " '" + std::string(s) + "' is not an identifier in " +
                       std::string(where));
  }
}

void validate_module(const ModuleDoc &m, const std::string &where) {
  check_identifier(m.name, "module name", where);
  std::set<std::string> names;
  for (const auto &item : m.items) {
    std::string item_where = where + "::" + item.name;
    check_identifier(item.name, "item name", where);
    if (!names.insert(item.name).second) {
      throw MalformedDoc("duplicate item name '" + item.name + "' in module " + where);
    }
    bool has_impls = !item.impl_blocks.empty();
    bool has_methods = !item.methods.empty();
    bool has_sub = static_cast<bool>(item.submodule);
    bool has_sig = !item.signature.empty();
    switch (item.kind) {
      case ItemKind::module:
        if (!has_sub) throw MalformedDoc("module item without submodule: " + item_where);
        if (has_impls || has_methods || has_sig) {
          throw MalformedDoc("module item carries a foreign payload: " + item_where);
        }
        if (item.submodule->name != item.name) {
          throw MalformedDoc("submodule name mismatch at " + item_where);
        }
        if (item.submodule->visibility != item.visibility) {
          throw MalformedDoc("submodule visibility mismatch at " + item_where);
        }
        validate_module(*item.submodule, item_where);
        break;
      case ItemKind::type: {
        if (has_methods || has_sub || has_sig) {
          throw MalformedDoc("type item carries a foreign payload: " + item_where);
        }
        for (const auto &block : item.impl_blocks) {
          if (block.for_type != item.name) {
            throw MalformedDoc("impl block for '" + block.for_type + "' attached to type " +
                               item_where);
          }
          if (block.trait_name) {
            Path::parse(*block.trait_name);  // validates the trait reference syntax
          }
          std::set<std::string> method_names;
          for (const auto &f : block.methods) {
            check_identifier(f.name, "method name", item_where);
            if (!method_names.insert(f.name).second) {
              throw MalformedDoc("duplicate method '" + f.name + "' in impl block of " +
                                 item_where);
            }
          }
        }
        break;
      }
      case ItemKind::trait: {
        if (has_impls || has_sub || has_sig) {
          throw MalformedDoc("trait item carries a foreign payload: " + item_where);
        }
        std::set<std::string> method_names;
        for (const auto &f : item.methods) {
          check_identifier(f.name, "method name", item_where);
          if (!method_names.insert(f.name).second) {
            throw MalformedDoc("duplicate method '" + f.name + "' in trait " + item_where);
          }
        }
        break;
      }
      case ItemKind::function:
        if (has_impls || has_methods || has_sub) {
          throw MalformedDoc("function item carries a foreign payload: " + item_where);
        }
        break;
    }
  }
  std::set<std::string> aliases;
  for (const auto &re : m.reexports) {
    if (re.path.size() < 2) {
      throw MalformedDoc("re-export path needs a crate root and an item: '" + re.path.str() +
                         "' in " + where);
    }
    for (const auto &seg : re.path.segments()) {
      if (seg == "*") {
        throw MalformedDoc("glob re-exports are not supported: '" + re.path.str() + "' in " +
                           where);
      }
      check_identifier(seg, "re-export segment", where);
    }
    if (re.visibility != Visibility::public_) continue;
    const std::string &alias = re.path.back();
    if (names.count(alias) || !aliases.insert(alias).second) {
      throw MalformedDoc("re-export '" + re.path.str() + "' clashes with name '" + alias +
                         "' in module " + where);
    }
  }
}

// --- JSON parsing ----------------------------------------------------------

const json &require(const json &obj, const char *key, const std::string &where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw MalformedDoc(std::string("missing field '") + key + "' in " + where);
  return *it;
}

std::string get_string(const json &obj, const char *key, const std::string &where,
                       bool required) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    if (required) throw MalformedDoc(std::string("missing field '") + key + "' in " + where);
    return {};
  }
  if (!it->is_string()) {
    throw MalformedDoc(std::string("field '") + key + "' must be a string in " + where);
  }
  return it->get<std::string>();
}

Visibility parse_visibility(const json &obj, const std::string &where, bool required) {
  std::string v = get_string(obj, "visibility", where, required);
  if (v.empty() && !required) return Visibility::public_;
  if (v == "public") return Visibility::public_;
  if (v == "private") return Visibility::private_;
  throw MalformedDoc("visibility must be \"public\" or \"private\" in " + where);
}

const json &require_array(const json &obj, const char *key, const std::string &where) {
  const json &v = require(obj, key, where);
  if (!v.is_array()) throw MalformedDoc(std::string("field '") + key + "' must be an array in " + where);
  return v;
}

FunctionDoc parse_function(const json &j, const std::string &where) {
  if (!j.is_object()) throw MalformedDoc("function entry must be an object in " + where);
  FunctionDoc f;
  f.name = get_string(j, "name", where, true);
  f.doc = get_string(j, "doc", where, false);
  f.signature = get_string(j, "signature", where, false);
  return f;
}

std::vector<FunctionDoc> parse_functions(const json &arr, const std::string &where) {
  if (!arr.is_array()) throw MalformedDoc("methods must be an array in " + where);
  std::vector<FunctionDoc> out;
  for (const auto &f : arr) out.push_back(parse_function(f, where));
  return out;
}

ModuleDoc parse_module(const json &j, const std::string &where);

// Splits "Foo<T>" into ("Foo", "<T>").
void split_generics(std::string &name, std::string &generics) {
  auto lt = name.find('<');
  if (lt == std::string::npos) return;
  generics = name.substr(lt) + generics;
  name = util::trim(name.substr(0, lt));
}

ItemDoc parse_item(const json &j, const std::string &where) {
  if (!j.is_object()) throw MalformedDoc("item must be an object in " + where);
  ItemDoc item;
  std::string kind = get_string(j, "kind", where, true);
  item.name = get_string(j, "name", where, true);
  item.generics = get_string(j, "generics", where, false);
  split_generics(item.name, item.generics);
  std::string item_where = where + "::" + item.name;
  item.doc = get_string(j, "doc", item_where, false);
  item.visibility = parse_visibility(j, item_where, true);
  if (kind == "module") {
    item.kind = ItemKind::module;
  } else if (kind == "type") {
    item.kind = ItemKind::type;
  } else if (kind == "trait") {
    item.kind = ItemKind::trait;
  } else if (kind == "function") {
    item.kind = ItemKind::function;
  } else {
    throw MalformedDoc("unknown item kind '" + kind + "' in " + item_where);
  }

  if (auto it = j.find("impl_blocks"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw MalformedDoc("impl_blocks must be an array in " + item_where);
    for (const auto &b : *it) {
      if (!b.is_object()) throw MalformedDoc("impl block must be an object in " + item_where);
      ImplBlockDoc block;
      std::string trait = get_string(b, "trait_name", item_where, false);
      if (!trait.empty()) block.trait_name = trait;
      block.for_type = get_string(b, "for_type", item_where, false);
      if (block.for_type.empty()) block.for_type = item.name;
      std::string g;
      split_generics(block.for_type, g);
      block.methods = parse_functions(require(b, "methods", item_where), item_where);
      item.impl_blocks.push_back(std::move(block));
    }
  }
  if (auto it = j.find("methods"); it != j.end() && !it->is_null()) {
    item.methods = parse_functions(*it, item_where);
  }
  if (auto it = j.find("submodule"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) {
      throw MalformedDoc("dangling submodule reference at " + item_where);
    }
    json sub = *it;
    if (!sub.contains("name")) sub["name"] = item.name;
    if (!sub.contains("visibility")) sub["visibility"] = std::string(to_string(item.visibility));
    item.submodule = std::make_shared<const ModuleDoc>(parse_module(sub, item_where));
  }
  item.signature = get_string(j, "signature", item_where, false);
  return item;
}

ReexportDecl parse_reexport(const json &j, const std::string &where) {
  ReexportDecl re;
  if (j.is_string()) {
    re.path = Path::parse(j.get<std::string>());
    return re;
  }
  if (!j.is_object()) throw MalformedDoc("re-export must be a string or object in " + where);
  re.path = Path::parse(get_string(j, "path", where, true));
  re.visibility = parse_visibility(j, where, false);
  return re;
}

ModuleDoc parse_module(const json &j, const std::string &where) {
  if (!j.is_object()) throw MalformedDoc("module must be an object in " + where);
  ModuleDoc m;
  m.name = get_string(j, "name", where, true);
  std::string mod_where = where.empty() ? m.name : where;
  m.doc = get_string(j, "doc", mod_where, false);
  m.visibility = parse_visibility(j, mod_where, true);
  for (const auto &item : require_array(j, "items", mod_where)) {
    m.items.push_back(parse_item(item, mod_where));
  }
  for (const auto &re : require_array(j, "reexports", mod_where)) {
    m.reexports.push_back(parse_reexport(re, mod_where));
  }
  return m;
}

json parse_json_or_throw(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error &e) {
    throw MalformedDoc(std::string("invalid JSON: ") + e.what());
  }
}

json function_to_json(const FunctionDoc &f) {
  json j = {{"name", f.name}, {"doc", f.doc}};
  if (!f.signature.empty()) j["signature"] = f.signature;
  return j;
}

}  // namespace

void validate_module_tree(const ModuleDoc &root) {
  if (root.visibility != Visibility::public_) {
    throw MalformedDoc("crate root module '" + root.name + "' must be public");
  }
  validate_module(root, root.name);
}

CrateDoc parse_crate_doc_file(std::string_view doc_json) {
  json j = parse_json_or_throw(doc_json);
  if (!j.is_object()) throw MalformedDoc("document must be a JSON object");
  CrateDoc out;
  if (j.contains("root")) {
    const json &version = require(j, "format_version", "document");
    if (!version.is_number_integer() || version.get<int>() != kDocFormatVersion) {
      throw MalformedDoc("unsupported format_version (expected 1)");
    }
    out.crate_name = get_string(j, "crate_name", "document", true);
    json root = j["root"];
    if (!root.is_object()) throw MalformedDoc("root must be an object");
    if (!root.contains("name")) root["name"] = out.crate_name;
    out.root = parse_module(root, "");
    if (out.root.name != out.crate_name) {
      throw MalformedDoc("root module name '" + out.root.name + "' differs from crate_name '" +
                         out.crate_name + "'");
    }
  } else {
    out.root = parse_module(j, "");
    out.crate_name = out.root.name;
  }
  validate_module_tree(out.root);
  return out;
}

ModuleDoc parse_crate_doc(std::string_view doc_json) {
  return parse_crate_doc_file(doc_json).root;
}

json to_json(const ModuleDoc &module) {
  json items = json::array();
  for (const auto &item : module.items) {
    json ji = {{"kind", std::string(to_string(item.kind))},
               {"name", item.name},
               {"doc", item.doc},
               {"visibility", std::string(to_string(item.visibility))}};
    if (!item.generics.empty()) ji["generics"] = item.generics;
    switch (item.kind) {
      case ItemKind::module:
        ji["submodule"] = to_json(*item.submodule);
        break;
      case ItemKind::type: {
        json blocks = json::array();
        for (const auto &b : item.impl_blocks) {
          json jb = {{"trait_name", b.trait_name ? json(*b.trait_name) : json(nullptr)},
                     {"for_type", b.for_type},
                     {"methods", json::array()}};
          for (const auto &f : b.methods) jb["methods"].push_back(function_to_json(f));
          blocks.push_back(std::move(jb));
        }
        ji["impl_blocks"] = std::move(blocks);
        break;
      }
      case ItemKind::trait: {
        json methods = json::array();
        for (const auto &f : item.methods) methods.push_back(function_to_json(f));
        ji["methods"] = std::move(methods);
        break;
      }
      case ItemKind::function:
        if (!item.signature.empty()) ji["signature"] = item.signature;
        break;
    }
    items.push_back(std::move(ji));
  }
  json reexports = json::array();
  for (const auto &re : module.reexports) {
    reexports.push_back(
        {{"path", re.path.str()}, {"visibility", std::string(to_string(re.visibility))}});
  }
  return {{"name", module.name},
          {"doc", module.doc},
          {"visibility", std::string(to_string(module.visibility))},
          {"items", std::move(items)},
          {"reexports", std::move(reexports)}};
}

json crate_doc_to_json(const ModuleDoc &root) {
  return {{"format_version", kDocFormatVersion}, {"crate_name", root.name}, {"root", to_json(root)}};
}

// ---------------------------------------------------------------------------
// Dependency ordering

DependencyGraph parse_dependency_graph(std::string_view json_text) {
  json j = parse_json_or_throw(json_text);
  if (!j.is_object()) throw MalformedDoc("dependency graph must be an object");
  DependencyGraph graph;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_array()) {
      throw MalformedDoc("dependencies of '" + it.key() + "' must be an array");
    }
    auto &deps = graph[it.key()];
    for (const auto &d : it.value()) {
      if (!d.is_string()) throw MalformedDoc("dependency names must be strings");
      deps.push_back(d.get<std::string>());
    }
  }
  return graph;
}

std::vector<std::string> transitive_dependencies(const std::string &crate_name,
                                                 const DependencyGraph &graph) {
  enum class Mark { none, active, done };
  std::map<std::string, Mark> marks;
  std::vector<std::string> order;
  std::vector<std::string> stack;

  std::function<void(const std::string &)> visit = [&](const std::string &node) {
    Mark &mark = marks[node];
    if (mark == Mark::done) return;
    if (mark == Mark::active) {
      std::string cycle;
      auto start = std::find(stack.begin(), stack.end(), node);
      for (auto it = start; it != stack.end(); ++it) cycle += *it + " -> ";
      throw CyclicDependency(cycle + node);
    }
    mark = Mark::active;
    stack.push_back(node);
    std::vector<std::string> deps;
    if (auto it = graph.find(node); it != graph.end()) deps = it->second;
    std::sort(deps.begin(), deps.end());
    deps.erase(std::unique(deps.begin(), deps.end()), deps.end());
    for (const auto &d : deps) visit(d);
    stack.pop_back();
    marks[node] = Mark::done;
    order.push_back(node);
  };
  visit(crate_name);
  return order;
}

}  // namespace xcrate::doc
