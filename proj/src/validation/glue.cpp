#include "xcrate/validation/glue.hpp"

#include <functional>
#include <regex>
#include <set>

#include "xcrate/carrier/compile.hpp"
#include "xcrate/error.hpp"
#include "xcrate/util/text.hpp"
#include "xcrate/validation/rust_items.hpp"

namespace xcrate::validation {

using carrier::GoType;
using carrier::ScalarKind;

std::string AdapterPair::source() const {
  std::string out = support_src;
  if (!out.empty() && out.back() != '\n') out += '\n';
  out += forward_src;
  if (!out.empty() && out.back() != '\n') out += '\n';
  out += backward_src;
  if (!out.empty() && out.back() != '\n') out += '\n';
  return out;
}

std::string go_forward_name(std::string_view t) { return "ToProto" + std::string(t); }
std::string go_backward_name(std::string_view t) { return "FromProto" + std::string(t); }
std::string rust_forward_name(std::string_view t) { return "to_proto_" + carrier::snake_case(t); }
std::string rust_backward_name(std::string_view t) { return "from_proto_" + carrier::snake_case(t); }
std::string rust_type_name(std::string_view t) { return carrier::message_name_for(t); }

std::string combine_go_units(const std::vector<std::string> &units, const std::string &package_name) {
  static const std::regex single(R"re(^\s*import\s+(\w+\s+)?"([^"]+)"\s*$)re");
  std::vector<std::string> imports;
  std::set<std::string> seen;
  std::string body;
  for (const auto &unit : units) {
    std::vector<std::string> lines = util::split(unit, "\n");
    for (std::size_t i = 0; i < lines.size(); ++i) {
      std::string t = util::trim(lines[i]);
      std::smatch m;
      if (t.rfind("package ", 0) == 0) continue;
      if (t == "import (") {
        for (++i; i < lines.size() && util::trim(lines[i]) != ")"; ++i) {
          std::string imp = util::trim(lines[i]);
          if (!imp.empty() && seen.insert(imp).second) imports.push_back(imp);
        }
        continue;
      }
      if (std::regex_match(t, m, single)) {
        std::string imp = util::trim(m[1].str() + "\"" + m[2].str() + "\"");
        if (seen.insert(imp).second) imports.push_back(imp);
        continue;
      }
      body += lines[i] + "\n";
    }
    if (!body.empty() && body.back() != '\n') body += '\n';
  }
  std::string out = "package " + package_name + "\n\n";
  if (!imports.empty()) {
    out += "import (\n";
    for (const auto &imp : imports) out += "\t" + imp + "\n";
    out += ")\n\n";
  }
  return out + body;
}

void AdapterStore::put(const AdapterPair &pair) { pairs_[{pair.side, pair.type}] = pair; }

const AdapterPair *AdapterStore::find(Side side, std::string_view type) const {
  auto it = pairs_.find({side, std::string(type)});
  return it == pairs_.end() ? nullptr : &it->second;
}

void AdapterStore::set_dependencies(const std::string &type, std::vector<std::string> deps) {
  deps_[type] = std::move(deps);
}

std::vector<const AdapterPair *> AdapterStore::closure(Side side, const std::vector<std::string> &types) const {
  std::vector<const AdapterPair *> out;
  std::set<std::string> visited;
  std::function<void(const std::string &)> visit = [&](const std::string &t) {
    if (!visited.insert(t).second) return;
    if (auto it = deps_.find(t); it != deps_.end())
      for (const auto &d : it->second) visit(d);
    if (const AdapterPair *p = find(side, t)) out.push_back(p);
  };
  for (const auto &t : types) visit(t);
  return out;
}

namespace {

const GoType *named_leaf(const GoType &t) {
  const GoType *cur = &t;
  while (cur->kind == GoType::Kind::pointer || cur->kind == GoType::Kind::slice || cur->kind == GoType::Kind::array)
    cur = cur->elem.get();
  return cur->kind == GoType::Kind::named ? cur : nullptr;
}

std::string import_path_for(const std::string &alias, const GlueKnowledge &k) {
  if (auto it = k.package_aliases.find(alias); it != k.package_aliases.end()) return it->second;
  for (const auto &e : k.go_index) {
    std::size_t slash = e.package.rfind('/');
    std::string last = slash == std::string::npos ? e.package : e.package.substr(slash + 1);
    if (last == alias) return e.package;
  }
  return alias;
}

}  // namespace

std::vector<Suggestion> library_suggestions(const carrier::GoTypeDef &def, const GlueKnowledge &knowledge) {
  std::vector<Suggestion> out;
  if (!knowledge.kbs || !knowledge.mapping) return out;
  std::set<std::string> seen;
  for (const auto &f : def.fields) {
    const GoType *leaf = named_leaf(f.type);
    if (!leaf || !leaf->is_qualified()) continue;
    std::string path = import_path_for(leaf->package, knowledge);
    std::string api = leaf->package + "." + leaf->name;
    if (!seen.insert(api).second) continue;
    const std::string &crate = knowledge.mapping->crate_for(path);
    auto kb = knowledge.kbs->find(crate);
    if (kb == knowledge.kbs->end())
      throw MissingKb("crate " + crate + " mapped for " + path + " has no knowledge base");
    kb::ApiQuery q;
    q.source_api = api;
    for (const auto &e : knowledge.go_index)
      if (e.package == path && e.name == leaf->name) q = kb::make_query(e);
    Suggestion s;
    s.source_api = api;
    s.results = kb->second.query(q, knowledge.top_n).results;
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

std::string render_message(const carrier::CarrierSchema &s) {
  std::string out = "message " + s.message_name + " {\n";
  for (const auto &f : s.fields) {
    std::string label = f.type.repeated ? "repeated " : (f.optional ? "optional " : "");
    out += "  " + label + (f.type.is_message() ? f.type.message : std::string(carrier::to_string(f.type.kind))) +
           " " + f.name + " = " + std::to_string(f.number) + ";  // " + f.source_name + " " + f.source_type + "\n";
  }
  return out + "}\n";
}

std::string carrier_type(const GlueRequest &r) { return "Proto" + r.go_type.name; }

std::string required_signatures(const GlueRequest &r) {
  const std::string &t = r.go_type.name;
  if (r.side == Side::source_side)
    return "func " + go_forward_name(t) + "(v " + t + ") (*" + carrier_type(r) + ", error)\nfunc " +
           go_backward_name(t) + "(p *" + carrier_type(r) + ") (" + t + ", error)\n";
  std::string rt = rust_type_name(t);
  return "pub fn " + rust_forward_name(t) + "(v: &" + rt + ") -> Result<carrier::" + carrier_type(r) +
         ", String>\npub fn " + rust_backward_name(t) + "(p: &carrier::" + carrier_type(r) + ") -> Result<" + rt +
         ", String>\n";
}

}  // namespace

std::string glue_prompt(const GlueRequest &request, const std::vector<Suggestion> &suggestions,
                        const AdapterStore &store) {
  bool src = request.side == Side::source_side;
  std::string out = src ? "Write Go adapters between a Go type and its protobuf carrier struct.\n"
                        : "Write Rust adapters between a translated Rust type and its protobuf carrier struct.\n";
  out += "Attempt " + std::to_string(request.attempt) + ".\n\n";
  out += "Go type:\n" + request.go_type.source_text + "\n\n";
  if (!request.target_type_def.empty()) out += "Rust type:\n" + request.target_type_def + "\n\n";
  out += "Carrier schema:\n" + render_message(request.schema) + "\n";
  if (!request.carrier_def.empty()) out += "Carrier definition:\n" + request.carrier_def + "\n\n";
  out += "Required functions:\n" + required_signatures(request) + "\n";

  std::vector<std::string> nested;
  for (const auto &f : request.go_type.fields) {
    const GoType *leaf = named_leaf(f.type);
    if (leaf && !leaf->is_qualified())
      if (const AdapterPair *p = store.find(request.side, leaf->name))
        nested.push_back(p->forward_name + " / " + p->backward_name);
  }
  if (!nested.empty()) out += "Validated adapters you can call:\n- " + util::join(nested, "\n- ") + "\n\n";

  if (!suggestions.empty()) {
    out += "Library APIs in the target crates:\n";
    for (const auto &s : suggestions) {
      out += "For " + s.source_api + ":\n";
      for (const auto &r : s.results) {
        std::string path = r.entry.import_paths.empty() ? r.entry.api_id : r.entry.import_paths.front().str();
        out += "- " + r.entry.api_id + " (use " + path + ")";
        if (!r.entry.signature.empty()) out += ": " + r.entry.signature;
        out += "\n";
      }
    }
    out += "\n";
  }
  if (!request.feedback.empty()) out += "The previous attempt failed:\n" + request.feedback + "\n\n";
  out += std::string("Answer with a single ```") + (src ? "go" : "rust") + " code block containing both functions.";
  return out;
}

namespace {

// Go carrier field type of a scalar kind.
std::string go_carrier_scalar(ScalarKind k) {
  switch (k) {
    case ScalarKind::double_: return "float64";
    case ScalarKind::float_: return "float32";
    case ScalarKind::int32: return "int32";
    case ScalarKind::int64: return "int64";
    case ScalarKind::uint32: return "uint32";
    case ScalarKind::uint64: return "uint64";
    case ScalarKind::bool_: return "bool";
    case ScalarKind::string: return "string";
    default: return "[]byte";
  }
}

std::string convert(const std::string &to, const std::string &from, const std::string &expr) {
  return to == from ? expr : to + "(" + expr + ")";
}

bool is_byte_name(const GoType &t) {
  return t.kind == GoType::Kind::named && t.package.empty() && (t.name == "byte" || t.name == "uint8");
}

// Go adapters, or nullopt when a field needs library knowledge.
std::optional<AdapterPair> derive_go(const GlueRequest &r, const AdapterStore &store) {
  const std::string &t = r.go_type.name;
  std::string fwd = "func " + go_forward_name(t) + "(v " + t + ") (*" + carrier_type(r) + ", error) {\n\tproto := &" +
                    carrier_type(r) + "{}\n";
  std::string bwd = "func " + go_backward_name(t) + "(p *" + carrier_type(r) + ") (" + t + ", error) {\n\tvar out " + t +
                    "\n\tif p == nil {\n\t\treturn out, nil\n\t}\n";
  for (const auto &f : r.schema.fields) {
    const carrier::GoField *gf = nullptr;
    for (const auto &x : r.go_type.fields)
      if (x.name == f.source_name) gf = &x;
    if (!gf || gf->embedded) return std::nullopt;
    const GoType &gt = gf->type;
    std::string pf = "proto." + carrier::pascal_from_snake(f.name);
    std::string bf = "p." + carrier::pascal_from_snake(f.name);
    std::string vf = "v." + gf->name;
    std::string of = "out." + gf->name;
    std::string ck = f.type.is_message() ? "" : go_carrier_scalar(f.type.kind);

    if (f.type.kind == ScalarKind::bytes && !f.type.repeated) {
      if (gt.kind == GoType::Kind::slice && is_byte_name(*gt.elem)) {
        fwd += "\t" + pf + " = " + vf + "\n";
        bwd += "\t" + of + " = " + bf + "\n";
      } else if (gt.kind == GoType::Kind::array && is_byte_name(*gt.elem)) {
        fwd += "\t" + pf + " = " + vf + "[:]\n";
        bwd += "\tif len(" + bf + ") != " + gt.length + " {\n\t\treturn out, fmt.Errorf(\"field " + gf->name +
               ": want " + gt.length + " bytes, got %d\", len(" + bf + "))\n\t}\n";
        bwd += "\tcopy(" + of + "[:], " + bf + ")\n";
      } else {
        return std::nullopt;
      }
      continue;
    }
    if (f.type.repeated) {
      if (gt.kind != GoType::Kind::slice || gt.elem->kind != GoType::Kind::named || gt.elem->is_qualified())
        return std::nullopt;
      const GoType &elem = *gt.elem;
      if (f.type.is_message()) {
        if (!store.find(Side::source_side, elem.name)) return std::nullopt;
        fwd += "\tfor _, x := range " + vf + " {\n\t\tm, err := " + go_forward_name(elem.name) +
               "(x)\n\t\tif err != nil {\n\t\t\treturn nil, err\n\t\t}\n\t\t" + pf + " = append(" + pf + ", m)\n\t}\n";
        bwd += "\tfor _, x := range " + bf + " {\n\t\tu, err := " + go_backward_name(elem.name) +
               "(x)\n\t\tif err != nil {\n\t\t\treturn out, err\n\t\t}\n\t\t" + of + " = append(" + of + ", u)\n\t}\n";
      } else {
        if (!carrier::is_go_builtin(elem.name)) return std::nullopt;
        fwd += "\tfor _, x := range " + vf + " {\n\t\t" + pf + " = append(" + pf + ", " + convert(ck, elem.name, "x") +
               ")\n\t}\n";
        bwd += "\tfor _, x := range " + bf + " {\n\t\t" + of + " = append(" + of + ", " + convert(elem.name, ck, "x") +
               ")\n\t}\n";
      }
      continue;
    }
    bool pointer = gt.kind == GoType::Kind::pointer;
    const GoType &base = pointer ? *gt.elem : gt;
    if (base.kind != GoType::Kind::named || base.is_qualified()) return std::nullopt;
    if (f.type.is_message()) {
      if (!store.find(Side::source_side, base.name)) return std::nullopt;
      std::string arg = pointer ? "*" + vf : vf;
      std::string guard_open = pointer ? "\tif " + vf + " != nil {\n" : "\t{\n";
      fwd += guard_open + "\t\tm, err := " + go_forward_name(base.name) + "(" + arg +
             ")\n\t\tif err != nil {\n\t\t\treturn nil, err\n\t\t}\n\t\t" + pf + " = m\n\t}\n";
      bwd += "\tif " + bf + " != nil {\n\t\tu, err := " + go_backward_name(base.name) + "(" + bf +
             ")\n\t\tif err != nil {\n\t\t\treturn out, err\n\t\t}\n\t\t" + of + " = " + (pointer ? "&u" : "u") +
             "\n\t}\n";
      continue;
    }
    if (!carrier::is_go_builtin(base.name)) return std::nullopt;
    if (pointer) {
      fwd += "\tif " + vf + " != nil {\n\t\tx := " + convert(ck, base.name, "*" + vf) + "\n\t\t" + pf + " = &x\n\t}\n";
      bwd += "\tif " + bf + " != nil {\n\t\tx := " + convert(base.name, ck, "*" + bf) + "\n\t\t" + of + " = &x\n\t}\n";
    } else {
      fwd += "\t" + pf + " = " + convert(ck, base.name, vf) + "\n";
      bwd += "\t" + of + " = " + convert(base.name, ck, bf) + "\n";
    }
  }
  fwd += "\treturn proto, nil\n}\n";
  bwd += "\treturn out, nil\n}\n";
  AdapterPair pair;
  pair.side = Side::source_side;
  pair.type = t;
  pair.forward_name = go_forward_name(t);
  pair.backward_name = go_backward_name(t);
  pair.forward_src = fwd;
  pair.backward_src = bwd;
  if (bwd.find("fmt.Errorf") != std::string::npos) pair.support_src = "import \"fmt\"\n";
  pair.derived = true;
  return pair;
}

bool is_rust_numeric(const std::string &t) {
  static const std::set<std::string> kinds = {"i8",  "i16", "i32",   "i64",   "u8",  "u16",
                                              "u32", "u64", "usize", "isize", "f32", "f64"};
  return kinds.count(t) > 0;
}

std::optional<std::string> generic_arg(const std::string &t, const std::string &outer) {
  std::string prefix = outer + "<";
  if (t.rfind(prefix, 0) != 0 || t.back() != '>') return std::nullopt;
  return util::trim(t.substr(prefix.size(), t.size() - prefix.size() - 1));
}

std::optional<std::string> byte_array_len(const std::string &t) {
  static const std::regex re(R"(^\[\s*u8\s*;\s*(\d+)\s*\]$)");
  std::smatch m;
  if (std::regex_match(t, m, re)) return m[1].str();
  return std::nullopt;
}

// Rust adapters, or nullopt when the translated struct does not line up
// field by field with the carrier.
std::optional<AdapterPair> derive_rust(const GlueRequest &r, const carrier::SchemaRegistry &registry,
                                       const AdapterStore &store) {
  const std::string &t = r.go_type.name;
  std::string rt = rust_type_name(t);
  auto st = find_rust_struct(r.target_type_def, rt);
  if (!st) return std::nullopt;
  auto rust_field_type = [&](const std::string &name) -> std::optional<std::string> {
    for (const auto &f : st->fields)
      if (f.name == name) return util::collapse_whitespace(f.type);
    return std::nullopt;
  };
  auto user_type_for = [&](const std::string &message) -> std::optional<std::string> {
    for (const auto &[src, msg] : registry.bindings())
      if (msg == message && store.find(Side::target_side, src)) return src;
    return std::nullopt;
  };
  if (st->fields.size() != r.schema.fields.size()) return std::nullopt;

  std::string cty = "carrier::" + carrier_type(r);
  std::string fwd = "pub fn " + rust_forward_name(t) + "(v: &" + rt + ") -> Result<" + cty + ", String> {\n";
  fwd += "    let mut p = " + cty + "::default();\n";
  std::vector<std::string> inits;
  std::string pre;
  for (const auto &f : r.schema.fields) {
    std::string name = carrier::rust_field_name(f.name);
    auto ft = rust_field_type(name);
    if (!ft) return std::nullopt;
    std::string vf = "v." + name, pf = "p." + name;
    std::string ck = f.type.is_message() ? "" : [&] {
      switch (f.type.kind) {
        case ScalarKind::double_: return std::string("f64");
        case ScalarKind::float_: return std::string("f32");
        case ScalarKind::int32: return std::string("i32");
        case ScalarKind::int64: return std::string("i64");
        case ScalarKind::uint32: return std::string("u32");
        case ScalarKind::uint64: return std::string("u64");
        case ScalarKind::bool_: return std::string("bool");
        case ScalarKind::string: return std::string("String");
        default: return std::string("Vec<u8>");
      }
    }();

    if (f.type.is_message()) {
      auto src = user_type_for(f.type.message);
      if (!src) return std::nullopt;
      std::string ut = rust_type_name(*src);
      std::string to = rust_forward_name(*src), from = rust_backward_name(*src);
      if (f.type.repeated) {
        if (generic_arg(*ft, "Vec") != ut) return std::nullopt;
        fwd += "    " + pf + " = " + vf + ".iter().map(" + to + ").collect::<Result<Vec<_>, String>>()?;\n";
        inits.push_back(name + ": " + pf + ".iter().map(" + from + ").collect::<Result<Vec<_>, String>>()?");
      } else if (generic_arg(*ft, "Option") == ut) {
        fwd += "    " + pf + " = match &" + vf + " {\n        Some(x) => Some(" + to +
               "(x)?),\n        None => None,\n    };\n";
        inits.push_back(name + ": match &" + pf + " {\n            Some(x) => Some(" + from +
                        "(x)?),\n            None => None,\n        }");
      } else if (*ft == ut) {
        fwd += "    " + pf + " = Some(" + to + "(&" + vf + ")?);\n";
        inits.push_back(name + ": " + from + "(" + pf + ".as_ref().ok_or_else(|| \"field " + f.name +
                        " is missing\".to_string())?)?");
      } else {
        return std::nullopt;
      }
      continue;
    }
    if (f.type.kind == ScalarKind::bytes && !f.type.repeated) {
      if (*ft == "Vec<u8>") {
        fwd += "    " + pf + " = " + vf + ".clone();\n";
        inits.push_back(name + ": " + pf + ".clone()");
      } else if (auto n = byte_array_len(*ft)) {
        fwd += "    " + pf + " = " + vf + ".to_vec();\n";
        inits.push_back(name + ": " + pf + ".as_slice().try_into().map_err(|_| format!(\"field " + f.name +
                        ": want " + *n + " bytes, got {}\", " + pf + ".len()))?");
      } else if (f.optional && *ft == "Option<Vec<u8>>") {
        fwd += "    " + pf + " = " + vf + ".clone();\n";
        inits.push_back(name + ": " + pf + ".clone()");
      } else {
        return std::nullopt;
      }
      continue;
    }
    auto cast = [&](const std::string &expr, const std::string &to) {
      if (ck == "String" || ck == "bool") return expr + ".clone()";
      return "(" + expr + " as " + to + ")";
    };
    if (f.type.repeated) {
      auto elem = generic_arg(*ft, "Vec");
      if (!elem) return std::nullopt;
      if (ck == "String" || ck == "bool") {
        if (*elem != ck) return std::nullopt;
        fwd += "    " + pf + " = " + vf + ".clone();\n";
        inits.push_back(name + ": " + pf + ".clone()");
      } else {
        if (!is_rust_numeric(*elem)) return std::nullopt;
        fwd += "    " + pf + " = " + vf + ".iter().map(|x| *x as " + ck + ").collect();\n";
        inits.push_back(name + ": " + pf + ".iter().map(|x| *x as " + *elem + ").collect()");
      }
      continue;
    }
    std::string scalar = *ft;
    bool optional = false;
    if (auto inner = generic_arg(*ft, "Option")) {
      scalar = *inner;
      optional = true;
    }
    if (optional != f.optional) return std::nullopt;
    bool ok = (ck == "String" || ck == "bool") ? scalar == ck : is_rust_numeric(scalar);
    if (!ok) return std::nullopt;
    if (optional) {
      fwd += "    " + pf + " = " + vf + ".as_ref().map(|x| " + cast("(*x)", ck) + ");\n";
      inits.push_back(name + ": " + pf + ".as_ref().map(|x| " + cast("(*x)", scalar) + ")");
    } else {
      fwd += "    " + pf + " = " + cast(vf, ck) + ";\n";
      inits.push_back(name + ": " + cast(pf, scalar));
    }
  }
  fwd += "    Ok(p)\n}\n";
  std::string bwd = "pub fn " + rust_backward_name(t) + "(p: &" + cty + ") -> Result<" + rt + ", String> {\n" + pre;
  if (inits.empty()) {
    bwd += "    let _ = p;\n    Ok(" + rt + " {})\n}\n";
  } else {
    bwd += "    Ok(" + rt + " {\n        " + util::join(inits, ",\n        ") + ",\n    })\n}\n";
  }
  AdapterPair pair;
  pair.side = Side::target_side;
  pair.type = t;
  pair.forward_name = rust_forward_name(t);
  pair.backward_name = rust_backward_name(t);
  pair.forward_src = fwd;
  pair.backward_src = bwd;
  if (bwd.find("try_into") != std::string::npos) pair.support_src = "use std::convert::TryInto;\n";
  pair.derived = true;
  return pair;
}

// Byte range of the item starting at `pos`: through its matching closing
// brace. String and rune literals are skipped.
std::size_t item_end(const std::string &code, std::size_t pos) {
  std::size_t open = code.find('{', pos);
  if (open == std::string::npos) return std::string::npos;
  int depth = 0;
  for (std::size_t i = open; i < code.size(); ++i) {
    char c = code[i];
    if (c == '"' || c == '`') {
      char q = c;
      for (++i; i < code.size() && code[i] != q; ++i)
        if (code[i] == '\\' && q == '"') ++i;
      continue;
    }
    if (c == '/' && i + 1 < code.size() && code[i + 1] == '/') {
      i = code.find('\n', i);
      if (i == std::string::npos) return std::string::npos;
      continue;
    }
    if (c == '{') ++depth;
    if (c == '}' && --depth == 0) {
      std::size_t end = i + 1;
      if (end < code.size() && code[end] == '\n') ++end;
      return end;
    }
  }
  return std::string::npos;
}

std::optional<std::pair<std::size_t, std::size_t>> find_item(const std::string &code, Side side,
                                                              const std::string &name) {
  std::regex re = side == Side::source_side ? std::regex("(^|\\n)func\\s+" + name + "\\s*\\(")
                                            : std::regex("(^|\\n)\\s*(pub(\\([a-z]+\\))?\\s+)?fn\\s+" + name + "\\s*[(<]");
  std::smatch m;
  if (!std::regex_search(code, m, re)) return std::nullopt;
  std::size_t start = static_cast<std::size_t>(m.position(0)) + m[1].length();
  std::size_t end = item_end(code, start);
  if (end == std::string::npos) return std::nullopt;
  return std::make_pair(start, end);
}

}  // namespace

std::optional<AdapterPair> derive_glue(const GlueRequest &request, const carrier::SchemaRegistry &registry,
                                       const AdapterStore &store) {
  return request.side == Side::source_side ? derive_go(request, store) : derive_rust(request, registry, store);
}

AdapterPair gen_glue(const GlueRequest &request, const GlueKnowledge &knowledge, const AdapterStore &store,
                     llm::LlmGateway &gateway) {
  std::vector<Suggestion> suggestions;
  if (request.side == Side::target_side) suggestions = library_suggestions(request.go_type, knowledge);
  std::string response = gateway.complete(glue_prompt(request, suggestions, store));
  bool src = request.side == Side::source_side;
  std::string code = extract_code_block(response, src ? "go" : "rust");

  AdapterPair pair;
  pair.side = request.side;
  pair.type = request.go_type.name;
  pair.forward_name = src ? go_forward_name(pair.type) : rust_forward_name(pair.type);
  pair.backward_name = src ? go_backward_name(pair.type) : rust_backward_name(pair.type);
  auto fwd = find_item(code, request.side, pair.forward_name);
  auto bwd = find_item(code, request.side, pair.backward_name);
  if (!fwd || !bwd)
    throw GenerationFailed("glue reply for " + pair.type + " lacks " + (!fwd ? pair.forward_name : pair.backward_name));
  pair.forward_src = code.substr(fwd->first, fwd->second - fwd->first);
  pair.backward_src = code.substr(bwd->first, bwd->second - bwd->first);
  auto [a, b] = std::minmax(*fwd, *bwd);
  std::string support = code.substr(0, a.first) + code.substr(a.second, b.first - a.second) + code.substr(b.second);
  std::string kept;
  for (const auto &line : util::split(support, "\n")) {
    std::string t = util::trim(line);
    if (t.rfind("package ", 0) == 0) continue;
    kept += line + "\n";
  }
  pair.support_src = util::trim(kept).empty() ? "" : util::trim(kept) + "\n";
  for (const auto &s : suggestions)
    for (const auto &r : s.results) {
      std::string last = r.entry.api_id.substr(r.entry.api_id.rfind(':') == std::string::npos
                                                   ? 0
                                                   : r.entry.api_id.rfind(':') + 1);
      if (code.find(last) != std::string::npos) pair.kb_hits_used.push_back(r.entry.api_id);
    }
  return pair;
}

}  // namespace xcrate::validation
