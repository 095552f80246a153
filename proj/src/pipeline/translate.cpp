#include "xcrate/pipeline/translate.hpp"

#include <set>

#include "xcrate/error.hpp"
#include "xcrate/util/text.hpp"
#include "xcrate/validation/rust_items.hpp"

namespace xcrate::pipeline {

using carrier::GoType;

std::string_view to_string(UnitKind k) { return k == UnitKind::type_def ? "type_def" : "function"; }

namespace {

using Ref = std::pair<std::string, std::string>;  // import path, member name

void qualified_refs(const GoType &t, const GoSourceFile &src, std::set<Ref> &out) {
  if (t.elem) qualified_refs(*t.elem, src, out);
  if (t.key) qualified_refs(*t.key, src, out);
  if (t.is_qualified())
    if (auto it = src.imports.find(t.package); it != src.imports.end()) out.insert({it->second, t.name});
}

std::vector<go::GoApiEntry> select(const std::set<Ref> &refs, const std::set<std::string> &called,
                                   const std::vector<go::GoApiEntry> &go_index) {
  std::vector<go::GoApiEntry> out;
  std::set<Ref> seen;
  for (const auto &e : go_index) {
    bool hit = refs.count({e.package, e.name}) > 0;
    if (!hit) {
      std::size_t dot = e.name.find('.');
      if (dot != std::string::npos)
        hit = refs.count({e.package, e.name.substr(0, dot)}) && called.count(e.name.substr(dot + 1));
    }
    if (hit && seen.insert({e.package, e.name}).second) out.push_back(e);
  }
  return out;
}

}  // namespace

std::vector<go::GoApiEntry> apis_used(const GoFunctionDecl &fn, const GoSourceFile &src,
                                      const std::vector<go::GoApiEntry> &go_index) {
  std::set<Ref> refs;
  for (const auto &r : fn.package_refs) {
    std::size_t dot = r.rfind('.');
    refs.insert({r.substr(0, dot), r.substr(dot + 1)});
  }
  if (fn.fn.receiver) qualified_refs(fn.fn.receiver->type, src, refs);
  for (const auto &p : fn.fn.params) qualified_refs(p.type, src, refs);
  for (const auto &r : fn.fn.results) qualified_refs(r, src, refs);
  return select(refs, fn.called, go_index);
}

std::vector<go::GoApiEntry> apis_used(const carrier::GoTypeDef &type, const GoSourceFile &src,
                                      const std::vector<go::GoApiEntry> &go_index) {
  std::set<Ref> refs;
  for (const auto &f : type.fields) qualified_refs(f.type, src, refs);
  return select(refs, {}, go_index);
}

RagContext build_rag_context(const TranslationUnit &unit, const mapping::CrateMapping &mapping,
                             const std::map<std::string, kb::KnowledgeBase> &kbs, int n) {
  RagContext ctx;
  for (const auto &api : unit.go_apis_used) {
    const std::string &crate = mapping.crate_for(api.package);
    auto it = kbs.find(crate);
    if (it == kbs.end()) throw MissingKb("no knowledge base for crate " + crate + " (mapped from " + api.package + ")");
    SourceApiContext c;
    c.source_api = api.qualified_name();
    c.crate = crate;
    for (const auto &r : it->second.query(kb::make_query(api), n).results) {
      ApiSuggestion s;
      s.api_id = r.entry.api_id;
      for (const auto &p : r.entry.import_paths) s.import_paths.push_back(p.str());
      s.signature = r.entry.signature;
      s.doc = r.entry.doc;
      c.suggestions.push_back(std::move(s));
    }
    ctx.apis.push_back(std::move(c));
  }
  return ctx;
}

std::string translation_prompt(const TranslationUnit &unit, const RagContext &context, const PromptOptions &options) {
  bool is_type = unit.kind == UnitKind::type_def;
  std::string out = std::string("Translate the following Go ") + (is_type ? "type definition" : "function") +
                    " into Rust. Translate only this item; make it and its fields public. Methods go in an `impl` "
                    "block of the translated receiver type and take `&self`. Function names are snake_case.\n\n";
  out += "Go source:\n```go\n" + util::trim(unit.source_text) + "\n```\n\n";
  if (!util::trim(unit.dependency_summary).empty())
    out += "Already translated and in scope (do not repeat them):\n```rust\n" + util::trim(unit.dependency_summary) +
           "\n```\n\n";
  if (!context.empty()) {
    for (const auto &api : context.apis) {
      out += "You are advised to use the following APIs from the crate " + api.crate + " in place of `" +
             api.source_api + "`:\n";
      for (const auto &s : api.suggestions) {
        out += "- " + s.api_id + "\n";
        if (options.with_imports && !s.import_paths.empty()) {
          out += "  imports:";
          for (const auto &p : s.import_paths) out += " `use " + p + ";`";
          out += "\n";
        }
        if (!s.signature.empty()) out += "  signature: " + util::collapse_whitespace(s.signature) + "\n";
        if (!s.doc.empty()) out += "  docs: " + util::collapse_whitespace(s.doc) + "\n";
      }
      out += "\n";
    }
  }
  out += "Answer with a single ```rust code block.";
  return out;
}

std::string translate_unit(const TranslationUnit &unit, const RagContext &context, llm::LlmGateway &gateway,
                           const PromptOptions &options) {
  std::string reply = gateway.complete(translation_prompt(unit, context, options));
  std::string code = util::trim(validation::extract_code_block(reply, "rust"));
  if (code.empty()) throw GenerationFailed("empty translation for " + unit.item_id);
  return code;
}

std::vector<std::string> invalid_imports(const std::string &rust_source,
                                         const std::map<std::string, index::ApiIndex> &indexes) {
  std::vector<std::string> bad;
  for (std::string use : validation::split_uses(rust_source).uses) {
    if (auto as = use.find(" as "); as != std::string::npos) use = use.substr(0, as);
    use = util::trim(use);
    if (use.empty() || use.back() == '*' || use.find("::") == std::string::npos) continue;
    doc::Path path;
    try {
      path = doc::Path::parse(use);
    } catch (const Error &) {
      bad.push_back(use);
      continue;
    }
    auto it = indexes.find(path.front());
    if (it == indexes.end()) continue;
    if (path.back() == "self") continue;
    if (!it->second.has_import_path(path)) bad.push_back(use);
  }
  return bad;
}

}  // namespace xcrate::pipeline
