#include "xcrate/pipeline/run.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include "xcrate/api_index.hpp"
#include "xcrate/crate_mapper.hpp"
#include "xcrate/doc_model.hpp"
#include "xcrate/error.hpp"
#include "xcrate/go_api.hpp"
#include "xcrate/util/json_file.hpp"
#include "xcrate/util/subprocess.hpp"
#include "xcrate/util/text.hpp"
#include "xcrate/validation/rust_items.hpp"
#include "xcrate/validation/tupling.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace xcrate::pipeline {

using carrier::GoType;
using carrier::GoTypeDef;
using validation::CheckStatus;
using validation::FunctionReport;

namespace {

void named_types(const GoType &t, std::set<std::string> &out) {
  if (t.elem) named_types(*t.elem, out);
  if (t.key) named_types(*t.key, out);
  if (t.kind == GoType::Kind::named && t.package.empty()) out.insert(t.name);
}

bool unsupported_type(const GoType &t) {
  using K = GoType::Kind;
  if (t.kind == K::chan || t.kind == K::func || t.kind == K::map || t.kind == K::interface_) return true;
  return (t.elem && unsupported_type(*t.elem)) || (t.key && unsupported_type(*t.key));
}

std::optional<std::string> unsupported_reason(const GoFunctionDecl &fn) {
  static const std::regex goroutine(R"((^|[;{}\s])go\s+[A-Za-z_(])");
  static const std::regex channel(R"(\bchan\b|<-|\bselect\s*\{)");
  if (std::regex_search(fn.body, goroutine)) return "uses goroutines";
  if (std::regex_search(fn.body, channel)) return "uses channels";
  for (const auto &ref : fn.package_refs) {
    std::string pkg = ref.substr(0, ref.rfind('.'));
    if (pkg == "os" || pkg == "io" || pkg.rfind("os/", 0) == 0 || pkg.rfind("io/", 0) == 0 ||
        pkg.rfind("net", 0) == 0)
      return "uses " + pkg;
  }
  auto check = [](const GoType &t) { return unsupported_type(t); };
  if (fn.fn.receiver && check(fn.fn.receiver->type)) return "unsupported receiver type";
  for (const auto &p : fn.fn.params)
    if (check(p.type)) return "unsupported parameter type";
  for (const auto &r : fn.fn.results)
    if (check(r)) return "unsupported result type";
  return std::nullopt;
}

std::optional<std::string> unsupported_reason(const GoTypeDef &def) {
  for (const auto &f : def.fields)
    if (unsupported_type(f.type)) return "field " + f.name + " has an unsupported type";
  return std::nullopt;
}

/// User types a type definition depends on, transitively, in `order`.
std::vector<std::string> type_closure(const std::set<std::string> &roots, const GoSourceFile &src,
                                      const std::vector<std::string> &order) {
  std::set<std::string> seen;
  std::vector<std::string> stack(roots.begin(), roots.end());
  while (!stack.empty()) {
    std::string name = stack.back();
    stack.pop_back();
    const GoTypeDef *def = src.type(name);
    if (!def || !seen.insert(name).second) continue;
    std::set<std::string> deps;
    for (const auto &f : def->fields) named_types(f.type, deps);
    for (const auto &d : deps) stack.push_back(d);
  }
  std::vector<std::string> out;
  for (const auto &t : order)
    if (seen.count(t)) out.push_back(t);
  return out;
}

std::set<std::string> function_types(const GoFunctionDecl &fn, const GoSourceFile &src) {
  std::set<std::string> out;
  if (fn.fn.receiver) named_types(fn.fn.receiver->type, out);
  for (const auto &p : fn.fn.params) named_types(p.type, out);
  for (const auto &r : fn.fn.results) named_types(r, out);
  for (const auto &t : src.types) {
    std::regex word("\\b" + t.name + "\\b");
    if (std::regex_search(fn.body, word)) out.insert(t.name);
  }
  std::set<std::string> user;
  for (const auto &n : out)
    if (src.type(n)) user.insert(n);
  return user;
}

/// Program functions called directly by `fn`.
std::vector<std::string> callees(const GoFunctionDecl &fn, const GoSourceFile &src) {
  std::vector<std::string> out;
  std::set<std::string> types = function_types(fn, src);
  for (const auto &other : src.functions) {
    std::string id = other.fn.id();
    if (id == fn.fn.id() || !fn.called.count(other.fn.name)) continue;
    if (other.fn.receiver) {
      std::set<std::string> recv;
      named_types(other.fn.receiver->type, recv);
      bool related = std::any_of(recv.begin(), recv.end(), [&](const auto &r) { return types.count(r) > 0; });
      if (!related) continue;
    }
    out.push_back(id);
  }
  return out;
}

std::string rust_fn_name(const carrier::GoFunction &fn) { return carrier::snake_case(fn.name); }

std::optional<validation::RustFnSig> locate_fn(const std::string &code, const carrier::GoFunction &fn) {
  if (auto sig = validation::find_rust_fn(code, rust_fn_name(fn))) return sig;
  auto all = validation::list_rust_fns(code);
  if (all.size() == 1) return all.front();
  return std::nullopt;
}

bool is_hard(const Error &e) {
  return dynamic_cast<const ReplayMiss *>(&e) || dynamic_cast<const CompilerUnavailable *>(&e) ||
         dynamic_cast<const MissingKb *>(&e) || dynamic_cast<const HarnessError *>(&e);
}

std::string first_line(const std::string &s) {
  std::string t = util::trim(s);
  auto nl = t.find('\n');
  return nl == std::string::npos ? t : t.substr(0, nl);
}

std::string fmt_rate(const std::optional<double> &r) {
  if (!r) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", *r);
  return buf;
}

struct Shared {
  const ProjectConfig *cfg = nullptr;
  const RunOptions *opts = nullptr;
  const GoSourceFile *src = nullptr;
  validation::ExternalToolchain *go = nullptr;
  validation::RustToolchain *rust = nullptr;
  const validation::GlueKnowledge *knowledge = nullptr;
  const validation::CaptureSet *captures = nullptr;
  fs::path work;
  carrier::SchemaRegistry registry;  // after the types
  validation::AdapterStore adapters;
  std::vector<GoTypeDef> go_types;
  std::vector<std::string> type_items;          // validated type translations, in order
  std::set<std::string> valid_types;
  std::map<std::string, std::string> type_failure;  // type -> reason
};

struct FunctionWork {
  const GoFunctionDecl *decl = nullptr;
  const UnitOutcome *unit = nullptr;
  std::vector<std::string> callee_items;
  std::vector<std::string> types;  // user types the signature needs
};

struct FunctionResult {
  FunctionReport report;
  std::optional<std::string> new_translation;
  std::vector<std::string> hard_errors;
};

void add(validation::InteropAttempts &a, const validation::InteropAttempts &b) {
  a.schema += b.schema;
  a.source_glue += b.source_glue;
  a.target_glue += b.target_glue;
}

FunctionResult validate_function(const FunctionWork &w, const Shared &sh) {
  FunctionResult out;
  FunctionReport &r = out.report;
  const carrier::GoFunction &gofn = w.decl->fn;
  r.function_id = gofn.id();
  r.uses_external_apis = !w.unit->apis.empty();
  r.compiled = w.unit->compiled;
  if (!r.compiled) {
    r.note = "translation does not compile";
    return out;
  }
  for (const auto &t : w.types) {
    if (!sh.valid_types.count(t)) {
      auto it = sh.type_failure.find(t);
      r.note = "type " + t + " is not interoperable" + (it != sh.type_failure.end() ? ": " + it->second : "");
      return out;
    }
  }
  const validation::CaptureManifest *capture = sh.captures->function(r.function_id);
  if (!capture || capture->inputs.values.empty()) {
    r.note = "no observed calls";
    return out;
  }
  const std::string &code = w.unit->translation;
  auto sig = locate_fn(code, gofn);
  if (!sig) {
    r.note = "translation lacks fn " + rust_fn_name(gofn);
    return out;
  }

  validation::TargetTuples tt;
  try {
    tt = validation::tuple_rust_function(gofn, *sig);
  } catch (const SignatureMismatch &e) {
    r.note = e.what();
    return out;
  }
  validation::GoTuples gt = validation::tuple_go_function(gofn);

  carrier::SchemaRegistry registry = sh.registry;
  validation::AdapterStore adapters = sh.adapters;
  validation::InteropEnv env;
  env.registry = &registry;
  env.adapters = &adapters;
  env.source = sh.go;
  env.target = sh.rust;
  env.gateway = sh.opts->gateway.get();
  env.knowledge = sh.knowledge;
  env.protoc.protoc = sh.opts->protoc;
  env.work_dir = sh.work / "interop";
  env.go_types = sh.go_types;
  env.target_items = sh.type_items;
  for (const auto &c : w.callee_items) env.target_items.push_back(c);
  env.target_items.push_back(code);

  const validation::Budget &budget = sh.opts->budget;
  std::size_t cap = sh.cfg->max_values;
  struct Phase {
    const GoTypeDef *def;
    std::string target_type, target_def;
    validation::ObservedValues values;
  } phases[] = {{&gt.input, tt.call.input_struct, tt.input_def, capture->inputs.capped(cap)},
                {&gt.output, tt.call.output_struct, tt.output_def, capture->outputs.capped(cap)}};
  bool go_ok = true, full_ok = true;
  for (auto &ph : phases) {
    validation::TypeUnderTest tut{*ph.def, ph.target_type, ph.target_def, ph.values};
    tut.values.type_id = ph.def->name;
    validation::InteropTrace trace;
    try {
      validation::establish_interop(tut, env, budget, &trace);
      add(r.attempts, trace.attempts);
    } catch (const BudgetExhausted &e) {
      add(r.attempts, trace.attempts);
      go_ok = go_ok && trace.go_roundtrip.passed;
      full_ok = false;
      r.note = std::string(ph.def->name) + ": " + first_line(e.what());
      r.counterexample = trace.go_roundtrip.passed ? trace.full_roundtrip.counterexample
                                                   : trace.go_roundtrip.counterexample;
      break;
    }
  }
  r.go_roundtrip = go_ok ? CheckStatus::pass : CheckStatus::fail;
  r.full_roundtrip = !go_ok ? CheckStatus::skipped : (full_ok ? CheckStatus::pass : CheckStatus::fail);
  if (!full_ok) return out;

  validation::FunctionUnderTest fut{gofn, gt.input.name, gt.output.name, tt.call, {code, tt.input_def, tt.output_def}};
  env.target_items = sh.type_items;
  for (const auto &c : w.callee_items) env.target_items.push_back(c);
  validation::HarnessPair pair = validation::build_function_harnesses(fut, env);
  if (!pair.ok()) {
    r.note = "harness build failed";
    r.diagnostics.push_back(pair.source.ok ? pair.target.diagnostics : pair.source.diagnostics);
    r.io_equiv = CheckStatus::fail;
    return out;
  }
  validation::ObservedValues inputs = capture->inputs.capped(cap);
  validation::ObservedValues outputs = capture->outputs.capped(cap);
  validation::CheckResult det = validation::check_determinism(pair.source.command, inputs);
  if (!det.passed) {
    r.note = "source function is not deterministic";
    return out;
  }
  carrier::Codec codec(registry);
  validation::CheckResult io = validation::check_io_equivalence(pair.harnesses(fut), codec, inputs, outputs);
  if (io.passed) {
    r.io_equiv = CheckStatus::pass;
    return out;
  }
  r.counterexample = io.counterexample;
  if (!env.gateway) {
    r.io_equiv = CheckStatus::fail;
    r.note = "output mismatch: " + first_line(io.detail);
    return out;
  }

  validation::FrozenFunction frozen;
  frozen.function_id = r.function_id;
  frozen.go_function = gofn;
  frozen.signature = *sig;
  frozen.current_item = code;
  frozen.context_items = sh.type_items;
  for (const auto &c : w.callee_items) frozen.context_items.push_back(c);
  std::vector<std::string> uses = validation::split_uses(code).uses;
  std::string use_block;
  for (const auto &u : uses) use_block += "use " + u + ";\n";

  auto validator = [&](const std::string &candidate) {
    validation::FunctionUnderTest named = fut;
    named.target_items = {use_block + candidate, tt.input_def, tt.output_def};
    validation::HarnessPair p = validation::build_function_harnesses(named, env);
    if (!p.target.ok) return validation::BodyAttempt{false, "compile error:\n" + p.target.diagnostics};
    if (!p.source.ok) return validation::BodyAttempt{false, "source harness failed:\n" + p.source.diagnostics};
    validation::CheckResult c = validation::check_io_equivalence(p.harnesses(named), codec, inputs, outputs);
    return validation::BodyAttempt{c.passed, c.passed ? "" : c.detail};
  };
  validation::RegenerationStats stats;
  try {
    std::string body = validation::regenerate_body(frozen, budget, *env.gateway, validator, io.detail, &stats);
    r.body_attempts = stats.attempts;
    r.io_equiv = CheckStatus::pass;
    r.counterexample.reset();
    out.new_translation = use_block.empty() ? body : use_block + body;
  } catch (const BudgetExhausted &) {
    r.body_attempts = stats.attempts;
    r.io_equiv = CheckStatus::fail;
    r.note = "output mismatch: " + first_line(stats.last_feedback.empty() ? io.detail : stats.last_feedback);
  } catch (const Error &e) {
    r.body_attempts = stats.attempts;
    r.io_equiv = CheckStatus::fail;
    r.note = first_line(e.what());
    if (is_hard(e)) out.hard_errors.push_back(r.function_id + ": " + e.what());
  }
  return out;
}

}  // namespace

json ProjectReport::to_json() const {
  json units_j = json::array();
  for (const auto &u : units)
    units_j.push_back({{"item_id", u.item_id},
                       {"kind", std::string(pipeline::to_string(u.kind))},
                       {"translated", u.translated},
                       {"compiled", u.compiled},
                       {"apis", u.apis},
                       {"invalid_imports", u.invalid_imports},
                       {"errors", u.errors}});
  validation::Rates r = rates();
  auto rate = [](const std::optional<double> &v) { return v ? json(*v) : json(nullptr); };
  return {{"project", project},
          {"rag_load", rag_load},
          {"mapping", mapping},
          {"no_rag", no_rag},
          {"no_imports", no_imports},
          {"rates",
           {{"n_full", r.n_full},
            {"n_dep", r.n_dep},
            {"comp_full", rate(r.comp_full)},
            {"comp_dep", rate(r.comp_dep)},
            {"equiv_full", rate(r.equiv_full)},
            {"equiv_dep", rate(r.equiv_dep)}}},
          {"units", units_j},
          {"skipped", skipped},
          {"hard_errors", hard_errors},
          {"validation", validation.to_json()}};
}

std::string ProjectReport::table() const {
  validation::Rates r = rates();
  std::ostringstream os;
  os << "project\tRAG load\tComp. Full\tComp. Dep\tEquiv. Full\tEquiv. Dep\n";
  os << project << (no_rag ? " (no RAG)" : no_imports ? " (no imports)" : "") << '\t' << rag_load << '\t'
     << fmt_rate(r.comp_full) << '\t' << fmt_rate(r.comp_dep) << '\t' << fmt_rate(r.equiv_full) << '\t'
     << fmt_rate(r.equiv_dep) << '\n';
  for (const auto &f : validation.functions) {
    os << "  " << f.function_id << (f.uses_external_apis ? " [dep]" : "") << ": compiled=" << (f.compiled ? "yes" : "no")
       << " go_roundtrip=" << validation::to_string(f.go_roundtrip)
       << " full_roundtrip=" << validation::to_string(f.full_roundtrip)
       << " io_equiv=" << validation::to_string(f.io_equiv);
    if (!f.note.empty()) os << " (" << f.note << ")";
    os << '\n';
  }
  for (const auto &s : skipped) os << "  skipped " << s << '\n';
  for (const auto &e : hard_errors) os << "  error: " << e << '\n';
  return os.str();
}

ProjectReport run_project(const fs::path &project_dir, const RunOptions &options) {
  if (!options.gateway) throw MalformedInput("run_project needs a model gateway");
  ProjectConfig cfg = ProjectConfig::load(project_dir);
  fs::path out_dir = options.out_dir.empty() ? cfg.root / "out" : fs::absolute(options.out_dir);
  fs::path work = out_dir / "work";
  fs::create_directories(work);

  ProjectReport report;
  report.project = cfg.name;
  report.no_rag = options.no_rag;
  report.no_imports = options.no_imports;

  GoSourceFile src = scan_go_dir(cfg.go_dir);
  std::vector<go::GoApiEntry> go_index = go::load_go_index(cfg.go_index);

  // Crate mapping for the imported packages the index knows about.
  std::set<std::string> imported;
  for (const auto &[alias, path] : src.imports) imported.insert(path);
  std::vector<go::GoApiEntry> used_entries;
  for (const auto &e : go_index)
    if (imported.count(e.package)) used_entries.push_back(e);
  mapping::CandidateCatalog catalog = cfg.catalog ? mapping::load_catalog(*cfg.catalog) : mapping::CandidateCatalog{};
  mapping::CrateMapping preset = mapping::apply_overrides({}, cfg.mapping);
  std::map<std::string, std::string> summaries;
  for (const auto &[pkg, doc] : cfg.package_summaries)
    if (imported.count(pkg)) summaries[pkg] = doc;
  mapping::CrateMapping crate_map =
      mapping::match_crates(go::group_packages(used_entries, summaries), catalog, nullptr, preset);
  for (const auto &[pkg, crate] : crate_map.entries)
    if (imported.count(pkg)) report.mapping[pkg] = crate;

  // Knowledge bases of the mapped crates; indexes also cover their dependencies.
  std::map<std::string, doc::ModuleDoc> docs;
  for (const auto &[crate, path] : cfg.crate_docs) docs[crate] = doc::parse_crate_doc_file(util::read_file(path)).root;
  doc::DependencyGraph graph = cfg.crate_deps ? doc::parse_dependency_graph(util::read_file(*cfg.crate_deps))
                                              : doc::DependencyGraph{};
  std::map<std::string, index::ApiIndex> indexes;
  std::map<std::string, kb::KnowledgeBase> kbs;
  for (const auto &[pkg, crate] : report.mapping) {
    if (kbs.count(crate)) continue;
    auto d = docs.find(crate);
    if (d == docs.end()) throw MissingKb("no documentation for crate " + crate + " (mapped from " + pkg + ")");
    index::CratesMap crates = index::extract_crate(d->second, docs, graph);
    for (const auto &[name, idx] : crates) indexes.emplace(name, idx);
    kbs.emplace(crate, kb::build_kb(crates.at(crate), cfg.retrieval, {options.gateway, crate}));
    report.rag_load += kbs.at(crate).size();
  }

  validation::Variables vars = options.vars;
  vars["GO_DIR"] = cfg.go_dir.string();
  vars["PROJECT_DIR"] = cfg.root.string();
  vars["OUT"] = (work / "capture").string();

  validation::CaptureSet captures;
  if (!cfg.capture.empty()) {
    fs::create_directories(work / "capture");
    std::vector<std::string> argv;
    for (const auto &a : cfg.capture) argv.push_back(validation::expand_variables(a, vars));
    util::ProcessOptions popts;
    popts.timeout = std::chrono::milliseconds(cfg.harness_timeout * 10);
    auto res = util::run_process(argv, "", popts);
    if (res.spawn_failed || res.exit_code != 0 || res.timed_out)
      throw HarnessError("capture failed: " + util::trim(res.err));
    captures = validation::load_capture_set(work / "capture" / "manifest.json");
  }

  validation::RustToolchain rust({options.rustc, cfg.rust_crates, work / "rust", std::chrono::milliseconds{120'000},
                                  cfg.harness_timeout});
  validation::ExternalToolchain go(validation::Side::source_side,
                                   {cfg.source_build, cfg.source_run, vars, work / "go", cfg.harness_timeout});

  PromptOptions prompt_opts{!options.no_imports};
  std::vector<std::string> types = type_order(src);
  std::vector<std::string> functions = function_order(src);
  std::map<std::string, UnitOutcome> outcome;  // by item id

  auto translate = [&](TranslationUnit unit, const std::vector<std::string> &dep_items, const std::string &check_name) {
    UnitOutcome u;
    u.item_id = unit.item_id;
    u.kind = unit.kind;
    for (const auto &a : unit.go_apis_used) u.apis.push_back(a.qualified_name());
    try {
      RagContext ctx = options.no_rag ? RagContext{} : build_rag_context(unit, crate_map, kbs);
      u.translation = translate_unit(unit, ctx, *options.gateway, prompt_opts);
      u.translated = true;
    } catch (const Error &e) {
      u.errors.push_back(e.what());
      if (is_hard(e)) report.hard_errors.push_back(unit.item_id + ": " + e.what());
      return u;
    }
    u.invalid_imports = invalid_imports(u.translation, indexes);
    std::vector<std::string> items = dep_items;
    items.push_back(u.translation);
    validation::BuildResult b = rust.check(check_name, items);
    u.compiled = b.ok;
    if (!b.ok) u.errors.push_back(util::trim(b.diagnostics));
    return u;
  };

  std::set<std::string> skipped_types;
  for (const auto &name : types) {
    const GoTypeDef &def = *src.type(name);
    if (auto why = unsupported_reason(def)) {
      report.skipped.push_back(name + ": " + *why);
      skipped_types.insert(name);
      continue;
    }
    std::set<std::string> direct;
    for (const auto &f : def.fields) named_types(f.type, direct);
    direct.erase(name);
    std::vector<std::string> dep_items;
    std::string summary;
    for (const auto &d : type_closure(direct, src, types)) {
      if (!outcome.count(d)) continue;
      dep_items.push_back(outcome[d].translation);
      if (direct.count(d)) summary += outcome[d].translation + "\n\n";
    }
    TranslationUnit unit{name, UnitKind::type_def, def.source_text, summary, apis_used(def, src, go_index)};
    outcome[name] = translate(unit, dep_items, "type-" + name);
    report.units.push_back(outcome[name]);
  }

  for (const auto &id : functions) {
    const GoFunctionDecl &decl = *src.function(id);
    if (auto why = unsupported_reason(decl)) {
      report.skipped.push_back(id + ": " + *why);
      continue;
    }
    std::vector<std::string> dep_items;
    std::string summary;
    std::set<std::string> used = function_types(decl, src);
    for (const auto &t : type_closure(used, src, types)) {
      if (!outcome.count(t)) continue;
      dep_items.push_back(outcome[t].translation);
      if (used.count(t)) summary += outcome[t].translation + "\n\n";
    }
    for (const auto &c : callees(decl, src)) {
      auto it = outcome.find(c);
      if (it == outcome.end() || !it->second.translated) continue;
      dep_items.push_back(it->second.translation);
      if (auto sig = locate_fn(it->second.translation, src.function(c)->fn)) summary += sig->str() + ";\n";
    }
    std::string text = decl.fn.source_text;
    TranslationUnit unit{id, UnitKind::function, text, summary, apis_used(decl, src, go_index)};
    outcome[id] = translate(unit, dep_items, "fn-" + id);
    report.units.push_back(outcome[id]);
  }

  // Interoperability of the translated types, in dependency order.
  validation::GlueKnowledge knowledge;
  if (!options.no_rag) {
    knowledge.kbs = &kbs;
    knowledge.mapping = &crate_map;
  }
  knowledge.go_index = go_index;
  knowledge.package_aliases = src.imports;

  Shared sh;
  sh.cfg = &cfg;
  sh.opts = &options;
  sh.src = &src;
  sh.go = &go;
  sh.rust = &rust;
  sh.knowledge = &knowledge;
  sh.captures = &captures;
  sh.work = work;

  validation::InteropEnv env;
  env.registry = &sh.registry;
  env.adapters = &sh.adapters;
  env.source = &go;
  env.target = &rust;
  env.gateway = options.gateway.get();
  env.knowledge = &knowledge;
  env.protoc.protoc = options.protoc;
  env.work_dir = work / "interop";

  for (const auto &name : types) {
    if (skipped_types.count(name)) continue;
    const UnitOutcome &u = outcome[name];
    if (!u.compiled) {
      sh.type_failure[name] = "translation does not compile";
      continue;
    }
    std::set<std::string> deps;
    for (const auto &f : src.type(name)->fields) named_types(f.type, deps);
    deps.erase(name);
    std::string missing;
    for (const auto &d : deps)
      if (src.type(d) && !sh.valid_types.count(d)) missing = d;
    if (!missing.empty()) {
      sh.type_failure[name] = "depends on " + missing;
      continue;
    }
    validation::ObservedValues values;
    values.type_id = name;
    if (const auto *obs = captures.type(name)) values = obs->capped(cfg.max_values);
    validation::TypeUnderTest tut{*src.type(name), validation::rust_type_name(name), u.translation, values};
    env.target_items = sh.type_items;
    validation::InteropTrace trace;
    try {
      validation::establish_interop(tut, env, options.budget, &trace);
      sh.valid_types.insert(name);
      sh.type_items.push_back(u.translation);
    } catch (const Error &e) {
      sh.type_failure[name] = first_line(e.what());
      if (is_hard(e)) report.hard_errors.push_back(name + ": " + e.what());
    }
  }
  sh.go_types = env.go_types;

  // Functions, optionally in parallel; each works on its own copy of the
  // registry and adapter store.
  std::vector<FunctionWork> work_items;
  for (const auto &id : functions) {
    auto it = outcome.find(id);
    if (it == outcome.end()) continue;
    const GoFunctionDecl &decl = *src.function(id);
    FunctionWork w;
    w.decl = &decl;
    w.unit = &it->second;
    for (const auto &c : callees(decl, src))
      if (outcome.count(c) && outcome[c].translated) w.callee_items.push_back(outcome[c].translation);
    std::set<std::string> sig_types;
    if (decl.fn.receiver) named_types(decl.fn.receiver->type, sig_types);
    for (const auto &p : decl.fn.params) named_types(p.type, sig_types);
    for (const auto &r : decl.fn.results) named_types(r, sig_types);
    for (const auto &t : sig_types)
      if (src.type(t)) w.types.push_back(t);
    work_items.push_back(std::move(w));
  }
  std::vector<FunctionResult> results(work_items.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::vector<std::string> worker_errors;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < work_items.size();) {
      try {
        results[i] = validate_function(work_items[i], sh);
      } catch (const Error &e) {
        FunctionResult fr;
        fr.report.function_id = work_items[i].decl->fn.id();
        fr.report.uses_external_apis = !work_items[i].unit->apis.empty();
        fr.report.compiled = work_items[i].unit->compiled;
        fr.report.note = first_line(e.what());
        if (is_hard(e)) fr.hard_errors.push_back(fr.report.function_id + ": " + e.what());
        results[i] = std::move(fr);
      }
    }
  };
  int n_workers = std::clamp(options.workers, 1, static_cast<int>(std::max<std::size_t>(work_items.size(), 1)));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int i = 0; i < n_workers; ++i) threads.emplace_back(worker);
    for (auto &t : threads) t.join();
  }
  for (std::size_t i = 0; i < results.size(); ++i) {
    report.validation.functions.push_back(results[i].report);
    for (const auto &e : results[i].hard_errors) report.hard_errors.push_back(e);
    if (results[i].new_translation) outcome[results[i].report.function_id].translation = *results[i].new_translation;
  }
  for (auto &u : report.units) u.translation = outcome[u.item_id].translation;

  // Artifacts.
  std::vector<std::string> all;
  for (const auto &u : report.units)
    if (u.translated) all.push_back(u.translation);
  fs::create_directories(out_dir / "translated");
  util::write_file(out_dir / "translated" / "lib.rs", validation::combine_rust_units(all) + "\n");
  for (const auto &u : report.units)
    if (u.translated) util::write_file(out_dir / "translated" / (u.item_id + ".rs"), u.translation + "\n");
  util::write_json_file(out_dir / "report.json", report.to_json());
  util::write_file(out_dir / "report.txt", report.table());
  return report;
}

}  // namespace xcrate::pipeline
