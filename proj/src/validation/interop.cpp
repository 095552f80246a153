#include "xcrate/validation/interop.hpp"

#include <algorithm>
#include <set>

#include "xcrate/error.hpp"
#include "xcrate/util/json_file.hpp"
#include "xcrate/util/text.hpp"

namespace fs = std::filesystem;

namespace xcrate::validation {

Budget Budget::parse(std::string_view text) {
  std::vector<std::string> parts = util::split(text, ",");
  if (parts.size() != 3) throw MalformedInput("budgets must be `schema,glue,body`, got `" + std::string(text) + "`");
  int v[3];
  for (int i = 0; i < 3; ++i) {
    std::string p = util::trim(parts[i]);
    std::size_t used = 0;
    try {
      v[i] = std::stoi(p, &used);
    } catch (const std::exception &) {
      used = 0;
    }
    if (p.empty() || used != p.size() || v[i] < 1)
      throw MalformedInput("budget `" + p + "` is not a positive integer");
  }
  return Budget{v[0], v[1], v[2]};
}

std::string Budget::str() const {
  return std::to_string(schema_retries) + "," + std::to_string(glue_retries) + "," + std::to_string(body_retries);
}

namespace {

struct CarrierBuild {
  carrier::SchemaRegistry registry;
  std::string schema_text;
  carrier::CompiledCarriers compiled;
};

CarrierBuild compile_closure(const carrier::SchemaRegistry &registry, const std::vector<std::string> &messages,
                             const carrier::CompileOptions &base, const fs::path &dir) {
  CarrierBuild b;
  b.registry = registry.closure(messages);
  b.schema_text = carrier::render_schema(b.registry);
  fs::create_directories(dir);
  fs::path file = dir / "carrier.proto";
  util::write_file(file, b.schema_text);
  carrier::CompileOptions opts = base;
  opts.out_dir = dir;
  for (const auto &[src, msg] : b.registry.bindings()) opts.source_types[msg] = src;
  b.compiled = carrier::compile_carriers(file, opts);
  return b;
}

std::vector<AdapterBinding> bindings_of(const carrier::SchemaRegistry &reg) {
  std::vector<AdapterBinding> out;
  for (const auto &msg : reg.ordered_messages()) {
    const carrier::CarrierSchema &s = reg.at(msg);
    out.push_back({s.source_type, rust_type_name(s.source_type), msg});
  }
  return out;
}

std::vector<std::string> source_types_of(const carrier::SchemaRegistry &reg) {
  std::vector<std::string> out;
  for (const auto &msg : reg.ordered_messages()) out.push_back(reg.at(msg).source_type);
  return out;
}

// The declaration of `name` in generated carrier source, for prompts.
std::string carrier_struct(const std::string &code, const std::string &header) {
  std::size_t start = code.find(header);
  if (start == std::string::npos) return "";
  std::size_t end = code.find("\n}", start);
  return end == std::string::npos ? "" : code.substr(start, end + 2 - start);
}

std::string glue_for(Side side, const AdapterStore &store, const std::vector<std::string> &types,
                     const AdapterPair *extra) {
  std::vector<std::string> units;
  for (const AdapterPair *p : store.closure(side, types))
    if (!extra || p->type != extra->type) units.push_back(p->source());
  if (extra) units.push_back(extra->source());
  return side == Side::source_side ? combine_go_units(units) : combine_rust_units(units);
}

std::vector<std::string> user_deps(const carrier::CarrierSchema &schema, const carrier::SchemaRegistry &reg) {
  std::vector<std::string> out;
  for (const auto &m : schema.depends_on)
    if (const carrier::CarrierSchema *d = reg.find(m)) out.push_back(d->source_type);
  return out;
}

std::vector<std::string> with_item(std::vector<std::string> items, const std::string &item) {
  if (!item.empty() && std::find(items.begin(), items.end(), item) == items.end()) items.push_back(item);
  return items;
}

std::vector<carrier::GoTypeDef> with_type(std::vector<carrier::GoTypeDef> types, const carrier::GoTypeDef &t) {
  for (const auto &x : types)
    if (x.name == t.name) return types;
  types.push_back(t);
  return types;
}

std::string describe_failure(const CheckResult &r) {
  std::string out = r.detail;
  if (r.counterexample) out = "value #" + std::to_string(*r.counterexample) + " " + r.counterexample_value + ": " + out;
  return util::trim(out);
}

// One glue attempt: mechanical derivation on the first try, the model
// afterwards or when derivation does not apply.
AdapterPair make_glue(const GlueRequest &req, InteropEnv &env, const carrier::SchemaRegistry &reg) {
  if (req.attempt == 1)
    if (auto d = derive_glue(req, reg, *env.adapters)) return *d;
  if (!env.gateway) throw GenerationFailed("no model available for the adapters of " + req.go_type.name);
  static const GlueKnowledge kNone;
  return gen_glue(req, env.knowledge ? *env.knowledge : kNone, *env.adapters, *env.gateway);
}

}  // namespace

InteropResult establish_interop(const TypeUnderTest &type, InteropEnv &env, const Budget &budget,
                                InteropTrace *trace_out) {
  if (!env.registry || !env.adapters || !env.source || !env.target)
    throw MalformedInput("interoperability environment is incomplete");
  InteropTrace local;
  InteropTrace &trace = trace_out ? *trace_out : local;
  trace = InteropTrace{};
  const std::string &name = type.go_type.name;
  fs::path base = env.work_dir / ("type-" + name);
  std::vector<carrier::GoTypeDef> go_types = with_type(env.go_types, type.go_type);

  InteropResult result;
  carrier::SchemaRegistry candidate_registry;
  CarrierBuild carriers;
  BuildResult source_build;
  bool phase1 = false;
  std::string feedback;

  for (int s = 1; s <= budget.schema_retries && !phase1; ++s) {
    trace.attempts.schema = s;
    auto fail = [&](const std::string &why) {
      feedback = why;
      trace.log.push_back("schema attempt " + std::to_string(s) + ": " + why);
    };
    try {
      carrier::SynthesisOptions opts{s, feedback};
      result.schema = carrier::synthesize_schema(type.go_type, *env.registry, env.gateway, opts);
      candidate_registry = *env.registry;
      candidate_registry.bind(result.schema);
      carriers = compile_closure(candidate_registry, {result.schema.message_name}, env.protoc,
                                 base / ("schema-" + std::to_string(s)));
    } catch (const SchemaRejected &e) {
      fail(e.what());
      continue;
    } catch (const SchemaCompileError &e) {
      fail(e.what());
      continue;
    }

    trace.attempts.source_glue += 1;
    GlueRequest req{Side::source_side, type.go_type, type.target_type_def, result.schema,
                    carrier_struct(carriers.compiled.go_source, "type Proto" + name + " struct"), s, feedback};
    try {
      result.source = make_glue(req, env, candidate_registry);
    } catch (const GenerationFailed &e) {
      fail(e.what());
      continue;
    } catch (const ProviderError &e) {
      fail(e.what());
      continue;
    }

    BuildInputs in;
    in.side = Side::source_side;
    in.unit = "type-" + name + "-s" + std::to_string(s);
    in.registry = carriers.registry;
    in.schema_text = carriers.schema_text;
    in.carrier_source = carriers.compiled.go_source;
    in.adapters = bindings_of(carriers.registry);
    in.glue = glue_for(Side::source_side, *env.adapters, source_types_of(carriers.registry), &result.source);
    in.go_types = go_types;
    source_build = env.source->build(in);
    if (!source_build.ok) {
      fail("source adapters do not build: " + util::trim(source_build.diagnostics));
      continue;
    }
    try {
      trace.go_roundtrip = check_go_roundtrip(source_build.command, name, type.values);
    } catch (const HarnessError &e) {
      fail(e.what());
      continue;
    }
    if (!trace.go_roundtrip) {
      fail("source round trip failed for " + describe_failure(trace.go_roundtrip));
      continue;
    }
    trace.log.push_back("schema attempt " + std::to_string(s) + ": source round trip passed");
    phase1 = true;
  }
  if (!phase1)
    throw BudgetExhausted("schema and source adapters for " + name + " failed " +
                          std::to_string(budget.schema_retries) + " times; last: " + feedback);

  feedback.clear();
  for (int g = 1; g <= budget.glue_retries; ++g) {
    trace.attempts.target_glue = g;
    auto fail = [&](const std::string &why) {
      feedback = why;
      trace.log.push_back("target glue attempt " + std::to_string(g) + ": " + why);
    };
    GlueRequest req{Side::target_side,
                    type.go_type,
                    type.target_type_def,
                    result.schema,
                    carrier_struct(carriers.compiled.rust_source, "pub struct Proto" + name + " {"),
                    g,
                    feedback};
    try {
      result.target = make_glue(req, env, candidate_registry);
    } catch (const GenerationFailed &e) {
      fail(e.what());
      continue;
    } catch (const ProviderError &e) {
      fail(e.what());
      continue;
    }
    BuildInputs in;
    in.side = Side::target_side;
    in.unit = "type-" + name + "-g" + std::to_string(g);
    in.registry = carriers.registry;
    in.schema_text = carriers.schema_text;
    in.carrier_source = carriers.compiled.rust_source;
    in.adapters = bindings_of(carriers.registry);
    in.glue = glue_for(Side::target_side, *env.adapters, source_types_of(carriers.registry), &result.target);
    in.target_items = with_item(env.target_items, type.target_type_def);
    BuildResult target_build = env.target->build(in);
    if (!target_build.ok) {
      fail("target adapters do not compile: " + util::trim(target_build.diagnostics));
      continue;
    }
    try {
      trace.full_roundtrip = check_full_roundtrip(source_build.command, target_build.command, name, type.values);
    } catch (const HarnessError &e) {
      fail(e.what());
      continue;
    }
    if (!trace.full_roundtrip) {
      fail("full round trip failed for " + describe_failure(trace.full_roundtrip));
      continue;
    }
    trace.log.push_back("target glue attempt " + std::to_string(g) + ": full round trip passed");
    env.registry->bind(result.schema);
    env.adapters->put(result.source);
    env.adapters->put(result.target);
    env.adapters->set_dependencies(name, user_deps(result.schema, *env.registry));
    env.go_types = go_types;
    result.trace = trace;
    return result;
  }
  throw BudgetExhausted("target adapters for " + name + " failed " + std::to_string(budget.glue_retries) +
                        " times; last: " + feedback);
}

FunctionHarnesses HarnessPair::harnesses(const FunctionUnderTest &fn) const {
  return FunctionHarnesses{source.command, target.command, fn.input_type, fn.output_type};
}

HarnessPair build_function_harnesses(const FunctionUnderTest &fn, InteropEnv &env) {
  auto in_msg = env.registry->message_for(fn.input_type);
  auto out_msg = env.registry->message_for(fn.output_type);
  if (!in_msg || !out_msg)
    throw UnboundDependency("tuple types of " + fn.go_function.id() + " have no validated carrier");
  std::string unit = "fn-" + fn.go_function.id();
  CarrierBuild carriers = compile_closure(*env.registry, {*in_msg, *out_msg}, env.protoc, env.work_dir / unit);
  std::vector<std::string> types = source_types_of(carriers.registry);

  HarnessPair pair;
  BuildInputs src;
  src.side = Side::source_side;
  src.unit = unit + "-source";
  src.registry = carriers.registry;
  src.schema_text = carriers.schema_text;
  src.carrier_source = carriers.compiled.go_source;
  src.adapters = bindings_of(carriers.registry);
  src.glue = glue_for(Side::source_side, *env.adapters, types, nullptr);
  src.go_types = env.go_types;
  src.go_function = fn.go_function;
  pair.source = env.source->build(src);

  BuildInputs tgt;
  tgt.side = Side::target_side;
  tgt.unit = unit + "-target";
  tgt.registry = carriers.registry;
  tgt.schema_text = carriers.schema_text;
  tgt.carrier_source = carriers.compiled.rust_source;
  tgt.adapters = src.adapters;
  tgt.glue = glue_for(Side::target_side, *env.adapters, types, nullptr);
  tgt.target_items = env.target_items;
  for (const auto &item : fn.target_items) tgt.target_items = with_item(tgt.target_items, item);
  tgt.call = fn.call;
  pair.target = env.target->build(tgt);
  return pair;
}

std::string body_prompt(const FrozenFunction &frozen, int attempt, const std::string &feedback) {
  std::string out = "Rewrite the body of a Rust function translated from Go so that it behaves exactly like the Go "
                    "function. The signature is frozen and must stay exactly:\n" +
                    frozen.signature.str() + "\n\n";
  out += "Attempt " + std::to_string(attempt) + ".\n\n";
  out += "Go function:\n" + frozen.go_function.source_text + "\n\n";
  out += "Current Rust translation:\n" + frozen.current_item + "\n\n";
  if (!frozen.context_items.empty()) out += "Items in scope (do not repeat them):\n" + util::join(frozen.context_items, "\n") + "\n\n";
  if (!feedback.empty()) out += "Validation feedback:\n" + feedback + "\n\n";
  out += "Answer with a single ```rust code block containing only the rewritten function";
  out += frozen.signature.self_type ? " inside its impl block." : ".";
  return out;
}

std::string regenerate_body(const FrozenFunction &frozen, const Budget &budget, llm::LlmGateway &gateway,
                            const BodyValidator &validate, const std::string &initial_feedback,
                            RegenerationStats *stats_out) {
  RegenerationStats local;
  RegenerationStats &stats = stats_out ? *stats_out : local;
  stats = RegenerationStats{};
  std::string feedback = initial_feedback;
  for (int attempt = 1; attempt <= budget.body_retries; ++attempt) {
    stats.attempts = attempt;
    std::string code;
    try {
      code = extract_code_block(gateway.complete(body_prompt(frozen, attempt, feedback)), "rust");
    } catch (const ProviderError &e) {
      feedback = e.what();
      stats.last_feedback = feedback;
      continue;
    }
    std::optional<RustFnSig> sig;
    for (const auto &s : list_rust_fns(code))
      if (s.name == frozen.signature.name && s.self_type == frozen.signature.self_type) sig = s;
    if (!sig || !(*sig == frozen.signature)) {
      ++stats.signature_rejections;
      feedback = "the signature must stay `" + frozen.signature.str() + "`" +
                 (sig ? ", got `" + sig->str() + "`" : std::string(", but the function is missing"));
      stats.last_feedback = feedback;
      continue;
    }
    ++stats.validator_runs;
    BodyAttempt r = validate(code);
    if (r.passed) return code;
    feedback = r.feedback;
    stats.last_feedback = feedback;
  }
  throw BudgetExhausted("no valid body for " + frozen.function_id + " after " + std::to_string(budget.body_retries) +
                        " attempts; last: " + feedback);
}

}  // namespace xcrate::validation
