#include "xcrate/validation/tupling.hpp"

#include <set>

#include "xcrate/carrier/compile.hpp"
#include "xcrate/carrier/schema.hpp"
#include "xcrate/error.hpp"
#include "xcrate/validation/glue.hpp"

namespace xcrate::validation {

namespace {

std::string exported(std::string_view name) {
  std::string out(name);
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

carrier::GoType strip_pointer(const carrier::GoType &t) {
  return t.kind == carrier::GoType::Kind::pointer ? *t.elem : t;
}

std::string rust_field(const std::string &go_field) {
  return carrier::rust_field_name(carrier::snake_case(go_field));
}

carrier::GoTypeDef finish(carrier::GoTypeDef def) {
  def.source_text = carrier::render_go_struct(def);
  return def;
}

}  // namespace

std::string tuple_base_name(const carrier::GoFunction &fn) {
  std::string base = exported(fn.name);
  if (fn.receiver) {
    carrier::GoType recv = strip_pointer(fn.receiver->type);
    base = recv.name + base;
  }
  return base;
}

GoTuples tuple_go_function(const carrier::GoFunction &fn) {
  std::string base = tuple_base_name(fn);
  GoTuples t;
  t.input.name = base + "Input";
  t.output.name = base + "Output";
  std::set<std::string> used;
  auto unique = [&](std::string name) {
    std::string candidate = name;
    for (int i = 2; used.count(candidate); ++i) candidate = name + std::to_string(i);
    used.insert(candidate);
    return candidate;
  };
  if (fn.receiver) t.input.fields.push_back({unique("Recv"), strip_pointer(fn.receiver->type), false});
  for (const auto &p : fn.params) t.input.fields.push_back({unique(exported(p.name)), p.type, false});
  for (std::size_t i = 0; i < fn.results.size(); ++i)
    t.output.fields.push_back({"R" + std::to_string(i), fn.results[i], false});
  if (fn.returns_error) t.output.fields.push_back({"Failed", carrier::parse_go_type("bool"), false});
  t.input = finish(std::move(t.input));
  t.output = finish(std::move(t.output));
  return t;
}

TargetTuples tuple_rust_function(const carrier::GoFunction &fn, const RustFnSig &sig) {
  GoTuples go = tuple_go_function(fn);
  std::string what = "translation `" + sig.str() + "` of " + fn.id();
  if (fn.receiver && sig.receiver.empty())
    throw SignatureMismatch(what + ": the method lost its receiver");
  if (!fn.receiver && !sig.receiver.empty())
    throw SignatureMismatch(what + ": a function gained a receiver");
  if (!sig.receiver.empty() && !sig.self_type)
    throw SignatureMismatch(what + ": receiver outside an impl block");
  if (sig.receiver == "&mut self") throw SignatureMismatch(what + ": mutable receivers are not supported");
  if (sig.params.size() != fn.params.size())
    throw SignatureMismatch(what + ": expected " + std::to_string(fn.params.size()) + " parameters, found " +
                            std::to_string(sig.params.size()));
  ReturnShape shape = return_shape(sig);
  if (shape.is_result != fn.returns_error)
    throw SignatureMismatch(what + (fn.returns_error ? ": the error result must become a Result"
                                                     : ": Result return for a function that cannot fail"));
  if (shape.components.size() != fn.results.size())
    throw SignatureMismatch(what + ": expected " + std::to_string(fn.results.size()) + " results, found " +
                            std::to_string(shape.components.size()));

  TargetTuples out;
  TargetCall &call = out.call;
  call.input_type = go.input.name;
  call.output_type = go.output.name;
  call.input_struct = rust_type_name(go.input.name);
  call.output_struct = rust_type_name(go.output.name);
  call.signature = sig;
  call.has_failed_flag = fn.returns_error;

  std::vector<std::string> in_types;
  if (!sig.receiver.empty()) in_types.push_back(*sig.self_type);
  for (const auto &p : sig.params) in_types.push_back(owned_type(p.type));

  out.input_def = "pub struct " + call.input_struct + " {\n";
  for (std::size_t i = 0; i < go.input.fields.size(); ++i) {
    std::string name = rust_field(go.input.fields[i].name);
    call.input_fields.push_back(name);
    out.input_def += "    pub " + name + ": " + in_types[i] + ",\n";
  }
  out.input_def += "}\n";

  out.output_def = "pub struct " + call.output_struct + " {\n";
  for (std::size_t i = 0; i < shape.components.size(); ++i) {
    std::string name = rust_field(go.output.fields[i].name);
    call.output_fields.push_back(name);
    out.output_def += "    pub " + name + ": " + shape.components[i] + ",\n";
  }
  if (fn.returns_error) out.output_def += std::string("    pub ") + kFailedField + ": bool,\n";
  out.output_def += "}\n";
  return out;
}

}  // namespace xcrate::validation
