#include "xcrate/carrier/schema.hpp"

#include <algorithm>
#include <cctype>
#include <queue>

#include "xcrate/error.hpp"
#include "xcrate/util/text.hpp"

namespace xcrate::carrier {

namespace {

constexpr std::pair<ScalarKind, std::string_view> kKindNames[] = {
    {ScalarKind::double_, "double"}, {ScalarKind::float_, "float"},   {ScalarKind::int32, "int32"},
    {ScalarKind::int64, "int64"},    {ScalarKind::uint32, "uint32"},  {ScalarKind::uint64, "uint64"},
    {ScalarKind::bool_, "bool"},     {ScalarKind::string, "string"},  {ScalarKind::bytes, "bytes"},
    {ScalarKind::message, "message"}};

struct Classified {
  FieldClass cls = FieldClass::scalar;
  ProtoType type;
  bool optional = false;
  std::string reason;  // rejected only

  Classified() = default;
  Classified(FieldClass c, ProtoType t) : cls(c), type(std::move(t)) {}
};

std::optional<ScalarKind> builtin_kind(std::string_view name) {
  if (name == "bool") return ScalarKind::bool_;
  if (name == "string") return ScalarKind::string;
  if (name == "int" || name == "int64") return ScalarKind::int64;
  if (name == "int8" || name == "int16" || name == "int32" || name == "rune") return ScalarKind::int32;
  if (name == "uint" || name == "uint64" || name == "uintptr") return ScalarKind::uint64;
  if (name == "uint8" || name == "byte" || name == "uint16" || name == "uint32") return ScalarKind::uint32;
  if (name == "float32") return ScalarKind::float_;
  if (name == "float64") return ScalarKind::double_;
  return std::nullopt;
}

bool is_byte(const GoType &t) {
  return t.kind == GoType::Kind::named && t.package.empty() && (t.name == "byte" || t.name == "uint8");
}

Classified rejected(std::string reason) {
  Classified c;
  c.cls = FieldClass::rejected;
  c.reason = std::move(reason);
  return c;
}

Classified classify(const GoType &t, const SchemaRegistry &registry) {
  switch (t.kind) {
    case GoType::Kind::pointer: {
      Classified inner = classify(*t.elem, registry);
      if (inner.cls != FieldClass::rejected && !inner.type.repeated) inner.optional = true;
      return inner;
    }
    case GoType::Kind::slice:
    case GoType::Kind::array: {
      if (is_byte(*t.elem)) return Classified{FieldClass::scalar, ProtoType{ScalarKind::bytes, "", false}};
      const GoType *elem = t.elem.get();
      while (elem->kind == GoType::Kind::pointer) elem = elem->elem.get();
      Classified inner = classify(*elem, registry);
      if (inner.cls == FieldClass::rejected) return inner;
      if (inner.type.repeated) return rejected("nested sequences have no carrier encoding");
      inner.type.repeated = true;
      inner.optional = false;
      return inner;
    }
    case GoType::Kind::map:
      return rejected("map-typed fields are not supported");
    case GoType::Kind::func:
      return rejected("function-typed fields cannot be compared");
    case GoType::Kind::chan:
      return rejected("channel-typed fields cannot be compared");
    case GoType::Kind::interface_:
      return Classified{FieldClass::library, ProtoType{ScalarKind::bytes, "", false}};
    case GoType::Kind::named:
      break;
  }
  if (t.package.empty()) {
    if (auto k = builtin_kind(t.name)) return Classified{FieldClass::scalar, ProtoType{*k, "", false}};
    if (t.name == "complex64" || t.name == "complex128") return rejected("complex numbers are not supported");
    if (t.name == "error") return Classified{FieldClass::library, ProtoType{ScalarKind::bytes, "", false}};
    auto msg = registry.message_for(t.name);
    if (!msg) throw UnboundDependency("type " + t.name + " has no carrier schema yet");
    return Classified{FieldClass::user, ProtoType{ScalarKind::message, *msg, false}};
  }
  return Classified{FieldClass::library, ProtoType{ScalarKind::bytes, "", false}};
}

// The JSON object in a model answer, tolerating surrounding prose or fences.
nlohmann::json extract_json_object(const std::string &answer) {
  std::size_t open = answer.find('{');
  std::size_t close = answer.rfind('}');
  if (open == std::string::npos || close == std::string::npos || close < open)
    throw SchemaRejected("schema answer contains no JSON object");
  try {
    return nlohmann::json::parse(answer.substr(open, close - open + 1));
  } catch (const nlohmann::json::parse_error &e) {
    throw SchemaRejected(std::string("schema answer is not valid JSON: ") + e.what());
  }
}

ProtoType parse_encoding(const std::string &field, const std::string &encoding,
                         const SchemaRegistry &registry) {
  if (encoding.rfind("message:", 0) == 0) {
    std::string name = encoding.substr(8);
    if (!registry.find(name)) throw SchemaRejected("field " + field + ": unknown message " + name);
    return ProtoType{ScalarKind::message, name, false};
  }
  auto k = scalar_kind_from_string(encoding);
  if (!k || *k == ScalarKind::message) throw SchemaRejected("field " + field + ": invalid encoding `" + encoding + "`");
  return ProtoType{*k, "", false};
}

std::string render_field(const CarrierField &f) {
  std::string label = f.type.repeated ? "repeated " : (f.optional ? "optional " : "");
  return "  " + label + (f.type.is_message() ? f.type.message : std::string(to_string(f.type.kind))) + " " +
         f.name + " = " + std::to_string(f.number) + ";\n";
}

}  // namespace

std::string_view to_string(ScalarKind k) {
  for (const auto &[kind, name] : kKindNames)
    if (kind == k) return name;
  return "?";
}

std::optional<ScalarKind> scalar_kind_from_string(std::string_view s) {
  for (const auto &[kind, name] : kKindNames)
    if (name == s) return kind;
  return std::nullopt;
}

bool ProtoType::is_packable() const {
  return kind != ScalarKind::string && kind != ScalarKind::bytes && kind != ScalarKind::message;
}

std::string ProtoType::str() const {
  std::string base = is_message() ? "message:" + message : std::string(to_string(kind));
  return repeated ? "repeated " + base : base;
}

const CarrierField *CarrierSchema::field(int number) const {
  for (const auto &f : fields)
    if (f.number == number) return &f;
  return nullptr;
}

const CarrierField *CarrierSchema::field_named(std::string_view name) const {
  for (const auto &f : fields)
    if (f.name == name) return &f;
  return nullptr;
}

void SchemaRegistry::bind(const CarrierSchema &schema) {
  if (schema.message_name.empty()) throw SchemaRejected("schema without a message name");
  for (std::size_t i = 0; i < schema.fields.size(); ++i) {
    if (schema.fields[i].number != static_cast<int>(i) + 1)
      throw SchemaRejected(schema.message_name + ": field numbers must run 1..n in declaration order");
    for (std::size_t j = 0; j < i; ++j)
      if (schema.fields[j].name == schema.fields[i].name)
        throw SchemaRejected(schema.message_name + ": duplicate field " + schema.fields[i].name);
  }
  std::set<std::string> refs;
  for (const auto &f : schema.fields)
    if (f.type.is_message()) refs.insert(f.type.message);
  if (refs != schema.depends_on) throw SchemaRejected(schema.message_name + ": depends_on does not match fields");
  for (const auto &dep : refs) {
    if (dep == schema.message_name) throw UnboundDependency(dep + " refers to itself");
    if (!find(dep)) throw UnboundDependency(schema.message_name + " refers to unregistered message " + dep);
  }
  auto existing = schemas_.find(schema.message_name);
  if (existing != schemas_.end() && existing->second.source_type != schema.source_type)
    throw SchemaRejected("message " + schema.message_name + " is already bound to " + existing->second.source_type);

  unbind(schema.source_type);
  schemas_[schema.message_name] = schema;
  binding_[schema.source_type] = schema.message_name;
}

void SchemaRegistry::unbind(const std::string &source_type) {
  auto it = binding_.find(source_type);
  if (it == binding_.end()) return;
  schemas_.erase(it->second);
  binding_.erase(it);
}

const CarrierSchema *SchemaRegistry::find(std::string_view message_name) const {
  auto it = schemas_.find(message_name);
  return it == schemas_.end() ? nullptr : &it->second;
}

const CarrierSchema &SchemaRegistry::at(std::string_view message_name) const {
  const CarrierSchema *s = find(message_name);
  if (!s) throw UnboundDependency("no carrier message " + std::string(message_name));
  return *s;
}

std::optional<std::string> SchemaRegistry::message_for(std::string_view source_type) const {
  auto it = binding_.find(source_type);
  if (it == binding_.end()) return std::nullopt;
  return it->second;
}

bool SchemaRegistry::contains_source(std::string_view source_type) const {
  return binding_.find(source_type) != binding_.end();
}

std::vector<std::string> SchemaRegistry::ordered_messages() const {
  std::map<std::string, int> pending;
  std::map<std::string, std::vector<std::string>> dependents;
  for (const auto &[name, schema] : schemas_) {
    pending[name] = static_cast<int>(schema.depends_on.size());
    for (const auto &d : schema.depends_on) dependents[d].push_back(name);
  }
  std::priority_queue<std::string, std::vector<std::string>, std::greater<>> ready;
  for (const auto &[name, n] : pending)
    if (n == 0) ready.push(name);
  std::vector<std::string> out;
  while (!ready.empty()) {
    std::string name = ready.top();
    ready.pop();
    out.push_back(name);
    for (const auto &d : dependents[name])
      if (--pending[d] == 0) ready.push(d);
  }
  return out;
}

SchemaRegistry SchemaRegistry::closure(const std::vector<std::string> &messages) const {
  std::set<std::string> keep;
  std::vector<std::string> stack(messages.begin(), messages.end());
  while (!stack.empty()) {
    std::string m = stack.back();
    stack.pop_back();
    if (!keep.insert(m).second) continue;
    for (const auto &d : at(m).depends_on) stack.push_back(d);
  }
  SchemaRegistry out;
  for (const auto &m : keep) out.schemas_[m] = at(m);
  for (const auto &[src, msg] : binding_)
    if (keep.count(msg)) out.binding_[src] = msg;
  return out;
}

std::string SchemaRegistry::carrier_type_name(std::string_view message_name) const {
  const CarrierSchema *s = find(message_name);
  if (s && !s->source_type.empty()) return "Proto" + s->source_type;
  return "Proto" + std::string(message_name);
}

nlohmann::json SchemaRegistry::to_json() const {
  nlohmann::json messages = nlohmann::json::array();
  for (const auto &name : ordered_messages()) messages.push_back(carrier::to_json(at(name)));
  return {{"messages", messages}};
}

SchemaRegistry SchemaRegistry::from_json(const nlohmann::json &j) {
  SchemaRegistry r;
  try {
    for (const auto &m : j.at("messages")) r.bind(schema_from_json(m));
  } catch (const nlohmann::json::exception &e) {
    throw MalformedInput(std::string("schema registry: ") + e.what());
  }
  return r;
}

std::vector<std::string> split_identifier(std::string_view ident) {
  std::vector<std::string> parts;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) parts.push_back(cur);
    cur.clear();
  };
  auto upper = [](char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; };
  auto lower = [](char c) { return std::islower(static_cast<unsigned char>(c)) != 0; };
  auto digit = [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; };
  for (std::size_t i = 0; i < ident.size(); ++i) {
    char c = ident[i];
    if (c == '_') {
      flush();
      continue;
    }
    if (!cur.empty() && upper(c)) {
      char prev = cur.back();
      bool next_lower = i + 1 < ident.size() && lower(ident[i + 1]);
      if (lower(prev) || digit(prev) || (upper(prev) && next_lower)) flush();
    }
    cur.push_back(c);
  }
  flush();
  return parts;
}

std::string snake_case(std::string_view ident) {
  std::vector<std::string> parts = split_identifier(ident);
  for (auto &p : parts) p = util::to_lower(p);
  return util::join(parts, "_");
}

std::string message_name_for(std::string_view go_type_name) {
  std::string out;
  for (auto part : split_identifier(go_type_name)) {
    part = util::to_lower(part);
    part[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(part[0])));
    out += part;
  }
  return out;
}

std::string pascal_from_snake(std::string_view snake) {
  std::string out;
  bool up = true;
  for (char c : snake) {
    if (c == '_') {
      up = true;
      continue;
    }
    out.push_back(up ? static_cast<char>(std::toupper(static_cast<unsigned char>(c))) : c);
    up = false;
  }
  return out;
}

std::string schema_prompt(const GoTypeDef &src_type, const SchemaRegistry &registry,
                          const SynthesisOptions &options) {
  std::vector<std::string> lib_fields;
  for (const auto &f : src_type.fields) {
    Classified c = classify(f.type, registry);
    if (c.cls == FieldClass::library) lib_fields.push_back("- " + f.name + ": " + f.type.str());
  }
  if (lib_fields.empty()) return {};

  std::vector<std::string> messages;
  for (const auto &[name, _] : registry.schemas()) messages.push_back(name);

  std::string p;
  p += "Choose carrier encodings for the library-typed fields of a Go type.\n";
  p += "Attempt: " + std::to_string(options.attempt) + "\n";
  p += "Go type:\n" + (src_type.source_text.empty() ? render_go_struct(src_type) : src_type.source_text) + "\n";
  p += "Library fields:\n" + util::join(lib_fields, "\n") + "\n";
  p += "Registered messages: " + (messages.empty() ? std::string("none") : util::join(messages, ", ")) + "\n";
  p += "Allowed encodings: bytes, string, int32, int64, uint32, uint64, bool, double, float, message:<Name>.\n";
  p += "Opaque library values are safest as bytes produced by their public serialization APIs.\n";
  if (!options.feedback.empty()) p += "The previous carrier failed validation: " + options.feedback + "\n";
  p += "Answer with a JSON object mapping each library field name to an encoding.\n";
  return p;
}

CarrierSchema synthesize_schema(const GoTypeDef &src_type, const SchemaRegistry &registry,
                                llm::LlmGateway *gateway, const SynthesisOptions &options) {
  CarrierSchema schema;
  schema.message_name = message_name_for(src_type.name);
  schema.source_type = src_type.name;

  std::vector<Classified> classes;
  bool has_library = false;
  for (const auto &f : src_type.fields) {
    Classified c = classify(f.type, registry);
    if (c.cls == FieldClass::rejected)
      throw SchemaRejected(src_type.name + "." + f.name + ": " + c.reason);
    has_library = has_library || c.cls == FieldClass::library;
    classes.push_back(c);
  }

  if (has_library && gateway) {
    std::optional<std::string> answer;
    try {
      answer = gateway->complete(schema_prompt(src_type, registry, options));
    } catch (const ReplayMiss &) {
    } catch (const ProviderError &) {
    }
    if (answer) {
      nlohmann::json choice = extract_json_object(*answer);
      if (!choice.is_object()) throw SchemaRejected("schema answer is not an object");
      for (auto it = choice.begin(); it != choice.end(); ++it) {
        auto pos = std::find_if(src_type.fields.begin(), src_type.fields.end(),
                                [&](const GoField &f) { return f.name == it.key(); });
        if (pos == src_type.fields.end()) throw SchemaRejected("schema answer names unknown field " + it.key());
        Classified &c = classes[static_cast<std::size_t>(pos - src_type.fields.begin())];
        if (c.cls != FieldClass::library) throw SchemaRejected("field " + it.key() + " is not library-typed");
        if (!it.value().is_string()) throw SchemaRejected("encoding for " + it.key() + " must be a string");
        ProtoType t = parse_encoding(it.key(), it.value().get<std::string>(), registry);
        t.repeated = c.type.repeated;
        c.type = t;
      }
    }
  }

  for (std::size_t i = 0; i < src_type.fields.size(); ++i) {
    const GoField &f = src_type.fields[i];
    CarrierField cf;
    cf.name = snake_case(f.name);
    cf.type = classes[i].type;
    cf.number = static_cast<int>(i) + 1;
    cf.optional = classes[i].optional && !cf.type.repeated;
    cf.source_name = f.name;
    cf.source_type = f.type.str();
    if (cf.type.is_message()) schema.depends_on.insert(cf.type.message);
    schema.fields.push_back(std::move(cf));
  }
  for (std::size_t i = 0; i < schema.fields.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (schema.fields[i].name == schema.fields[j].name)
        throw SchemaRejected(src_type.name + ": fields " + schema.fields[j].source_name + " and " +
                             schema.fields[i].source_name + " share the carrier name " + schema.fields[i].name);
  return schema;
}

std::string render_schema(const SchemaRegistry &registry, std::string_view package) {
  std::string out = "syntax = \"proto3\";\n\npackage " + std::string(package) + ";\n";
  for (const auto &name : registry.ordered_messages()) {
    const CarrierSchema &s = registry.at(name);
    out += "\nmessage " + s.message_name + " {\n";
    for (const auto &f : s.fields) out += render_field(f);
    out += "}\n";
  }
  return out;
}

nlohmann::json to_json(const CarrierSchema &schema) {
  nlohmann::json fields = nlohmann::json::array();
  for (const auto &f : schema.fields) {
    fields.push_back({{"name", f.name},
                      {"type", f.type.is_message() ? "message:" + f.type.message : std::string(to_string(f.type.kind))},
                      {"repeated", f.type.repeated},
                      {"optional", f.optional},
                      {"number", f.number},
                      {"source_name", f.source_name},
                      {"source_type", f.source_type}});
  }
  return {{"message", schema.message_name},
          {"source_type", schema.source_type},
          {"fields", fields},
          {"depends_on", std::vector<std::string>(schema.depends_on.begin(), schema.depends_on.end())}};
}

CarrierSchema schema_from_json(const nlohmann::json &j) {
  CarrierSchema s;
  try {
    s.message_name = j.at("message").get<std::string>();
    s.source_type = j.value("source_type", s.message_name);
    for (const auto &f : j.at("fields")) {
      CarrierField cf;
      cf.name = f.at("name").get<std::string>();
      std::string type = f.at("type").get<std::string>();
      if (type.rfind("message:", 0) == 0) {
        cf.type = ProtoType{ScalarKind::message, type.substr(8), false};
      } else {
        auto k = scalar_kind_from_string(type);
        if (!k || *k == ScalarKind::message) throw MalformedInput("unknown carrier type " + type);
        cf.type = ProtoType{*k, "", false};
      }
      cf.type.repeated = f.value("repeated", false);
      cf.optional = f.value("optional", false);
      cf.number = f.at("number").get<int>();
      cf.source_name = f.value("source_name", cf.name);
      cf.source_type = f.value("source_type", "");
      if (cf.type.is_message()) s.depends_on.insert(cf.type.message);
      s.fields.push_back(std::move(cf));
    }
  } catch (const nlohmann::json::exception &e) {
    throw MalformedInput(std::string("carrier schema: ") + e.what());
  }
  return s;
}

}  // namespace xcrate::carrier
