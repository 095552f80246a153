#include "xcrate/carrier/go_types.hpp"

#include <cctype>
#include <set>

#include "xcrate/error.hpp"
#include "xcrate/util/text.hpp"

namespace xcrate::carrier {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class TypeParser {
 public:
  explicit TypeParser(std::string_view text) : text_(text) {}

  GoType parse_all() {
    GoType t = parse();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing input");
    return t;
  }

 private:
  [[noreturn]] void fail(const std::string &what) const {
    throw MalformedInput("go type `" + std::string(text_) + "`: " + what);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool consume(std::string_view tok) {
    skip_ws();
    if (text_.substr(pos_, tok.size()) == tok) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }

  bool consume_keyword(std::string_view kw) {
    skip_ws();
    if (text_.substr(pos_, kw.size()) != kw) return false;
    std::size_t end = pos_ + kw.size();
    if (end < text_.size() && ident_char(text_[end])) return false;
    pos_ = end;
    return true;
  }

  std::string ident() {
    skip_ws();
    if (pos_ >= text_.size() || !ident_start(text_[pos_])) fail("expected identifier");
    std::size_t start = pos_;
    while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  std::shared_ptr<const GoType> sub() { return std::make_shared<const GoType>(parse()); }

  // Skips a balanced bracket group starting at the current opening bracket.
  void skip_group(char open, char close) {
    int depth = 0;
    while (pos_ < text_.size()) {
      char c = text_[pos_++];
      if (c == open) ++depth;
      if (c == close && --depth == 0) return;
    }
    fail("unbalanced brackets");
  }

  GoType parse() {
    skip_ws();
    GoType t;
    if (consume("*")) {
      t.kind = GoType::Kind::pointer;
      t.elem = sub();
      return t;
    }
    if (consume("<-")) {
      if (!consume_keyword("chan")) fail("expected chan");
      t.kind = GoType::Kind::chan;
      t.elem = sub();
      return t;
    }
    if (consume("[")) {
      skip_ws();
      std::size_t start = pos_;
      while (pos_ < text_.size() && text_[pos_] != ']') ++pos_;
      if (pos_ >= text_.size()) fail("unterminated [");
      std::string len = util::trim(text_.substr(start, pos_ - start));
      ++pos_;
      t.kind = len.empty() ? GoType::Kind::slice : GoType::Kind::array;
      t.length = len;
      t.elem = sub();
      return t;
    }
    if (consume_keyword("map")) {
      if (!consume("[")) fail("expected [ after map");
      t.kind = GoType::Kind::map;
      t.key = sub();
      if (!consume("]")) fail("expected ] in map type");
      t.elem = sub();
      return t;
    }
    if (consume_keyword("chan")) {
      consume("<-");
      t.kind = GoType::Kind::chan;
      t.elem = sub();
      return t;
    }
    if (consume_keyword("func")) {
      skip_ws();
      if (pos_ >= text_.size() || text_[pos_] != '(') fail("expected ( after func");
      skip_group('(', ')');
      // Result list: either a parenthesised group or a single type.
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == '(') {
        skip_group('(', ')');
      } else if (pos_ < text_.size()) {
        parse();
      }
      t.kind = GoType::Kind::func;
      t.name = "func";
      return t;
    }
    if (consume_keyword("interface")) {
      skip_ws();
      if (pos_ >= text_.size() || text_[pos_] != '{') fail("expected { after interface");
      skip_group('{', '}');
      t.kind = GoType::Kind::interface_;
      t.name = "interface{}";
      return t;
    }
    if (consume_keyword("struct")) fail("anonymous struct types are not supported");

    std::string first = ident();
    if (consume(".")) {
      t.package = first;
      t.name = ident();
    } else {
      t.name = first;
    }
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '[') fail("generic instantiations are not supported");
    if (t.package.empty() && t.name == "any") {
      t.kind = GoType::Kind::interface_;
      t.name = "interface{}";
    }
    return t;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::string strip_comments_and_tags(std::string_view body) {
  std::string out;
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (body.substr(i, 2) == "//") {
      while (i < body.size() && body[i] != '\n') ++i;
      out.push_back('\n');
    } else if (body.substr(i, 2) == "/*") {
      std::size_t end = body.find("*/", i + 2);
      if (end == std::string_view::npos) throw MalformedInput("unterminated comment in struct");
      i = end + 1;
      out.push_back(' ');
    } else if (body[i] == '`' || body[i] == '"') {
      char q = body[i];
      std::size_t end = body.find(q, i + 1);
      if (end == std::string_view::npos) throw MalformedInput("unterminated tag in struct");
      i = end;
    } else {
      out.push_back(body[i]);
    }
  }
  return out;
}

void parse_field_line(const std::string &line, GoTypeDef &def) {
  std::string text = util::trim(line);
  if (text.empty()) return;

  // Collect a leading identifier list "a, b, c"; if what follows is empty or
  // a `.`, the line is an embedded field instead.
  std::vector<std::string> names;
  std::size_t pos = 0;
  while (true) {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos >= text.size() || !ident_start(text[pos])) break;
    std::size_t start = pos;
    while (pos < text.size() && ident_char(text[pos])) ++pos;
    names.push_back(text.substr(start, pos - start));
    std::size_t save = pos;
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos < text.size() && text[pos] == ',') {
      ++pos;
      continue;
    }
    pos = save;
    break;
  }

  std::string rest = pos < text.size() ? util::trim(text.substr(pos)) : std::string();
  bool embedded = names.empty() || rest.empty() || rest.front() == '.';
  if (embedded) {
    GoField f;
    f.type = parse_go_type(text);
    const GoType *base = &f.type;
    if (base->kind == GoType::Kind::pointer) base = base->elem.get();
    if (base->kind != GoType::Kind::named) throw MalformedInput("invalid embedded field `" + text + "`");
    f.name = base->name;
    f.embedded = true;
    def.fields.push_back(std::move(f));
    return;
  }
  GoType type = parse_go_type(rest);
  for (auto &n : names) def.fields.push_back(GoField{n, type, false});
}

}  // namespace

std::string GoType::str() const {
  switch (kind) {
    case Kind::named:
      return package.empty() ? name : package + "." + name;
    case Kind::pointer:
      return "*" + elem->str();
    case Kind::slice:
      return "[]" + elem->str();
    case Kind::array:
      return "[" + length + "]" + elem->str();
    case Kind::map:
      return "map[" + key->str() + "]" + elem->str();
    case Kind::func:
      return "func(...)";
    case Kind::chan:
      return "chan " + elem->str();
    case Kind::interface_:
      return "interface{}";
  }
  return name;
}

GoType parse_go_type(std::string_view text) { return TypeParser(text).parse_all(); }

bool is_go_builtin(std::string_view name) {
  static const std::set<std::string_view> builtins = {
      "bool",   "string",  "int",     "int8",    "int16",      "int32",     "int64",
      "uint",   "uint8",   "uint16",  "uint32",  "uint64",     "uintptr",   "byte",
      "rune",   "float32", "float64", "complex64", "complex128"};
  return builtins.count(name) > 0;
}

GoTypeDef parse_go_struct(std::string_view source) {
  std::string src = strip_comments_and_tags(source);
  std::size_t type_pos = src.find("type");
  while (type_pos != std::string::npos && type_pos > 0 && ident_char(src[type_pos - 1]))
    type_pos = src.find("type", type_pos + 1);
  if (type_pos == std::string::npos) throw MalformedInput("no type declaration");

  std::size_t pos = type_pos + 4;
  while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
  std::size_t start = pos;
  while (pos < src.size() && ident_char(src[pos])) ++pos;
  GoTypeDef def;
  def.name = src.substr(start, pos - start);
  if (def.name.empty()) throw MalformedInput("type declaration without a name");

  std::size_t s = src.find("struct", pos);
  std::size_t open = s == std::string::npos ? s : src.find('{', s);
  if (open == std::string::npos || util::trim(src.substr(pos, s - pos)) != "")
    throw MalformedInput("type " + def.name + " is not a struct");
  std::size_t close = src.rfind('}');
  if (close == std::string::npos || close < open) throw MalformedInput("unterminated struct " + def.name);

  std::string body = src.substr(open + 1, close - open - 1);
  for (char &c : body)
    if (c == ';') c = '\n';
  for (const auto &line : util::split(body, "\n")) parse_field_line(line, def);

  std::set<std::string> seen;
  for (const auto &f : def.fields)
    if (!seen.insert(f.name).second) throw MalformedInput("duplicate field " + f.name + " in " + def.name);
  def.source_text = util::trim(source);
  return def;
}

std::string render_go_struct(const GoTypeDef &def) {
  std::string out = "type " + def.name + " struct {\n";
  for (const auto &f : def.fields) {
    out += "\t";
    if (!f.embedded) out += f.name + " ";
    out += f.type.str() + "\n";
  }
  out += "}";
  return out;
}

nlohmann::json to_json(const GoTypeDef &def) {
  return {{"name", def.name},
          {"source", def.source_text.empty() ? render_go_struct(def) : def.source_text}};
}

GoTypeDef go_type_def_from_json(const nlohmann::json &j) {
  if (!j.is_object() || !j.contains("source") || !j["source"].is_string())
    throw MalformedInput("go type definition needs a `source` string");
  GoTypeDef def = parse_go_struct(j["source"].get<std::string>());
  if (j.contains("name") && j["name"].get<std::string>() != def.name)
    throw MalformedInput("type name `" + j["name"].get<std::string>() + "` does not match source `" +
                         def.name + "`");
  return def;
}

namespace {

// Index just past the bracket matching the one at `open`.
std::size_t match_bracket(std::string_view s, std::size_t open) {
  char o = s[open];
  char c = o == '(' ? ')' : o == '[' ? ']' : '}';
  int depth = 0;
  for (std::size_t i = open; i < s.size(); ++i) {
    if (s[i] == o) ++depth;
    if (s[i] == c && --depth == 0) return i + 1;
  }
  throw MalformedInput("unbalanced `" + std::string(1, o) + "` in go declaration");
}

std::vector<std::string> split_top_level(std::string_view s) {
  std::vector<std::string> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '(' || c == '[' || c == '{') ++depth;
    if (c == ')' || c == ']' || c == '}') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(util::trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  std::string last = util::trim(s.substr(start));
  if (!last.empty() || !out.empty()) out.push_back(last);
  return out;
}

bool is_identifier(std::string_view s) {
  if (s.empty() || !ident_start(s[0])) return false;
  for (char c : s)
    if (!ident_char(c)) return false;
  return true;
}

std::vector<GoParam> parse_param_list(std::string_view list) {
  std::vector<std::string> pieces = split_top_level(list);
  std::vector<GoParam> out;
  if (pieces.empty()) return out;
  bool named = false;
  for (const auto &p : pieces) {
    if (p.find("...") != std::string::npos) throw MalformedInput("variadic parameters are not supported: " + p);
    std::size_t sp = p.find_first_of(" \t");
    if (sp != std::string::npos && is_identifier(p.substr(0, sp))) named = true;
  }
  if (!named) {
    for (std::size_t i = 0; i < pieces.size(); ++i)
      out.push_back(GoParam{"p" + std::to_string(i), parse_go_type(pieces[i])});
    return out;
  }
  std::vector<std::string> pending;
  for (const auto &p : pieces) {
    std::size_t sp = p.find_first_of(" \t");
    if (sp == std::string::npos) {
      if (!is_identifier(p)) throw MalformedInput("malformed parameter `" + p + "`");
      pending.push_back(p);
      continue;
    }
    GoType t = parse_go_type(util::trim(p.substr(sp)));
    pending.push_back(p.substr(0, sp));
    for (auto &n : pending) out.push_back(GoParam{n, t});
    pending.clear();
  }
  if (!pending.empty()) throw MalformedInput("parameters without a type: " + util::join(pending, ", "));
  return out;
}

}  // namespace

std::string GoFunction::id() const {
  if (!receiver) return name;
  const GoType &t = receiver->type.kind == GoType::Kind::pointer ? *receiver->type.elem : receiver->type;
  return t.name + "." + name;
}

GoFunction parse_go_func(std::string_view source) {
  std::string src = strip_comments_and_tags(source);
  std::size_t pos = src.find("func");
  while (pos != std::string::npos && ((pos > 0 && ident_char(src[pos - 1])) ||
                                      (pos + 4 < src.size() && ident_char(src[pos + 4]))))
    pos = src.find("func", pos + 1);
  if (pos == std::string::npos) throw MalformedInput("no func declaration");
  std::string_view s(src);
  pos += 4;
  auto skip = [&] {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  };
  GoFunction fn;
  skip();
  if (pos < s.size() && s[pos] == '(') {
    std::size_t end = match_bracket(s, pos);
    auto recv = parse_param_list(s.substr(pos + 1, end - pos - 2));
    if (recv.size() != 1) throw MalformedInput("method needs exactly one receiver");
    fn.receiver = recv[0];
    pos = end;
    skip();
  }
  std::size_t start = pos;
  while (pos < s.size() && ident_char(s[pos])) ++pos;
  fn.name = std::string(s.substr(start, pos - start));
  if (fn.name.empty()) throw MalformedInput("func without a name");
  skip();
  if (pos < s.size() && s[pos] == '[') throw MalformedInput("generic functions are not supported: " + fn.name);
  if (pos >= s.size() || s[pos] != '(') throw MalformedInput("func " + fn.name + " has no parameter list");
  std::size_t end = match_bracket(s, pos);
  fn.params = parse_param_list(s.substr(pos + 1, end - pos - 2));
  pos = end;
  skip();

  std::size_t body = s.find('{', pos);
  std::string results_text;
  if (pos < s.size() && s[pos] == '(') {
    std::size_t rend = match_bracket(s, pos);
    results_text = std::string(s.substr(pos + 1, rend - pos - 2));
  } else {
    results_text = util::trim(s.substr(pos, body == std::string::npos ? std::string_view::npos : body - pos));
    // `func() struct{...}` style results are not supported; a brace ends the type.
  }
  std::vector<GoType> results;
  for (auto &p : parse_param_list(results_text)) results.push_back(p.type);
  if (!results.empty() && results.back().kind == GoType::Kind::named && results.back().package.empty() &&
      results.back().name == "error") {
    fn.returns_error = true;
    results.pop_back();
  }
  for (const auto &r : results)
    if (r.kind == GoType::Kind::named && r.package.empty() && r.name == "error")
      throw MalformedInput("func " + fn.name + ": `error` is only supported as the last result");
  fn.results = std::move(results);
  fn.source_text = util::trim(source);
  return fn;
}

nlohmann::json to_json(const GoFunction &fn) { return {{"id", fn.id()}, {"source", fn.source_text}}; }

GoFunction go_function_from_json(const nlohmann::json &j) {
  if (!j.is_object() || !j.contains("source") || !j["source"].is_string())
    throw MalformedInput("go function needs a `source` string");
  return parse_go_func(j["source"].get<std::string>());
}

}  // namespace xcrate::carrier
