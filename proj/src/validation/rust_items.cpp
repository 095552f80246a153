#include "xcrate/validation/rust_items.hpp"

#include <cctype>
#include <functional>
#include <set>

#include "xcrate/error.hpp"
#include "xcrate/util/text.hpp"

namespace xcrate::validation {

namespace {

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Position after a string or char literal starting at `i`, or npos when `i`
// does not start one (a lifetime, for instance).
std::size_t skip_literal(std::string_view s, std::size_t i) {
  if (s[i] == '"') {
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      if (s[j] == '\\') {
        ++j;
      } else if (s[j] == '"') {
        return j + 1;
      }
    }
    return s.size();
  }
  if (s[i] == '\'') {
    if (i + 2 < s.size() && s[i + 1] == '\\') {
      std::size_t end = s.find('\'', i + 2);
      return end == std::string_view::npos ? std::string_view::npos : end + 1;
    }
    if (i + 2 < s.size() && s[i + 2] == '\'') return i + 3;
  }
  return std::string_view::npos;
}

std::string squeeze(std::string_view text) {
  std::string c = util::collapse_whitespace(text);
  std::string out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] == ' ' && (out.empty() || !ident_char(out.back()) || i + 1 >= c.size() || !ident_char(c[i + 1])))
      continue;
    out.push_back(c[i]);
  }
  return out;
}

std::vector<std::string> split_commas(std::string_view s) {
  std::vector<std::string> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '(' || c == '[' || c == '{' || c == '<') ++depth;
    if (c == ')' || c == ']' || c == '}' || (c == '>' && (i == 0 || s[i - 1] != '-'))) --depth;
    if (c == ',' && depth == 0) {
      out.push_back(util::trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  std::string last = util::trim(s.substr(start));
  if (!last.empty()) out.push_back(last);
  return out;
}

// Index of the character closing the bracket opened at `open`.
std::size_t close_of(std::string_view s, std::size_t open) {
  char o = s[open];
  char c = o == '(' ? ')' : o == '[' ? ']' : o == '<' ? '>' : '}';
  int depth = 0;
  for (std::size_t i = open; i < s.size(); ++i) {
    if (s[i] == '"' || s[i] == '\'') {
      std::size_t end = skip_literal(s, i);
      if (end != std::string_view::npos) {
        i = end - 1;
        continue;
      }
    }
    if (s[i] == o) ++depth;
    if (s[i] == c && !(c == '>' && i > 0 && s[i - 1] == '-') && --depth == 0) return i;
  }
  return std::string_view::npos;
}

bool keyword_at(std::string_view s, std::size_t i, std::string_view kw) {
  if (s.substr(i, kw.size()) != kw) return false;
  if (i > 0 && ident_char(s[i - 1])) return false;
  return i + kw.size() >= s.size() || !ident_char(s[i + kw.size()]);
}

std::string strip_generics(std::string_view t) {
  std::string out;
  int depth = 0;
  for (char c : t) {
    if (c == '<') ++depth;
    if (depth == 0) out.push_back(c);
    if (c == '>') --depth;
  }
  return util::trim(out);
}

// Type named by an impl header `impl<..> Trait for Type where ..` / `impl Type`.
std::string impl_target(std::string_view header) {
  std::string h = util::trim(header.substr(4));
  if (!h.empty() && h[0] == '<') {
    std::size_t end = close_of(h, 0);
    h = end == std::string::npos ? "" : util::trim(h.substr(end + 1));
  }
  std::size_t where = h.find(" where ");
  if (where != std::string::npos) h = h.substr(0, where);
  std::size_t f = h.find(" for ");
  if (f != std::string::npos) h = h.substr(f + 5);
  return strip_generics(h);
}

std::optional<RustFnSig> parse_sig(std::string_view decl, std::optional<std::string> self_type) {
  // decl starts at `fn`.
  std::size_t pos = 2;
  while (pos < decl.size() && std::isspace(static_cast<unsigned char>(decl[pos]))) ++pos;
  std::size_t start = pos;
  while (pos < decl.size() && ident_char(decl[pos])) ++pos;
  RustFnSig sig;
  sig.name = std::string(decl.substr(start, pos - start));
  if (sig.name.empty()) return std::nullopt;
  sig.self_type = std::move(self_type);
  while (pos < decl.size() && std::isspace(static_cast<unsigned char>(decl[pos]))) ++pos;
  if (pos < decl.size() && decl[pos] == '<') {
    std::size_t end = close_of(decl, pos);
    if (end == std::string_view::npos) return std::nullopt;
    pos = end + 1;
  }
  std::size_t open = decl.find('(', pos);
  if (open == std::string_view::npos) return std::nullopt;
  std::size_t close = close_of(decl, open);
  if (close == std::string_view::npos) return std::nullopt;
  for (const auto &p : split_commas(decl.substr(open + 1, close - open - 1))) {
    std::string sp = squeeze(p);
    if (sp.find(':') == std::string::npos && sp.size() >= 4 && sp.substr(sp.size() - 4) == "self") {
      bool ref = sp[0] == '&';
      bool mut = sp.find("mut") != std::string::npos;
      sig.receiver = ref ? (mut ? "&mut self" : "&self") : "self";
      continue;
    }
    std::size_t colon = p.find(':');
    if (colon == std::string::npos) return std::nullopt;
    std::string name = util::trim(p.substr(0, colon));
    if (name.rfind("mut ", 0) == 0) name = util::trim(name.substr(4));
    sig.params.push_back(RustParam{name, squeeze(p.substr(colon + 1))});
  }
  std::string_view rest = decl.substr(close + 1);
  std::size_t arrow = rest.find("->");
  if (arrow != std::string_view::npos) {
    std::string ret(rest.substr(arrow + 2));
    std::size_t where = ret.find("where");
    while (where != std::string::npos && !keyword_at(ret, where, "where")) where = ret.find("where", where + 1);
    if (where != std::string::npos) ret = ret.substr(0, where);
    sig.return_type = squeeze(ret);
    if (sig.return_type == "()") sig.return_type.clear();
  }
  return sig;
}

struct Scanned {
  std::vector<RustFnSig> fns;
  std::vector<std::pair<std::string, std::string>> structs;  // name, body between braces
};

Scanned scan(std::string_view raw) {
  std::string text = strip_rust_comments(raw);
  std::string_view s(text);
  Scanned out;
  // Item boundaries at top level and one level into impl blocks.
  std::function<void(std::size_t, std::size_t, std::optional<std::string>)> walk =
      [&](std::size_t begin, std::size_t end, std::optional<std::string> self_type) {
        std::size_t item = begin;
        for (std::size_t i = begin; i < end; ++i) {
          char c = s[i];
          if (c == '"' || c == '\'') {
            std::size_t lit = skip_literal(s, i);
            if (lit != std::string_view::npos) {
              i = lit - 1;
              continue;
            }
          }
          if (c == ';') {
            item = i + 1;
            continue;
          }
          if (c == '{') {
            std::size_t close = close_of(s, i);
            if (close == std::string_view::npos || close > end) close = end;
            std::string header = util::trim(s.substr(item, i - item));
            // Drop attributes and visibility.
            while (!header.empty() && header[0] == '#') {
              std::size_t e = close_of(header, header.find('['));
              header = e == std::string::npos ? "" : util::trim(header.substr(e + 1));
            }
            for (const char *vis : {"pub(crate) ", "pub "})
              if (header.rfind(vis, 0) == 0) header = util::trim(header.substr(std::string_view(vis).size()));
            if (header.rfind("unsafe ", 0) == 0) header = util::trim(header.substr(7));
            std::string_view h(header);
            if (keyword_at(h, 0, "impl") && !self_type) {
              walk(i + 1, close, impl_target(h));
            } else if (keyword_at(h, 0, "fn") || h.rfind("const fn", 0) == 0 || h.rfind("async fn", 0) == 0) {
              std::size_t f = h.find("fn");
              if (auto sig = parse_sig(h.substr(f), self_type)) out.fns.push_back(std::move(*sig));
            } else if (keyword_at(h, 0, "struct") && !self_type) {
              std::string name = strip_generics(util::trim(h.substr(6)));
              std::size_t w = name.find(" where");
              if (w != std::string::npos) name = name.substr(0, w);
              out.structs.emplace_back(util::trim(name), std::string(s.substr(i + 1, close - i - 1)));
            } else if (keyword_at(h, 0, "mod") && !self_type) {
              // Nested modules are not scanned: their items are not in scope unqualified.
            }
            i = close;
            item = close + 1;
          }
        }
      };
  walk(0, s.size(), std::nullopt);
  return out;
}

void expand_tree(const std::string &prefix, std::string_view tree, std::vector<std::string> &out) {
  std::string t = squeeze(tree);
  std::size_t brace = t.find('{');
  if (brace == std::string::npos) {
    std::string path = t;
    std::size_t as = tree.find(" as ");
    std::string full;
    if (as != std::string_view::npos) {
      std::string base = squeeze(tree.substr(0, as));
      std::string alias = squeeze(tree.substr(as + 4));
      full = (prefix.empty() ? base : prefix + "::" + base) + " as " + alias;
    } else if (path == "self") {
      full = prefix;
    } else {
      full = prefix.empty() ? path : prefix + "::" + path;
    }
    if (!full.empty()) out.push_back(full);
    return;
  }
  std::string head = t.substr(0, brace);
  if (head.size() >= 2 && head.substr(head.size() - 2) == "::") head.resize(head.size() - 2);
  std::size_t close = close_of(t, brace);
  if (close == std::string::npos) throw MalformedInput("unbalanced use tree: " + std::string(tree));
  std::string next = prefix.empty() ? head : head.empty() ? prefix : prefix + "::" + head;
  // `as` was squeezed into `Xasy`; restore it from the original spelling per element.
  std::string inner_raw;
  {
    std::size_t ob = tree.find('{');
    std::size_t cb = close_of(tree, ob);
    inner_raw = std::string(tree.substr(ob + 1, cb - ob - 1));
  }
  for (const auto &part : split_commas(inner_raw)) expand_tree(next, part, out);
}

}  // namespace

std::string RustFnSig::str() const {
  std::string out = "fn " + name + "(";
  std::vector<std::string> parts;
  if (!receiver.empty()) parts.push_back(receiver);
  for (const auto &p : params) parts.push_back(p.name + ": " + p.type);
  out += util::join(parts, ", ") + ")";
  if (!return_type.empty()) out += " -> " + return_type;
  if (self_type) out = "impl " + *self_type + " { " + out + " }";
  return out;
}

std::vector<RustFnSig> list_rust_fns(std::string_view source) { return scan(source).fns; }

std::optional<RustFnSig> find_rust_fn(std::string_view source, std::string_view name) {
  for (auto &f : list_rust_fns(source))
    if (f.name == name) return f;
  return std::nullopt;
}

ReturnShape return_shape(const RustFnSig &sig) {
  ReturnShape shape;
  std::string t = sig.return_type;
  auto starts = [&](const char *p) { return t.rfind(p, 0) == 0; };
  if ((starts("Result<") || starts("std::result::Result<") || starts("anyhow::Result<")) && t.back() == '>') {
    shape.is_result = true;
    std::size_t open = t.find('<');
    auto args = split_commas(std::string_view(t).substr(open + 1, t.size() - open - 2));
    t = args.empty() ? "" : args[0];
  }
  if (t.empty() || t == "()") return shape;
  if (t.front() == '(' && close_of(t, 0) == t.size() - 1) {
    shape.components = split_commas(std::string_view(t).substr(1, t.size() - 2));
  } else {
    shape.components.push_back(t);
  }
  return shape;
}

bool is_reference(std::string_view param_type) { return !param_type.empty() && param_type[0] == '&'; }

std::string owned_type(std::string_view param_type) {
  std::string t = squeeze(param_type);
  if (t.rfind("impl", 0) == 0 && (t.size() == 4 || !ident_char(t[4])))
    throw SignatureMismatch("parameter type `" + t + "` cannot be materialized");
  if (t.empty() || t[0] != '&') return t;
  t = t.substr(1);
  if (!t.empty() && t[0] == '\'') {
    std::size_t i = 1;
    while (i < t.size() && ident_char(t[i])) ++i;
    t = util::trim(t.substr(i));
  }
  if (t.rfind("mut", 0) == 0 && (t.size() == 3 || !ident_char(t[3])))
    throw SignatureMismatch("mutable reference parameters are not supported: &" + t);
  if (t == "str") return "String";
  if (t.size() > 2 && t.front() == '[' && t.back() == ']' && t.find(';') == std::string::npos)
    return "Vec<" + t.substr(1, t.size() - 2) + ">";
  return t;
}

std::optional<RustStruct> find_rust_struct(std::string_view source, std::string_view name) {
  for (const auto &[n, body] : scan(source).structs) {
    if (n != name) continue;
    RustStruct st;
    st.name = n;
    for (const auto &f : split_commas(body)) {
      std::string field = util::trim(f);
      while (!field.empty() && field[0] == '#') {
        std::size_t e = close_of(field, field.find('['));
        field = e == std::string::npos ? "" : util::trim(field.substr(e + 1));
      }
      for (const char *vis : {"pub(crate) ", "pub "})
        if (field.rfind(vis, 0) == 0) field = util::trim(field.substr(std::string_view(vis).size()));
      std::size_t colon = field.find(':');
      if (colon == std::string::npos) continue;
      st.fields.push_back(RustParam{util::trim(field.substr(0, colon)), squeeze(field.substr(colon + 1))});
    }
    return st;
  }
  return std::nullopt;
}

std::string strip_rust_comments(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' || s[i] == '\'') {
      std::size_t end = skip_literal(s, i);
      if (end != std::string_view::npos) {
        out.append(s.substr(i, end - i));
        i = end - 1;
        continue;
      }
    }
    if (s.substr(i, 2) == "//") {
      while (i < s.size() && s[i] != '\n') ++i;
      out.push_back('\n');
    } else if (s.substr(i, 2) == "/*") {
      int depth = 1;
      i += 2;
      while (i < s.size() && depth > 0) {
        if (s.substr(i, 2) == "/*") {
          ++depth;
          ++i;
        } else if (s.substr(i, 2) == "*/") {
          --depth;
          ++i;
        }
        ++i;
      }
      --i;
      out.push_back(' ');
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

std::vector<std::string> expand_use(std::string_view use_statement) {
  std::string t = util::trim(use_statement);
  for (const char *vis : {"pub(crate) ", "pub "})
    if (t.rfind(vis, 0) == 0) t = util::trim(t.substr(std::string_view(vis).size()));
  if (t.rfind("use", 0) != 0) throw MalformedInput("not a use statement: " + t);
  t = util::trim(t.substr(3));
  if (!t.empty() && t.back() == ';') t.pop_back();
  std::vector<std::string> out;
  expand_tree("", util::trim(t), out);
  return out;
}

RustSource split_uses(std::string_view raw) {
  std::string text = strip_rust_comments(raw);
  std::string_view s(text);
  RustSource out;
  int depth = 0;
  std::size_t item = 0;
  std::string body;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '"' || c == '\'') {
      std::size_t lit = skip_literal(s, i);
      if (lit != std::string_view::npos) {
        body.append(s.substr(i, lit - i));
        i = lit - 1;
        continue;
      }
    }
    if (depth == 0 && std::isspace(static_cast<unsigned char>(c)) && item == i) {
      body.push_back(c);
      item = i + 1;
      continue;
    }
    if (depth == 0 && item == i) {
      std::size_t p = i;
      std::string_view rest = s.substr(p);
      bool is_use = keyword_at(s, p, "use") || ((rest.rfind("pub use", 0) == 0 || rest.rfind("pub(crate) use", 0) == 0));
      if (is_use) {
        std::size_t semi = s.find(';', p);
        if (semi == std::string_view::npos) throw MalformedInput("unterminated use statement");
        for (auto &u : expand_use(s.substr(p, semi - p + 1))) out.uses.push_back(u);
        i = semi;
        item = semi + 1;
        continue;
      }
    }
    if (c == '{') ++depth;
    if (c == '}') --depth;
    body.push_back(c);
    if (depth == 0 && (c == ';' || c == '}')) item = i + 1;
  }
  out.body = body;
  return out;
}

std::string combine_rust_units(const std::vector<std::string> &units) {
  std::vector<std::string> uses;
  std::set<std::string> seen;
  std::string body;
  for (const auto &u : units) {
    RustSource src = split_uses(u);
    for (auto &p : src.uses)
      if (seen.insert(p).second) uses.push_back(p);
    std::string b = util::trim(src.body);
    if (!b.empty()) body += b + "\n\n";
  }
  std::string out;
  for (const auto &p : uses) out += "use " + p + ";\n";
  if (!uses.empty()) out += "\n";
  return out + body;
}

std::string extract_code_block(std::string_view response, std::string_view lang) {
  std::optional<std::string> first;
  std::size_t pos = 0;
  while (true) {
    std::size_t open = response.find("```", pos);
    if (open == std::string_view::npos) break;
    std::size_t eol = response.find('\n', open);
    if (eol == std::string_view::npos) break;
    std::string tag = util::trim(response.substr(open + 3, eol - open - 3));
    std::size_t close = response.find("```", eol);
    if (close == std::string_view::npos) close = response.size();
    std::string code(response.substr(eol + 1, close - eol - 1));
    if (tag == lang) return code;
    if (!first) first = code;
    pos = close + 3;
    if (pos >= response.size()) break;
  }
  return first ? *first : std::string(response);
}

}  // namespace xcrate::validation
