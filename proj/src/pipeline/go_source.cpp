#include "xcrate/pipeline/go_source.hpp"

#include <algorithm>
#include <functional>
#include <regex>

#include "xcrate/error.hpp"
#include "xcrate/util/json_file.hpp"
#include "xcrate/util/text.hpp"

namespace xcrate::pipeline {

namespace {

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Copy of `text` with comments and literal contents blanked out, so that
// structural scanning never sees braces inside strings. Offsets are kept.
std::string mask(std::string_view text) {
  std::string out(text);
  for (std::size_t i = 0; i < out.size(); ++i) {
    char c = out[i];
    if (c == '/' && i + 1 < out.size() && out[i + 1] == '/') {
      while (i < out.size() && out[i] != '\n') out[i++] = ' ';
    } else if (c == '/' && i + 1 < out.size() && out[i + 1] == '*') {
      std::size_t end = out.find("*/", i + 2);
      if (end == std::string::npos) throw MalformedInput("unterminated comment");
      for (; i < end + 2; ++i)
        if (out[i] != '\n') out[i] = ' ';
      --i;
    } else if (c == '"' || c == '\'' || c == '`') {
      std::size_t j = i + 1;
      while (j < out.size() && out[j] != c) {
        if (c != '`' && out[j] == '\\') ++j;
        if (c != '`' && j < out.size() && out[j] == '\n') throw MalformedInput("unterminated literal");
        ++j;
      }
      if (j >= out.size()) throw MalformedInput("unterminated literal");
      for (std::size_t k = i + 1; k < j; ++k)
        if (out[k] != '\n') out[k] = 'x';
      i = j;
    }
  }
  return out;
}

std::size_t close_brace(const std::string &masked, std::size_t open) {
  int depth = 0;
  for (std::size_t i = open; i < masked.size(); ++i) {
    if (masked[i] == '{') ++depth;
    if (masked[i] == '}' && --depth == 0) return i;
  }
  throw MalformedInput("unbalanced braces");
}

void parse_imports(const std::string &masked, std::string_view text, GoSourceFile &out) {
  static const std::regex spec(R"re(^\s*(\w+|\.|_)?\s*"([^"]+)"\s*$)re");
  auto add = [&](const std::string &line) {
    std::smatch m;
    std::string t = util::trim(line);
    if (t.empty()) return;
    if (!std::regex_match(t, m, spec)) throw MalformedInput("bad import spec `" + t + "`");
    std::string path = m[2].str();
    std::string alias = m[1].matched ? m[1].str() : path.substr(path.rfind('/') == std::string::npos ? 0 : path.rfind('/') + 1);
    out.imports[alias] = path;
  };
  std::size_t pos = 0;
  static const std::regex kw(R"(\bimport\b)");
  for (auto it = std::sregex_iterator(masked.begin(), masked.end(), kw); it != std::sregex_iterator(); ++it) {
    pos = static_cast<std::size_t>(it->position(0)) + 6;
    while (pos < masked.size() && std::isspace(static_cast<unsigned char>(masked[pos]))) ++pos;
    if (pos < masked.size() && masked[pos] == '(') {
      std::size_t end = masked.find(')', pos);
      if (end == std::string::npos) throw MalformedInput("unterminated import block");
      std::string block(text.substr(pos + 1, end - pos - 1));
      for (const auto &line : util::split(block, "\n")) {
        std::string l = line;
        if (auto c = l.find("//"); c != std::string::npos) l = l.substr(0, c);
        add(l);
      }
    } else {
      std::size_t end = masked.find('\n', pos);
      add(std::string(text.substr(pos, end == std::string::npos ? std::string::npos : end - pos)));
    }
  }
}

void collect_refs(const std::string &masked_body, const std::string &body, GoFunctionDecl &fn,
                  const std::map<std::string, std::string> &imports) {
  static const std::regex sel(R"(\b([A-Za-z_]\w*)\.([A-Za-z_]\w*))");
  for (auto it = std::sregex_iterator(masked_body.begin(), masked_body.end(), sel); it != std::sregex_iterator();
       ++it) {
    std::size_t p = static_cast<std::size_t>(it->position(0));
    if (p > 0 && (masked_body[p - 1] == '.' || ident_char(masked_body[p - 1]))) continue;
    if (auto imp = imports.find((*it)[1].str()); imp != imports.end())
      fn.package_refs.insert(imp->second + "." + (*it)[2].str());
  }
  static const std::regex call(R"(([A-Za-z_]\w*)\s*\()");
  for (auto it = std::sregex_iterator(masked_body.begin(), masked_body.end(), call); it != std::sregex_iterator();
       ++it)
    fn.called.insert((*it)[1].str());
  (void)body;
}

}  // namespace

const carrier::GoTypeDef *GoSourceFile::type(std::string_view name) const {
  for (const auto &t : types)
    if (t.name == name) return &t;
  return nullptr;
}

const GoFunctionDecl *GoSourceFile::function(std::string_view id) const {
  for (const auto &f : functions)
    if (f.fn.id() == id) return &f;
  return nullptr;
}

GoSourceFile scan_go_source(std::string_view text) {
  std::string masked = mask(text);
  GoSourceFile out;
  static const std::regex pkg(R"(\bpackage\s+(\w+))");
  std::smatch m;
  if (std::regex_search(masked, m, pkg)) out.package = m[1].str();
  parse_imports(masked, text, out);

  int depth = 0;
  for (std::size_t i = 0; i < masked.size(); ++i) {
    char c = masked[i];
    if (c == '{') ++depth;
    if (c == '}') --depth;
    if (depth != 0 || (i > 0 && ident_char(masked[i - 1]))) continue;
    bool is_type = masked.compare(i, 5, "type ") == 0;
    bool is_func = masked.compare(i, 5, "func ") == 0 || masked.compare(i, 5, "func(") == 0;
    if (!is_type && !is_func) continue;
    std::size_t open = masked.find('{', i);
    std::size_t nl = masked.find('\n', i);
    if (open == std::string::npos) break;
    if (is_type) {
      std::string header = masked.substr(i, open - i);
      if (header.find("struct") == std::string::npos || (nl != std::string::npos && nl < open)) continue;
      std::size_t end = close_brace(masked, open);
      out.types.push_back(carrier::parse_go_struct(text.substr(i, end + 1 - i)));
      i = end;
      continue;
    }
    // A func body starts at the first brace not inside the signature's
    // parentheses or brackets.
    int paren = 0;
    std::size_t body_open = std::string::npos;
    for (std::size_t j = i; j < masked.size(); ++j) {
      if (masked[j] == '(' || masked[j] == '[') ++paren;
      if (masked[j] == ')' || masked[j] == ']') --paren;
      if (masked[j] == '{' && paren == 0) {
        if (masked.compare(j >= 9 ? j - 9 : 0, 9, "interface") == 0 || masked.compare(j >= 6 ? j - 6 : 0, 6, "struct") == 0) {
          j = close_brace(masked, j);
          continue;
        }
        body_open = j;
        break;
      }
    }
    if (body_open == std::string::npos) throw MalformedInput("func without a body");
    std::size_t end = close_brace(masked, body_open);
    GoFunctionDecl decl;
    decl.fn = carrier::parse_go_func(text.substr(i, end + 1 - i));
    decl.body = std::string(text.substr(body_open + 1, end - body_open - 1));
    collect_refs(masked.substr(body_open + 1, end - body_open - 1), decl.body, decl, out.imports);
    out.functions.push_back(std::move(decl));
    i = end;
  }
  if (depth != 0) throw MalformedInput("unbalanced braces");
  return out;
}

GoSourceFile scan_go_dir(const std::filesystem::path &dir) {
  std::vector<std::filesystem::path> files;
  for (const auto &e : std::filesystem::directory_iterator(dir)) {
    std::string name = e.path().filename().string();
    if (e.is_regular_file() && e.path().extension() == ".go" && name.size() > 3 && !name.ends_with("_test.go"))
      files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  GoSourceFile out;
  for (const auto &f : files) {
    GoSourceFile one = scan_go_source(util::read_file(f));
    if (!out.package.empty() && one.package != out.package)
      throw MalformedInput(f.string() + " declares package " + one.package + ", expected " + out.package);
    out.package = one.package;
    for (auto &[a, p] : one.imports) out.imports[a] = p;
    for (auto &t : one.types) out.types.push_back(std::move(t));
    for (auto &fn : one.functions) out.functions.push_back(std::move(fn));
  }
  return out;
}

namespace {

// Strongly connected components, dependencies first (Tarjan emits them in
// that order); members of one component keep their position in `nodes`.
std::vector<std::string> post_order(const std::vector<std::string> &nodes,
                                    const std::function<std::vector<std::string>(const std::string &)> &edges) {
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < nodes.size(); ++i) position.emplace(nodes[i], i);
  std::map<std::string, std::size_t> index, low;
  std::set<std::string> on_stack;
  std::vector<std::string> stack, out;
  std::size_t counter = 0;
  std::function<void(const std::string &)> visit = [&](const std::string &n) {
    index[n] = low[n] = counter++;
    stack.push_back(n);
    on_stack.insert(n);
    for (const auto &d : edges(n)) {
      if (d == n) continue;
      if (!index.count(d)) {
        visit(d);
        low[n] = std::min(low[n], low[d]);
      } else if (on_stack.count(d)) {
        low[n] = std::min(low[n], index[d]);
      }
    }
    if (low[n] != index[n]) return;
    std::vector<std::string> component;
    std::string m;
    do {
      m = stack.back();
      stack.pop_back();
      on_stack.erase(m);
      component.push_back(m);
    } while (m != n);
    std::sort(component.begin(), component.end(),
              [&](const std::string &x, const std::string &y) { return position[x] < position[y]; });
    out.insert(out.end(), component.begin(), component.end());
  };
  for (const auto &n : nodes)
    if (!index.count(n)) visit(n);
  return out;
}

void user_types_in(const carrier::GoType &t, std::vector<std::string> &out) {
  if (t.elem) user_types_in(*t.elem, out);
  if (t.key) user_types_in(*t.key, out);
  if (t.kind == carrier::GoType::Kind::named && t.package.empty() && !carrier::is_go_builtin(t.name))
    out.push_back(t.name);
}

}  // namespace

std::vector<std::string> function_order(const GoSourceFile &src) {
  std::vector<std::string> ids;
  for (const auto &f : src.functions) ids.push_back(f.fn.id());
  return post_order(ids, [&](const std::string &id) {
    std::vector<std::string> deps;
    const GoFunctionDecl *f = src.function(id);
    for (const auto &g : src.functions)
      if (g.fn.id() != id && f->called.count(g.fn.name)) deps.push_back(g.fn.id());
    return deps;
  });
}

std::vector<std::string> type_order(const GoSourceFile &src) {
  std::vector<std::string> names;
  for (const auto &t : src.types) names.push_back(t.name);
  return post_order(names, [&](const std::string &name) {
    std::vector<std::string> deps;
    for (const auto &f : src.type(name)->fields) user_types_in(f.type, deps);
    std::vector<std::string> known;
    for (const auto &d : deps)
      if (src.type(d)) known.push_back(d);
    return known;
  });
}

}  // namespace xcrate::pipeline
