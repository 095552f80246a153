#pragma once

// Minimal model of Go struct definitions: enough to classify each field for
// carrier schema synthesis.

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace xcrate::carrier {

struct GoType {
  enum class Kind { named, pointer, slice, array, map, func, chan, interface_ };

  Kind kind = Kind::named;
  std::string package;  // qualifier for `pkg.Name`, empty otherwise
  std::string name;     // named types only
  std::string length;   // arrays only
  std::shared_ptr<const GoType> elem;  // pointer, slice, array, map value, chan
  std::shared_ptr<const GoType> key;   // map key

  bool is_qualified() const { return kind == Kind::named && !package.empty(); }
  std::string str() const;
};

/// Throws MalformedInput on text that is not a Go type expression.
GoType parse_go_type(std::string_view text);

/// Predeclared Go types such as `int32` or `string` (not `error`).
bool is_go_builtin(std::string_view name);

struct GoField {
  std::string name;
  GoType type;
  bool embedded = false;
};

struct GoTypeDef {
  std::string name;
  std::vector<GoField> fields;
  std::string source_text;  // original declaration, used in prompts
};

/// Parses `type Name struct { ... }`. Field tags and comments are ignored.
/// Throws MalformedInput.
GoTypeDef parse_go_struct(std::string_view source);

/// Renders a canonical `type Name struct {...}` declaration.
std::string render_go_struct(const GoTypeDef &def);

nlohmann::json to_json(const GoTypeDef &def);
GoTypeDef go_type_def_from_json(const nlohmann::json &j);

struct GoParam {
  std::string name;
  GoType type;
};

struct GoFunction {
  std::string name;
  std::optional<GoParam> receiver;
  std::vector<GoParam> params;
  std::vector<GoType> results;  // a trailing `error` is not listed here
  bool returns_error = false;
  std::string source_text;

  /// `Name`, or `Recv.Name` for methods (pointer receivers included).
  std::string id() const;
};

/// Parses the declaration header of `func ...`; the body, if present, is kept
/// in source_text only. Unnamed parameters are called p0, p1, ... Throws
/// MalformedInput, including for variadic parameters.
GoFunction parse_go_func(std::string_view source);

nlohmann::json to_json(const GoFunction &fn);
GoFunction go_function_from_json(const nlohmann::json &j);

}  // namespace xcrate::carrier
