#pragma once

// Lightweight structural reading of generated Rust source: top-level `use`
// statements, struct fields and function signatures. No type checking.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace xcrate::validation {

struct RustParam {
  std::string name;
  std::string type;

  friend bool operator==(const RustParam &, const RustParam &) = default;
};

struct RustFnSig {
  std::string name;
  std::optional<std::string> self_type;  // set for functions inside `impl T`
  std::string receiver;                  // "", "&self", "&mut self" or "self"
  std::vector<RustParam> params;         // receiver excluded
  std::string return_type;               // empty for `()`

  /// Whitespace-normalized declaration, used to detect signature changes.
  std::string str() const;

  friend bool operator==(const RustFnSig &a, const RustFnSig &b) { return a.str() == b.str(); }
};

/// Every function declared at top level or directly inside an impl block.
std::vector<RustFnSig> list_rust_fns(std::string_view source);
std::optional<RustFnSig> find_rust_fn(std::string_view source, std::string_view name);

struct ReturnShape {
  bool is_result = false;
  std::vector<std::string> components;  // Ok type split at a top-level tuple
};

ReturnShape return_shape(const RustFnSig &sig);

/// Owned field type for a by-reference parameter: `&[T]` -> `Vec<T>`,
/// `&str` -> `String`, `&T` -> `T`. Throws SignatureMismatch for `&mut`
/// and `impl Trait` parameters.
std::string owned_type(std::string_view param_type);
bool is_reference(std::string_view param_type);

struct RustStruct {
  std::string name;
  std::vector<RustParam> fields;
};

std::optional<RustStruct> find_rust_struct(std::string_view source, std::string_view name);

/// Removes `//` and `/* */` comments, leaving string literals intact.
std::string strip_rust_comments(std::string_view source);

/// `use a::{b, c::D as E};` -> {"a::b", "a::c::D as E"}.
std::vector<std::string> expand_use(std::string_view use_statement);

struct RustSource {
  std::vector<std::string> uses;  // expanded paths, in order of appearance
  std::string body;               // everything else
};

/// Separates top-level `use` statements from the remaining items.
RustSource split_uses(std::string_view source);

/// Concatenates units, hoisting their imports and dropping exact duplicates.
std::string combine_rust_units(const std::vector<std::string> &units);

/// The first fenced code block, preferring one tagged `lang`; the whole text
/// when there is no fence.
std::string extract_code_block(std::string_view response, std::string_view lang);

}  // namespace xcrate::validation
