#pragma once

// Top-level scan of Go sources: imports, struct types and function
// declarations, plus the qualified identifiers each function body uses.

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "xcrate/carrier/go_types.hpp"

namespace xcrate::pipeline {

struct GoFunctionDecl {
  carrier::GoFunction fn;
  std::string body;                    // text between the outer braces
  std::set<std::string> package_refs;  // `crypto/sha512.New`, by import path
  std::set<std::string> called;        // identifiers used as `name(` or `.name(`
};

struct GoSourceFile {
  std::string package;
  std::map<std::string, std::string> imports;  // alias -> import path
  std::vector<carrier::GoTypeDef> types;
  std::vector<GoFunctionDecl> functions;

  const carrier::GoTypeDef *type(std::string_view name) const;
  const GoFunctionDecl *function(std::string_view id) const;
};

/// Throws MalformedInput on unbalanced braces or unterminated literals.
GoSourceFile scan_go_source(std::string_view text);

/// Every non-test `.go` file of `dir`, in file name order, merged. Files must
/// agree on the package name.
GoSourceFile scan_go_dir(const std::filesystem::path &dir);

/// Function ids with callees before their callers, and type names with field
/// dependencies first. Members of a cycle keep declaration order.
std::vector<std::string> function_order(const GoSourceFile &src);
std::vector<std::string> type_order(const GoSourceFile &src);

}  // namespace xcrate::pipeline
