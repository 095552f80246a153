#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "xcrate/carrier/schema.hpp"

namespace xcrate::carrier {

struct CompileOptions {
  std::filesystem::path protoc = "protoc";
  /// Where carrier.desc, carrier.go and carrier.rs are written; nothing is
  /// written when empty.
  std::filesystem::path out_dir;
  /// Message name to source type name, for `Proto<Source>` carrier names. A
  /// message without an entry is named `Proto<Message>`.
  std::map<std::string, std::string> source_types;
  std::string go_package = "carrier";
  std::chrono::milliseconds timeout{30'000};
};

struct CompiledCarriers {
  int exit_status = 0;
  std::string compiler_stderr;
  std::string descriptor_set;  // serialized FileDescriptorSet
  SchemaRegistry registry;     // as understood by the compiler
  std::string go_source;
  std::string rust_source;
};

/// Runs the schema compiler and emits carrier sources for the source-language
/// sidecar (Go) and the target-language harness (Rust) from its descriptor
/// output. Throws CompilerUnavailable and SchemaCompileError.
CompiledCarriers compile_carriers(const std::filesystem::path &schema_file, const CompileOptions &options = {});

/// Rebuilds a registry from a compiled descriptor set. Throws
/// SchemaCompileError on constructs outside the carrier subset.
SchemaRegistry registry_from_descriptor_set(const std::string &descriptor_set,
                                            const std::map<std::string, std::string> &source_types = {});

std::string emit_go_carriers(const SchemaRegistry &registry, const std::string &go_package = "carrier");

/// A self-contained module (`carrier.rs`) with one struct per message,
/// encode/decode methods and `roundtrip_by_name`.
std::string emit_rust_carriers(const SchemaRegistry &registry);

/// `ssh_key` stays, Rust keywords become raw identifiers.
std::string rust_field_name(const std::string &proto_name);

}  // namespace xcrate::carrier
