#pragma once

// Builds runnable harnesses for either language side from generated
// artifacts. The source side is delegated to an external command (the
// sidecar); the target side is compiled directly with rustc.

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "xcrate/carrier/go_types.hpp"
#include "xcrate/carrier/schema.hpp"
#include "xcrate/validation/harness.hpp"
#include "xcrate/validation/rust_items.hpp"

namespace xcrate::validation {

/// One type whose adapters are part of a build, named by its source type.
struct AdapterBinding {
  std::string source_type;
  std::string target_type;  // Rust type name
  std::string message;      // carrier message
};

/// How the generated target harness calls the translated function.
struct TargetCall {
  std::string input_type;  // source tuple type names
  std::string output_type;
  std::string input_struct;  // target tuple struct names
  std::string output_struct;
  RustFnSig signature;
  std::vector<std::string> input_fields;   // receiver first
  std::vector<std::string> output_fields;  // r0, r1, ... without `failed`
  bool has_failed_flag = false;
};

struct BuildInputs {
  Side side = Side::source_side;
  std::string unit;  // directory-safe build name
  carrier::SchemaRegistry registry;
  std::string schema_text;
  std::string carrier_source;  // carrier.go or carrier.rs
  std::vector<AdapterBinding> adapters;
  std::string glue;  // all adapters, in the side's language

  // Source side.
  std::vector<carrier::GoTypeDef> go_types;
  std::optional<carrier::GoFunction> go_function;

  // Target side: translated items (types, functions, tuple structs).
  std::vector<std::string> target_items;
  std::optional<TargetCall> call;
};

struct BuildResult {
  bool ok = false;
  std::string diagnostics;
  HarnessCommand command;
  std::filesystem::path dir;
};

class Toolchain {
 public:
  virtual ~Toolchain() = default;
  virtual Side side() const = 0;
  /// Compile failures are reported through BuildResult; infrastructure
  /// failures (missing compiler) throw CompilerUnavailable.
  virtual BuildResult build(const BuildInputs &inputs) = 0;
};

/// Variables usable as `${NAME}` in external commands, on top of the process
/// environment. `${DIR}` is always the build directory.
using Variables = std::map<std::string, std::string>;

std::string expand_variables(const std::string &text, const Variables &vars);

/// Source side backed by sidecar commands. The build directory receives
/// carrier.proto, carrier.go, glue.go and manifest.json
/// (`{types, adapters, registry, function?}`); the `build` command
/// must exit 0 and the `run` command is then the harness.
class ExternalToolchain : public Toolchain {
 public:
  struct Config {
    std::vector<std::string> build;
    std::vector<std::string> run;
    Variables vars;
    std::filesystem::path work_dir;
    std::chrono::milliseconds timeout = kDefaultHarnessTimeout;
  };

  ExternalToolchain(Side side, Config config) : side_(side), config_(std::move(config)) {}
  Side side() const override { return side_; }
  BuildResult build(const BuildInputs &inputs) override;

 private:
  Side side_;
  Config config_;
};

/// Library crate compiled once to an rlib and linked into every build.
struct RustCrate {
  std::string name;
  std::filesystem::path source;  // lib.rs
  std::vector<std::string> deps;
};

class RustToolchain : public Toolchain {
 public:
  struct Config {
    std::string rustc = "rustc";
    std::vector<RustCrate> crates;
    std::filesystem::path work_dir;
    std::chrono::milliseconds compile_timeout{120'000};
    std::chrono::milliseconds run_timeout = kDefaultHarnessTimeout;
  };

  explicit RustToolchain(Config config) : config_(std::move(config)) {}
  Side side() const override { return Side::target_side; }
  BuildResult build(const BuildInputs &inputs) override;

  /// Compiles translated items on their own. Used for the per-unit compile
  /// check before any glue exists.
  BuildResult check(const std::string &unit, const std::vector<std::string> &items);

  /// Crate names available to translations.
  std::vector<std::string> crate_names() const;

 private:
  void ensure_crates();
  std::vector<std::string> extern_flags() const;
  BuildResult compile(const std::string &unit, const std::string &main_rs, const std::string &carrier_rs);

  Config config_;
  std::mutex mutex_;
  bool crates_built_ = false;
  std::string crate_error_;
  std::map<std::string, std::filesystem::path> rlibs_;
};

/// The generated `main.rs` for a target build: carrier module, translated
/// items, glue and a harness main supporting `roundtrip <SourceType>` and
/// `execute`.
std::string render_target_main(const BuildInputs &inputs);

}  // namespace xcrate::validation
