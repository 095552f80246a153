#include "xcrate/validation/toolchain.hpp"

#include <cstdlib>
#include <regex>
#include <set>

#include "xcrate/carrier/compile.hpp"
#include "xcrate/error.hpp"
#include "xcrate/util/hash.hpp"
#include "xcrate/util/json_file.hpp"
#include "xcrate/util/subprocess.hpp"
#include "xcrate/util/text.hpp"
#include "xcrate/validation/glue.hpp"
#include "xcrate/validation/tupling.hpp"

namespace fs = std::filesystem;

namespace xcrate::validation {

std::string expand_variables(const std::string &text, const Variables &vars) {
  static const std::regex re(R"(\$\{([A-Za-z_][A-Za-z0-9_]*)\})");
  std::string out;
  std::size_t last = 0;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator(); ++it) {
    const std::smatch &m = *it;
    out.append(text, last, static_cast<std::size_t>(m.position(0)) - last);
    std::string name = m[1].str();
    if (auto v = vars.find(name); v != vars.end()) {
      out += v->second;
    } else if (const char *env = std::getenv(name.c_str())) {
      out += env;
    } else {
      throw MalformedInput("undefined variable ${" + name + "} in `" + text + "`");
    }
    last = static_cast<std::size_t>(m.position(0) + m.length(0));
  }
  out.append(text, last);
  return out;
}

namespace {

std::vector<std::string> expand_all(const std::vector<std::string> &argv, const Variables &vars) {
  std::vector<std::string> out;
  out.reserve(argv.size());
  for (const auto &a : argv) out.push_back(expand_variables(a, vars));
  return out;
}

fs::path unit_dir(const fs::path &work, const std::string &unit) {
  std::string safe = unit;
  for (char &c : safe)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  return work / safe;
}

}  // namespace

BuildResult ExternalToolchain::build(const BuildInputs &inputs) {
  if (config_.build.empty() || config_.run.empty())
    throw CompilerUnavailable("source toolchain needs both a build and a run command");
  BuildResult result;
  result.dir = fs::absolute(unit_dir(config_.work_dir, inputs.unit));
  fs::create_directories(result.dir);
  util::write_file(result.dir / "carrier.proto", inputs.schema_text);
  util::write_file(result.dir / "carrier.go", inputs.carrier_source);
  util::write_file(result.dir / "glue.go", inputs.glue);

  nlohmann::json manifest = {{"types", nlohmann::json::array()},
                             {"adapters", nlohmann::json::array()},
                             {"registry", inputs.registry.to_json()}};
  for (const auto &t : inputs.go_types) manifest["types"].push_back(carrier::to_json(t));
  for (const auto &a : inputs.adapters)
    manifest["adapters"].push_back({{"source_type", a.source_type},
                                    {"target_type", a.target_type},
                                    {"message", a.message},
                                    {"forward", go_forward_name(a.source_type)},
                                    {"backward", go_backward_name(a.source_type)}});
  if (inputs.go_function) manifest["function"] = carrier::to_json(*inputs.go_function);
  util::write_json_file(result.dir / "manifest.json", manifest);

  Variables vars = config_.vars;
  vars["DIR"] = result.dir.string();
  std::vector<std::string> build = expand_all(config_.build, vars);
  result.command.argv = expand_all(config_.run, vars);
  result.command.timeout = config_.timeout;

  util::ProcessOptions opts;
  opts.timeout = config_.timeout;
  opts.cwd = result.dir;
  util::ProcessResult r = util::run_process(build, "", opts);
  if (r.spawn_failed) throw CompilerUnavailable("cannot start source build `" + util::join(build, " ") + "`: " + r.err);
  if (r.timed_out) {
    result.diagnostics = "source build timed out";
    return result;
  }
  result.ok = r.exit_code == 0;
  result.diagnostics = r.err.empty() ? r.out : r.err;
  return result;
}

namespace {

constexpr const char *kRustAllow =
    "#![allow(dead_code, unused_imports, unused_variables, unused_mut, unused_parens, non_snake_case, "
    "non_camel_case_types, unused_must_use)]\n";

// Frame I/O and the per-frame driver shared by every target harness.
constexpr const char *kRustHarnessRuntime = R"(
fn harness_read_frames() -> Vec<Vec<u8>> {
    use std::io::Read;
    let mut input = Vec::new();
    std::io::stdin().read_to_end(&mut input).expect("stdin");
    let mut frames = Vec::new();
    let mut pos = 0usize;
    while pos < input.len() {
        if pos + 4 > input.len() {
            eprintln!("truncated frame header");
            std::process::exit(3);
        }
        let n = u32::from_be_bytes([input[pos], input[pos + 1], input[pos + 2], input[pos + 3]]) as usize;
        pos += 4;
        if pos + n > input.len() {
            eprintln!("truncated frame");
            std::process::exit(3);
        }
        frames.push(input[pos..pos + n].to_vec());
        pos += n;
    }
    frames
}

fn harness_drive<F: Fn(&[u8]) -> Result<Vec<u8>, String>>(frames: &[Vec<u8>], step: F) {
    use std::io::Write;
    std::panic::set_hook(Box::new(|info| eprintln!("panic: {}", info)));
    let mut out = Vec::new();
    for (i, frame) in frames.iter().enumerate() {
        let r = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| step(frame)));
        match r {
            Ok(Ok(bytes)) => {
                out.extend_from_slice(&(bytes.len() as u32).to_be_bytes());
                out.extend_from_slice(&bytes);
            }
            Ok(Err(e)) => {
                std::io::stdout().write_all(&out).expect("stdout");
                eprintln!("counterexample {}: {}", i, e);
                std::process::exit(2);
            }
            Err(_) => {
                std::io::stdout().write_all(&out).expect("stdout");
                eprintln!("counterexample {}: panicked", i);
                std::process::exit(2);
            }
        }
    }
    std::io::stdout().write_all(&out).expect("stdout");
}
)";

std::string carrier_name(const carrier::SchemaRegistry &reg, const std::string &source_type) {
  auto msg = reg.message_for(source_type);
  if (!msg) throw UnboundDependency("type " + source_type + " has no carrier schema");
  return "carrier::" + reg.carrier_type_name(*msg);
}

std::string render_call(const TargetCall &call) {
  const RustFnSig &sig = call.signature;
  std::size_t offset = sig.receiver.empty() ? 0 : 1;
  if (call.input_fields.size() != sig.params.size() + offset)
    throw SignatureMismatch("call plan for " + sig.name + " does not match its parameters");
  std::vector<std::string> args;
  for (std::size_t i = 0; i < sig.params.size(); ++i) {
    std::string field = "inp." + call.input_fields[i + offset];
    args.push_back(is_reference(sig.params[i].type) ? "&" + field : field);
  }
  std::string joined = util::join(args, ", ");
  if (!sig.receiver.empty()) return "inp." + call.input_fields[0] + "." + sig.name + "(" + joined + ")";
  if (sig.self_type) return *sig.self_type + "::" + sig.name + "(" + joined + ")";
  return sig.name + "(" + joined + ")";
}

std::string render_output(const TargetCall &call, const std::string &value) {
  std::string out;
  std::vector<std::string> inits;
  std::size_t n = call.output_fields.size();
  if (n == 1) {
    inits.push_back(call.output_fields[0] + ": " + value);
  } else if (n > 1) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back("__v" + std::to_string(i));
    out += "let (" + util::join(names, ", ") + ") = " + value + "; ";
    for (std::size_t i = 0; i < n; ++i) inits.push_back(call.output_fields[i] + ": " + names[i]);
  } else {
    out += "let _ = " + value + "; ";
  }
  if (call.has_failed_flag) inits.push_back(std::string("failed: false"));
  out += "let out = " + call.output_struct + " { " + util::join(inits, ", ") + " }; ";
  out += "Ok(" + rust_forward_name(call.output_type) + "(&out)?.encode())";
  return out;
}

}  // namespace

std::string render_target_main(const BuildInputs &inputs) {
  std::vector<std::string> units = inputs.target_items;
  units.push_back(inputs.glue);
  std::string out = kRustAllow;
  out += "\nmod carrier;\n\n";
  out += combine_rust_units(units);
  out += "\n";
  out += kRustHarnessRuntime;

  out += "\nfn harness_roundtrip(name: &str, buf: &[u8]) -> Result<Vec<u8>, String> {\n    match name {\n";
  for (const auto &a : inputs.adapters) {
    out += "        \"" + a.source_type + "\" => {\n";
    out += "            let p = " + carrier_name(inputs.registry, a.source_type) +
           "::decode(buf).map_err(|e| e.0)?;\n";
    out += "            let v = " + rust_backward_name(a.source_type) + "(&p)?;\n";
    out += "            Ok(" + rust_forward_name(a.source_type) + "(&v)?.encode())\n        }\n";
  }
  out += "        _ => Err(format!(\"no adapters for type {}\", name)),\n    }\n}\n";

  out += "\nfn harness_execute(buf: &[u8]) -> Result<Vec<u8>, String> {\n";
  if (inputs.call) {
    const TargetCall &call = *inputs.call;
    std::string input_carrier = carrier_name(inputs.registry, call.input_type);
    std::string output_carrier = carrier_name(inputs.registry, call.output_type);
    out += "    let p = " + input_carrier + "::decode(buf).map_err(|e| e.0)?;\n";
    out += "    let inp = " + rust_backward_name(call.input_type) + "(&p)?;\n";
    out += "    let res = " + render_call(call) + ";\n";
    if (return_shape(call.signature).is_result) {
      out += "    match res {\n        Ok(v) => { " + render_output(call, "v") + " }\n";
      out += "        Err(_) => Ok(" + output_carrier + " { " + std::string(kFailedField) + ": true, ..Default::default() }.encode()),\n";
      out += "    }\n";
    } else {
      out += "    " + render_output(call, "res") + "\n";
    }
  } else {
    out += "    let _ = buf;\n    Err(\"this harness has no function under test\".to_string())\n";
  }
  out += "}\n";

  out += R"(
fn main() {
    let args: Vec<String> = std::env::args().collect();
    let frames = harness_read_frames();
    match args.get(1).map(|s| s.as_str()) {
        Some("roundtrip") if args.len() == 3 => {
            let name = args[2].clone();
            harness_drive(&frames, |f| harness_roundtrip(&name, f));
        }
        Some("execute") => harness_drive(&frames, harness_execute),
        _ => {
            eprintln!("usage: harness roundtrip <Type> | execute");
            std::process::exit(64);
        }
    }
}
)";
  return out;
}

void RustToolchain::ensure_crates() {
  std::lock_guard lock(mutex_);
  if (crates_built_) {
    if (!crate_error_.empty()) throw CompilerUnavailable(crate_error_);
    return;
  }
  crates_built_ = true;
  if (!util::find_on_path(config_.rustc) && !fs::exists(config_.rustc)) {
    crate_error_ = "rustc `" + config_.rustc + "` not found";
    throw CompilerUnavailable(crate_error_);
  }
  fs::path crate_dir = fs::absolute(config_.work_dir / "crates");
  fs::create_directories(crate_dir);

  std::set<std::string> pending;
  for (const auto &c : config_.crates) pending.insert(c.name);
  while (!pending.empty()) {
    bool progress = false;
    for (const auto &c : config_.crates) {
      if (!pending.count(c.name)) continue;
      bool ready = true;
      for (const auto &d : c.deps) ready = ready && rlibs_.count(d);
      if (!ready) continue;
      std::string src = util::read_file(c.source);
      std::string key = src;
      for (const auto &d : c.deps) key += "\n" + d + "=" + rlibs_.at(d).filename().string();
      fs::path rlib = crate_dir / ("lib" + c.name + "-" + util::sha256_hex(key).substr(0, 16) + ".rlib");
      if (!fs::exists(rlib)) {
        std::vector<std::string> argv = {config_.rustc, "--edition", "2021", "--crate-type", "rlib",
                                         "--crate-name", c.name, "-C", "opt-level=1", "-o", rlib.string() + ".tmp",
                                         c.source.string(), "-L", crate_dir.string()};
        for (const auto &d : c.deps) {
          argv.push_back("--extern");
          argv.push_back(d + "=" + rlibs_.at(d).string());
        }
        util::ProcessOptions opts;
        opts.timeout = config_.compile_timeout;
        auto r = util::run_process(argv, "", opts);
        if (r.exit_code != 0) {
          crate_error_ = "library crate " + c.name + " does not compile: " + r.err;
          throw CompilerUnavailable(crate_error_);
        }
        fs::rename(rlib.string() + ".tmp", rlib);
      }
      rlibs_[c.name] = rlib;
      pending.erase(c.name);
      progress = true;
    }
    if (!progress) {
      crate_error_ = "library crates have missing or cyclic dependencies: " +
                     util::join(std::vector<std::string>(pending.begin(), pending.end()), ", ");
      throw CompilerUnavailable(crate_error_);
    }
  }
}

std::vector<std::string> RustToolchain::extern_flags() const {
  std::vector<std::string> out;
  if (!rlibs_.empty()) {
    out.push_back("-L");
    out.push_back(rlibs_.begin()->second.parent_path().string());
  }
  for (const auto &[name, path] : rlibs_) {
    out.push_back("--extern");
    out.push_back(name + "=" + path.string());
  }
  return out;
}

std::vector<std::string> RustToolchain::crate_names() const {
  std::vector<std::string> out;
  for (const auto &c : config_.crates) out.push_back(c.name);
  return out;
}

BuildResult RustToolchain::compile(const std::string &unit, const std::string &main_rs, const std::string &carrier_rs) {
  ensure_crates();
  BuildResult result;
  result.dir = fs::absolute(unit_dir(config_.work_dir, unit));
  fs::create_directories(result.dir);
  util::write_file(result.dir / "main.rs", main_rs);
  util::write_file(result.dir / "carrier.rs", carrier_rs);
  fs::path binary = result.dir / "harness";
  std::vector<std::string> argv = {config_.rustc, "--edition", "2021", "-C", "opt-level=1", "-o", binary.string(),
                                   (result.dir / "main.rs").string()};
  for (auto &f : extern_flags()) argv.push_back(f);
  util::ProcessOptions opts;
  opts.timeout = config_.compile_timeout;
  auto r = util::run_process(argv, "", opts);
  if (r.spawn_failed) throw CompilerUnavailable("cannot start rustc: " + r.err);
  result.ok = r.exit_code == 0 && !r.timed_out;
  result.diagnostics = r.timed_out ? "rustc timed out" : r.err;
  result.command.argv = {binary.string()};
  result.command.timeout = config_.run_timeout;
  return result;
}

BuildResult RustToolchain::build(const BuildInputs &inputs) {
  std::string main_rs;
  try {
    main_rs = render_target_main(inputs);
  } catch (const Error &e) {
    BuildResult r;
    r.diagnostics = e.what();
    return r;
  }
  return compile(inputs.unit, main_rs, inputs.carrier_source);
}

BuildResult RustToolchain::check(const std::string &unit, const std::vector<std::string> &items) {
  ensure_crates();
  BuildResult result;
  result.dir = fs::absolute(unit_dir(config_.work_dir, unit));
  fs::create_directories(result.dir);
  util::write_file(result.dir / "lib.rs", std::string(kRustAllow) + "\n" + combine_rust_units(items));
  std::vector<std::string> argv = {config_.rustc, "--edition", "2021", "--crate-type", "lib", "--emit=metadata",
                                   "--crate-name", "unit_check", "-o", (result.dir / "libunit_check.rmeta").string(),
                                   (result.dir / "lib.rs").string()};
  for (auto &f : extern_flags()) argv.push_back(f);
  util::ProcessOptions opts;
  opts.timeout = config_.compile_timeout;
  auto r = util::run_process(argv, "", opts);
  if (r.spawn_failed) throw CompilerUnavailable("cannot start rustc: " + r.err);
  result.ok = r.exit_code == 0 && !r.timed_out;
  result.diagnostics = r.timed_out ? "rustc timed out" : r.err;
  return result;
}

}  // namespace xcrate::validation
