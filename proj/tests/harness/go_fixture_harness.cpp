// Stand-in for the Go sidecar used by tests. Commands:
//
//   build DIR             check glue.go against manifest.json
//   run DIR MODE [TYPE]   harness protocol over stdin/stdout frames
//   capture GODIR OUT     run the fixture functions on GODIR/testdata.json
//
// Original function bodies are not interpreted; each fixture function has a
// native implementation below, keyed by function id.

#include <openssl/evp.h>
#include <openssl/rand.h>

#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "gosim.hpp"
#include "xcrate/carrier/codec.hpp"
#include "xcrate/pipeline/go_source.hpp"
#include "xcrate/util/framing.hpp"
#include "xcrate/util/json_file.hpp"
#include "xcrate/util/text.hpp"
#include "xcrate/validation/harness.hpp"
#include "xcrate/validation/tupling.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace xcrate;
using namespace xcrate::fixtures::gosim;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Native implementations of the fixture functions, on native JSON tuples.

using Native = std::function<json(const json &)>;

std::string sha512(const std::string &data) {
  unsigned char md[64];
  unsigned int n = 0;
  EVP_Digest(data.data(), data.size(), md, &n, EVP_sha512(), nullptr);
  return std::string(reinterpret_cast<char *>(md), n);
}

std::string bytes_of(const json &j) { return util::from_hex(j.get<std::string>()); }

const std::map<std::string, Native> &natives() {
  static const std::map<std::string, Native> table = {
      {"ed25519PrivateKeyToCurve25519",
       [](const json &in) {
         std::string pk = bytes_of(in.at("Pk"));
         if (pk.size() != 64) throw Failure("ed25519: bad private key length");
         return json{{"R0", util::to_hex(sha512(pk.substr(0, 32)).substr(0, 32))}};
       }},
      {"Identity.Describe",
       [](const json &in) {
         const json &id = in.at("Recv");
         return json{{"R0", id.at("Name").get<std::string>() + " (" + std::to_string(id.at("Keys").size()) + " keys)"}};
       }},
      {"KeyPair.PublicKey",
       [](const json &in) {
         std::string pk = bytes_of(in.at("Recv").at("Private"));
         if (pk.size() != 64) throw Failure("ed25519: bad private key length");
         return json{{"R0", util::to_hex(pk.substr(32))}};
       }},
      {"Clamp",
       [](const json &in) {
         std::int64_t x = in.at("X"), lo = in.at("Lo"), hi = in.at("Hi");
         if (x < lo) x = lo;
         if (x > hi) x = hi;
         return json{{"R0", x}};
       }},
      {"Fnv32",
       [](const json &in) {
         std::uint32_t h = 2166136261u;
         for (unsigned char c : bytes_of(in.at("Data"))) {
           h ^= c;
           h *= 16777619u;
         }
         return json{{"R0", h}};
       }},
      {"JoinLabels",
       [](const json &in) {
         std::vector<std::string> labels = in.at("Labels").get<std::vector<std::string>>();
         return json{{"R0", util::join(labels, in.at("Sep").get<std::string>())}};
       }},
      {"ScaleAll",
       [](const json &in) {
         double k = in.at("K");
         json out = json::array();
         for (const auto &x : in.at("Xs")) out.push_back(x.get<double>() * k);
         return json{{"R0", out}};
       }},
      {"ParsePort",
       [](const json &in) {
         std::string s = in.at("S");
         bool ok = !s.empty() && s.size() <= 5 && s.find_first_not_of("0123456789") == std::string::npos;
         std::uint64_t v = ok ? std::stoull(s) : 0;
         if (!ok || v == 0 || v > 65535) return json{{"R0", 0}, {"Failed", true}};
         return json{{"R0", v}, {"Failed", false}};
       }},
      {"RandomNonce",
       [](const json &in) {
         std::int64_t n = in.at("N");
         if (n < 0 || n > 4096) throw Failure("bad nonce length");
         std::string buf(static_cast<std::size_t>(n), '\0');
         if (n > 0) RAND_bytes(reinterpret_cast<unsigned char *>(buf.data()), static_cast<int>(n));
         return json{{"R0", util::to_hex(buf)}};
       }},
  };
  return table;
}

// ---------------------------------------------------------------------------
// Native JSON comparison: exact except for floating point numbers.

bool close(const json &a, const json &b) {
  if (a.is_number_float() || b.is_number_float()) {
    if (!a.is_number() || !b.is_number()) return false;
    double x = a.get<double>(), y = b.get<double>();
    if (std::isnan(x) || std::isnan(y)) return std::isnan(x) && std::isnan(y);
    return x == y || std::fabs(x - y) <= 1e-9 * std::max(std::fabs(x), std::fabs(y));
  }
  if (a.is_array() && b.is_array()) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!close(a[i], b[i])) return false;
    return true;
  }
  if (a.is_object() && b.is_object()) {
    if (a.size() != b.size()) return false;
    for (auto it = a.begin(); it != a.end(); ++it)
      if (!b.contains(it.key()) || !close(it.value(), b.at(it.key()))) return false;
    return true;
  }
  return a == b;
}

// ---------------------------------------------------------------------------
// A loaded build directory.

struct Adapter {
  std::string message;
  std::string forward;
  std::string backward;
};

struct Build {
  TypeEnv types;
  carrier::SchemaRegistry registry;
  std::map<std::string, Adapter> adapters;
  std::optional<carrier::GoFunction> function;
  std::unique_ptr<Interpreter> interp;

  GoType type(const std::string &name) const {
    GoType t;
    t.name = name;
    return t;
  }

  Value from_carrier(const std::string &type_name, const std::string &bytes) {
    const Adapter &a = adapter(type_name);
    carrier::Codec codec(registry);
    carrier::CarrierValue cv = codec.decode(a.message, bytes);
    Value p;
    p.k = Value::K::pointer;
    p.type = "*" + registry.carrier_type_name(a.message);
    p.ptr = std::make_shared<Value>(carrier_to_value(cv, registry));
    std::vector<Value> r = interp->call(a.backward, {p});
    if (r.size() != 2) throw RuntimeError(a.backward + " must return two values");
    if (!r[1].is_nil()) throw RuntimeError(a.backward + ": " + r[1].s);
    return r[0];
  }

  std::string to_carrier(const std::string &type_name, const Value &v) {
    const Adapter &a = adapter(type_name);
    std::vector<Value> r = interp->call(a.forward, {v});
    if (r.size() != 2) throw RuntimeError(a.forward + " must return two values");
    if (!r[1].is_nil()) throw RuntimeError(a.forward + ": " + r[1].s);
    carrier::Codec codec(registry);
    return codec.encode(value_to_carrier(r[0], a.message, registry));
  }

  const Adapter &adapter(const std::string &type_name) const {
    auto it = adapters.find(type_name);
    if (it == adapters.end()) throw Failure("no adapters for type " + type_name);
    return it->second;
  }
};

std::unique_ptr<Build> load_build(const fs::path &dir) {
  auto owned = std::make_unique<Build>();
  Build &b = *owned;
  json manifest = util::read_json_file(dir / "manifest.json");
  b.registry = carrier::SchemaRegistry::from_json(manifest.at("registry"));
  for (const auto &t : manifest.at("types")) b.types.add(carrier::go_type_def_from_json(t));
  for (const auto &def : carrier_structs(b.registry)) b.types.add(def);
  for (const auto &a : manifest.at("adapters"))
    b.adapters[a.at("source_type").get<std::string>()] = {a.at("message"), a.at("forward"), a.at("backward")};
  if (manifest.contains("function")) b.function = carrier::go_function_from_json(manifest.at("function"));
  b.interp = std::make_unique<Interpreter>(b.types);
  b.interp->load(util::read_file(dir / "glue.go"));
  return owned;
}

int cmd_build(const fs::path &dir) {
  std::unique_ptr<Build> owned;
  try {
    owned = load_build(dir);
  } catch (const BuildError &e) {
    std::cerr << "glue.go: " << e.what() << "\n";
    return 1;
  }
  Build &b = *owned;
  int rc = 0;
  for (const auto &[type, a] : b.adapters) {
    for (const std::string &fn : {a.forward, a.backward}) {
      if (!b.interp->has_function(fn)) {
        std::cerr << "glue.go: undefined: " << fn << " (adapter for " << type << ")\n";
        rc = 1;
      }
    }
  }
  if (b.function && !natives().count(b.function->id())) {
    std::cerr << "no implementation for function " << b.function->id() << "\n";
    rc = 1;
  }
  return rc;
}

std::vector<std::string> read_stdin_frames() {
  std::ostringstream ss;
  ss << std::cin.rdbuf();
  return util::decode_frames(ss.str());
}

int violation(std::size_t i, const std::string &why) {
  std::cerr << why << "\ncounterexample " << i << "\n";
  return validation::kExitViolation;
}

int cmd_run(const fs::path &dir, const std::string &mode, const std::string &type_name) {
  std::unique_ptr<Build> owned = load_build(dir);
  Build &b = *owned;
  std::vector<std::string> in = read_stdin_frames();
  std::vector<std::string> out;
  GoType t = b.type(type_name);
  auto native_of = [&](const std::string &frame) { return json::parse(frame); };

  if (mode == "roundtrip" || mode == "forward") {
    for (std::size_t i = 0; i < in.size(); ++i) {
      try {
        json original = native_of(in[i]);
        Value v = b.types.from_native(original, t);
        std::string image = b.to_carrier(type_name, v);
        if (mode == "roundtrip") {
          json back = b.types.to_native(b.from_carrier(type_name, image), t);
          if (!close(original, back))
            return violation(i, "round trip changed " + original.dump() + " into " + back.dump());
        }
        out.push_back(image);
      } catch (const std::exception &e) {
        return violation(i, e.what());
      }
    }
  } else if (mode == "compare") {
    if (in.size() % 2 != 0) throw Failure("compare needs value and carrier frames in pairs");
    for (std::size_t i = 0; i < in.size() / 2; ++i) {
      try {
        json want = native_of(in[2 * i]);
        json got = b.types.to_native(b.from_carrier(type_name, in[2 * i + 1]), t);
        if (!close(want, got)) return violation(i, "expected " + want.dump() + ", got " + got.dump());
      } catch (const std::exception &e) {
        return violation(i, e.what());
      }
    }
  } else if (mode == "execute" || mode == "run") {
    if (!b.function) throw Failure("this build has no function");
    validation::GoTuples tuples = validation::tuple_go_function(*b.function);
    const Native &fn = natives().at(b.function->id());
    for (std::size_t i = 0; i < in.size(); ++i) {
      try {
        json result = fn(native_of(in[i]));
        if (mode == "run") {
          out.push_back(result.dump());
        } else {
          Value v = b.types.from_native(result, b.type(tuples.output.name));
          out.push_back(b.to_carrier(tuples.output.name, v));
        }
      } catch (const std::exception &e) {
        return violation(i, e.what());
      }
    }
  } else {
    throw Failure("unknown mode " + mode);
  }
  std::cout << util::encode_frames(out) << std::flush;
  return 0;
}

// Nested values of user-defined struct types, by type name.
void collect(const TypeEnv &types, const json &v, const GoType &t, std::map<std::string, std::vector<json>> &out) {
  switch (t.kind) {
    case GoType::Kind::pointer:
      if (!v.is_null()) collect(types, v, *t.elem, out);
      return;
    case GoType::Kind::slice:
    case GoType::Kind::array:
      if (v.is_array())
        for (const auto &e : v) collect(types, e, *t.elem, out);
      return;
    case GoType::Kind::named: break;
    default: return;
  }
  if (t.is_qualified()) return;
  const carrier::GoTypeDef *def = types.find(t.name);
  if (!def || !v.is_object()) return;
  auto &seen = out[t.name];
  if (std::find(seen.begin(), seen.end(), v) == seen.end()) seen.push_back(v);
  for (const auto &f : def->fields)
    if (v.contains(f.name)) collect(types, v.at(f.name), f.type, out);
}

int cmd_capture(const fs::path &go_dir, const fs::path &out_dir) {
  pipeline::GoSourceFile src = pipeline::scan_go_dir(go_dir);
  json data = util::read_json_file(go_dir / "testdata.json");
  TypeEnv types;
  for (const auto &t : src.types) types.add(t);

  validation::CaptureSet set;
  std::map<std::string, std::vector<json>> nested;
  for (const auto &entry : data.at("functions")) {
    std::string id = entry.at("id");
    const pipeline::GoFunctionDecl *decl = src.function(id);
    if (!decl) throw Failure("testdata names unknown function " + id);
    auto it = natives().find(id);
    if (it == natives().end()) throw Failure("no implementation for function " + id);
    validation::GoTuples tuples = validation::tuple_go_function(decl->fn);
    types.add(tuples.input);
    types.add(tuples.output);
    validation::CaptureManifest m;
    m.function_id = id;
    m.inputs.type_id = tuples.input.name;
    m.outputs.type_id = tuples.output.name;
    GoType in_t, out_t;
    in_t.name = tuples.input.name;
    out_t.name = tuples.output.name;
    for (const auto &input : entry.at("inputs")) {
      // Normalise through the type so captured values use canonical encoding.
      json in = types.to_native(types.from_native(input, in_t), in_t);
      json out = types.to_native(types.from_native(it->second(in), out_t), out_t);
      for (const auto &f : tuples.input.fields) collect(types, in.at(f.name), f.type, nested);
      for (const auto &f : tuples.output.fields) collect(types, out.at(f.name), f.type, nested);
      m.inputs.values.push_back(in.dump());
      m.outputs.values.push_back(out.dump());
    }
    set.functions.push_back(std::move(m));
  }
  for (const auto &[type, values] : nested) {
    validation::ObservedValues ov;
    ov.type_id = type;
    for (const auto &v : values) ov.values.push_back(v.dump());
    set.types.push_back(std::move(ov));
  }
  fs::create_directories(out_dir);
  validation::save_capture_set(set, out_dir);
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    if (args.size() == 2 && args[0] == "build") return cmd_build(args[1]);
    if (args.size() >= 3 && args[0] == "run") return cmd_run(args[1], args[2], args.size() > 3 ? args[3] : "");
    if (args.size() == 3 && args[0] == "capture") return cmd_capture(args[1], args[2]);
    std::cerr << "usage: go_fixture_harness build DIR | run DIR MODE [TYPE] | capture GODIR OUT\n";
    return 64;
  } catch (const std::exception &e) {
    std::cerr << "go_fixture_harness: " << e.what() << "\n";
    return 1;
  }
}
