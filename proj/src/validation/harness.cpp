#include "xcrate/validation/harness.hpp"

#include <regex>

#include "xcrate/error.hpp"
#include "xcrate/util/framing.hpp"
#include "xcrate/util/json_file.hpp"
#include "xcrate/util/subprocess.hpp"
#include "xcrate/util/text.hpp"

namespace xcrate::validation {

std::string_view to_string(Side s) { return s == Side::source_side ? "source_side" : "target_side"; }

HarnessOutcome run_harness(const HarnessCommand &command, const std::vector<std::string> &args,
                           const std::vector<std::string> &frames) {
  if (command.argv.empty()) throw HarnessError("empty harness command");
  std::vector<std::string> argv = command.argv;
  argv.insert(argv.end(), args.begin(), args.end());
  util::ProcessOptions opts;
  opts.timeout = command.timeout;
  opts.cwd = command.cwd;
  util::ProcessResult r = util::run_process(argv, util::encode_frames(frames), opts);
  std::string what = util::join(argv, " ");
  if (r.spawn_failed) throw HarnessError("cannot start harness `" + what + "`: " + r.err);
  if (r.timed_out)
    throw HarnessError("harness `" + what + "` timed out after " + std::to_string(command.timeout.count()) + " ms");
  if (r.exit_code != 0 && r.exit_code != kExitViolation)
    throw HarnessError("harness `" + what + "` exited with status " + std::to_string(r.exit_code) + ": " +
                       util::trim(r.err));

  HarnessOutcome out;
  out.diagnostics = r.err;
  try {
    out.frames = util::decode_frames(r.out);
  } catch (const MalformedInput &e) {
    throw HarnessError("harness `" + what + "` wrote malformed frames: " + e.what());
  }
  if (r.exit_code == kExitViolation) {
    out.violated = true;
    static const std::regex re(R"(counterexample\s+(\d+))");
    std::smatch m;
    if (!std::regex_search(r.err, m, re))
      throw HarnessError("harness `" + what + "` reported a violation without a counterexample index");
    out.counterexample = std::stoul(m[1].str());
    if (*out.counterexample >= frames.size() && !frames.empty())
      throw HarnessError("harness `" + what + "` reported counterexample " + m[1].str() + " beyond " +
                         std::to_string(frames.size()) + " input frames");
  }
  return out;
}

ObservedValues ObservedValues::capped(std::size_t cap) const {
  ObservedValues out = *this;
  if (out.values.size() > cap) out.values.resize(cap);
  return out;
}

void save_observed(const ObservedValues &values, const std::filesystem::path &stem) {
  std::filesystem::path frames = stem;
  frames += ".frames";
  std::filesystem::path index = stem;
  index += ".json";
  util::write_file(frames, util::encode_frames(values.values));
  util::write_json_file(index, {{"type_id", values.type_id},
                                {"encoding", values.encoding},
                                {"count", values.values.size()},
                                {"frames", frames.filename().string()}});
}

namespace {

ObservedValues read_observed(const nlohmann::json &index, const std::filesystem::path &base) {
  if (!index.is_object() || !index.contains("type_id") || !index.contains("frames"))
    throw MalformedInput("observed values index needs `type_id` and `frames`");
  ObservedValues v;
  v.type_id = index["type_id"].get<std::string>();
  v.encoding = index.value("encoding", std::string(kSourceNativeEncoding));
  v.values = util::decode_frames(util::read_file(base / index["frames"].get<std::string>()));
  if (index.contains("count") && index["count"].get<std::size_t>() != v.values.size())
    throw MalformedInput("observed values for " + v.type_id + ": index says " +
                         std::to_string(index["count"].get<std::size_t>()) + " values, frames file has " +
                         std::to_string(v.values.size()));
  return v;
}

}  // namespace

ObservedValues load_observed(const std::filesystem::path &index_file) {
  return read_observed(util::read_json_file(index_file), index_file.parent_path());
}

const CaptureManifest *CaptureSet::function(std::string_view id) const {
  for (const auto &f : functions)
    if (f.function_id == id) return &f;
  return nullptr;
}

const ObservedValues *CaptureSet::type(std::string_view id) const {
  for (const auto &t : types)
    if (t.type_id == id) return &t;
  return nullptr;
}

CaptureSet load_capture_set(const std::filesystem::path &manifest) {
  nlohmann::json j = util::read_json_file(manifest);
  std::filesystem::path base = manifest.parent_path();
  CaptureSet set;
  for (const auto &f : j.value("functions", nlohmann::json::array())) {
    CaptureManifest m;
    m.function_id = f.at("function_id").get<std::string>();
    nlohmann::json in = {{"type_id", m.function_id + "/in"}, {"frames", f.at("inputs")}};
    nlohmann::json out = {{"type_id", m.function_id + "/out"}, {"frames", f.at("outputs")}};
    if (f.contains("count_in")) in["count"] = f["count_in"];
    if (f.contains("count_out")) out["count"] = f["count_out"];
    m.inputs = read_observed(in, base);
    m.outputs = read_observed(out, base);
    if (m.inputs.values.size() != m.outputs.values.size())
      throw MalformedInput("capture of " + m.function_id + " has " + std::to_string(m.inputs.values.size()) +
                           " inputs but " + std::to_string(m.outputs.values.size()) + " outputs");
    set.functions.push_back(std::move(m));
  }
  for (const auto &t : j.value("types", nlohmann::json::array())) {
    nlohmann::json idx = {{"type_id", t.at("type_id")}, {"frames", t.at("values")}};
    if (t.contains("count")) idx["count"] = t["count"];
    set.types.push_back(read_observed(idx, base));
  }
  return set;
}

void save_capture_set(const CaptureSet &set, const std::filesystem::path &dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json j = {{"functions", nlohmann::json::array()}, {"types", nlohmann::json::array()}};
  auto stem = [](std::string id) {
    for (char &c : id)
      if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
    return id;
  };
  for (const auto &f : set.functions) {
    std::string s = stem(f.function_id);
    util::write_file(dir / (s + ".in.frames"), util::encode_frames(f.inputs.values));
    util::write_file(dir / (s + ".out.frames"), util::encode_frames(f.outputs.values));
    j["functions"].push_back({{"function_id", f.function_id},
                              {"inputs", s + ".in.frames"},
                              {"outputs", s + ".out.frames"},
                              {"count_in", f.inputs.values.size()},
                              {"count_out", f.outputs.values.size()}});
  }
  for (const auto &t : set.types) {
    std::string s = stem(t.type_id);
    util::write_file(dir / (s + ".type.frames"), util::encode_frames(t.values));
    j["types"].push_back({{"type_id", t.type_id}, {"values", s + ".type.frames"}, {"count", t.values.size()}});
  }
  util::write_json_file(dir / "manifest.json", j);
}

}  // namespace xcrate::validation
