#pragma once

// Client side of the harness protocol shared by both language sides, plus
// the on-disk forms of captured values.
//
// A harness is an executable that reads length-prefixed frames on stdin and
// writes frames on stdout. Exit 0 means the run completed, exit 2 means a
// property was violated (stderr carries `counterexample <index>`), anything
// else is a harness failure.

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace xcrate::validation {

enum class Side { source_side, target_side };

std::string_view to_string(Side s);

inline constexpr int kExitViolation = 2;
inline constexpr std::chrono::milliseconds kDefaultHarnessTimeout{30'000};

struct HarnessCommand {
  std::vector<std::string> argv;
  std::optional<std::filesystem::path> cwd;
  std::chrono::milliseconds timeout = kDefaultHarnessTimeout;
};

struct HarnessOutcome {
  bool violated = false;
  std::vector<std::string> frames;
  std::optional<std::size_t> counterexample;
  std::string diagnostics;  // stderr
};

/// Runs `command` followed by `args`. Throws HarnessError on any exit status
/// other than 0 and 2, on timeout, and on malformed output frames.
HarnessOutcome run_harness(const HarnessCommand &command, const std::vector<std::string> &args,
                           const std::vector<std::string> &frames);

// Encoding tag of frames holding source-language values as written by the
// source sidecar (a JSON document per value).
inline constexpr const char *kSourceNativeEncoding = "source-native-json";
inline constexpr const char *kCarrierEncoding = "carrier";

struct ObservedValues {
  std::string type_id;
  std::string encoding = kSourceNativeEncoding;
  std::vector<std::string> values;

  /// Keeps the first `cap` values.
  ObservedValues capped(std::size_t cap) const;
};

/// Writes `<stem>.frames` and the index `<stem>.json`
/// (`{type_id, encoding, count, frames}`).
void save_observed(const ObservedValues &values, const std::filesystem::path &stem);
/// Reads an index file. Throws MalformedInput when the count and the frames
/// file disagree.
ObservedValues load_observed(const std::filesystem::path &index_file);

/// Observed input/output pairs of one function.
struct CaptureManifest {
  std::string function_id;
  ObservedValues inputs;
  ObservedValues outputs;
};

struct CaptureSet {
  std::vector<CaptureManifest> functions;
  std::vector<ObservedValues> types;

  const CaptureManifest *function(std::string_view id) const;
  const ObservedValues *type(std::string_view id) const;
};

/// Reads `manifest.json` written by the source sidecar's capture run:
/// `{functions: [{function_id, inputs, outputs, count_in, count_out}],
///   types: [{type_id, values, count}]}` with frame files relative to it.
CaptureSet load_capture_set(const std::filesystem::path &manifest);
void save_capture_set(const CaptureSet &set, const std::filesystem::path &dir);

}  // namespace xcrate::validation
