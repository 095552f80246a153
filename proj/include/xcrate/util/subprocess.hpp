#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace xcrate::util {

struct ProcessResult {
  int exit_code = -1;      // -1 when killed by a signal or timed out
  bool timed_out = false;
  bool spawn_failed = false;
  std::string out;
  std::string err;
};

struct ProcessOptions {
  std::chrono::milliseconds timeout{30'000};
  std::optional<std::filesystem::path> cwd;
};

// Runs argv[0] (looked up on PATH), feeds `input` to stdin and collects both
// output streams. The child is killed once the timeout elapses.
ProcessResult run_process(const std::vector<std::string> &argv, std::string_view input,
                          const ProcessOptions &options = {});

// First executable named `name` on PATH, if any.
std::optional<std::filesystem::path> find_on_path(std::string_view name);

}  // namespace xcrate::util
