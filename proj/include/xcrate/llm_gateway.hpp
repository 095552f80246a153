#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace xcrate::llm {

enum class Mode { live, record, replay };

std::string_view to_string(Mode m);

struct PromptRecord {
  std::string request_hash;
  std::string prompt;
  std::string response;
  std::string timestamp;  // ISO-8601 UTC
};

nlohmann::json to_json(const PromptRecord &r);
PromptRecord record_from_json(const nlohmann::json &j);

/// Trailing whitespace is stripped from every line before hashing.
std::string canonicalize_prompt(std::string_view prompt);
std::string request_hash(std::string_view prompt);

/// Reads a JSONL replay log. Blank lines are skipped; malformed lines throw
/// MalformedInput.
std::vector<PromptRecord> read_log(const std::filesystem::path &path);

class Provider {
 public:
  virtual ~Provider() = default;
  /// Throws ProviderError.
  virtual std::string generate(const std::string &prompt) = 0;
};

/// POSTs `{"prompt": ...}` to an http(s) endpoint and reads `{"response": ...}`.
class HttpProvider : public Provider {
 public:
  HttpProvider(std::string endpoint, std::string key);
  std::string generate(const std::string &prompt) override;

 private:
  std::string endpoint_;
  std::string key_;
};

/// Deterministic offline provider driven by a rules file, used to author
/// replay fixtures. Each rule is `{"contains": [..], "response": text}` or
/// `{"contains": [..], "responses": [..]}` (consumed in order, last repeats);
/// the first rule whose substrings all occur in the prompt answers.
class ScriptProvider : public Provider {
 public:
  explicit ScriptProvider(nlohmann::json rules);
  static std::unique_ptr<ScriptProvider> from_file(const std::filesystem::path &path);
  std::string generate(const std::string &prompt) override;

 private:
  struct Rule {
    std::vector<std::string> contains;
    std::vector<std::string> responses;
    std::size_t next = 0;
  };
  std::vector<Rule> rules_;
};

/// Provider configured from XCRATE_LLM_ENDPOINT / XCRATE_LLM_KEY. The
/// endpoint is an http(s) URL or `script:<rules.json>`. nullptr when unset.
std::unique_ptr<Provider> provider_from_env();

/// Single entry point for every model call. Calls are serialized; in record
/// mode each call is appended to the log as it completes.
class LlmGateway {
 public:
  LlmGateway(Mode mode, std::unique_ptr<Provider> provider,
             std::optional<std::filesystem::path> log_path = std::nullopt);

  static std::shared_ptr<LlmGateway> replay(const std::filesystem::path &log);
  static std::shared_ptr<LlmGateway> replay(std::vector<PromptRecord> records);
  static std::shared_ptr<LlmGateway> record(const std::filesystem::path &log,
                                            std::unique_ptr<Provider> provider);
  static std::shared_ptr<LlmGateway> live(std::unique_ptr<Provider> provider);

  /// Throws ReplayMiss (replay mode) or ProviderError.
  std::string complete(const std::string &prompt);

  Mode mode() const { return mode_; }
  std::size_t call_count() const;
  std::vector<PromptRecord> recorded() const;

 private:
  Mode mode_;
  std::unique_ptr<Provider> provider_;
  std::optional<std::filesystem::path> log_path_;
  std::map<std::string, PromptRecord> replay_;
  std::vector<PromptRecord> recorded_;
  std::size_t calls_ = 0;
  mutable std::mutex mutex_;
};

}  // namespace xcrate::llm
