#include "xcrate/llm_gateway.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "xcrate/error.hpp"
#include "xcrate/util/hash.hpp"
#include "xcrate/util/json_file.hpp"
#include "xcrate/util/text.hpp"

namespace xcrate::llm {

using nlohmann::json;

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::live: return "live";
    case Mode::record: return "record";
    case Mode::replay: return "replay";
  }
  return "?";
}

json to_json(const PromptRecord &r) {
  return {{"request_hash", r.request_hash},
          {"prompt", r.prompt},
          {"response", r.response},
          {"timestamp", r.timestamp}};
}

PromptRecord record_from_json(const json &j) {
  try {
    PromptRecord r;
    r.prompt = j.at("prompt").get<std::string>();
    r.response = j.at("response").get<std::string>();
    r.request_hash = j.value("request_hash", request_hash(r.prompt));
    r.timestamp = j.value("timestamp", "");
    return r;
  } catch (const json::exception &e) {
    throw MalformedInput(std::string("prompt record: ") + e.what());
  }
}

std::string canonicalize_prompt(std::string_view prompt) {
  return util::strip_trailing_whitespace_per_line(prompt);
}

std::string request_hash(std::string_view prompt) {
  return util::sha256_hex(canonicalize_prompt(prompt));
}

std::vector<PromptRecord> read_log(const std::filesystem::path &path) {
  std::vector<PromptRecord> out;
  std::ifstream in(path);
  if (!in) return out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (util::trim(line).empty()) continue;
    try {
      out.push_back(record_from_json(json::parse(line)));
    } catch (const json::exception &e) {
      throw MalformedInput(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

namespace {

std::string utc_timestamp() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Providers

HttpProvider::HttpProvider(std::string endpoint, std::string key)
    : endpoint_(std::move(endpoint)), key_(std::move(key)) {}

std::string HttpProvider::generate(const std::string &prompt) {
  auto scheme_end = endpoint_.find("://");
  if (scheme_end == std::string::npos) throw ProviderError("endpoint is not a URL: " + endpoint_);
  auto path_start = endpoint_.find('/', scheme_end + 3);
  std::string origin = endpoint_.substr(0, path_start);
  std::string path = path_start == std::string::npos ? "/" : endpoint_.substr(path_start);

  httplib::Client client(origin);
  client.set_read_timeout(300, 0);
  httplib::Headers headers;
  if (!key_.empty()) headers.emplace("Authorization", "Bearer " + key_);
  auto res = client.Post(path, headers, json{{"prompt", prompt}}.dump(), "application/json");
  if (!res) throw ProviderError("request to " + endpoint_ + " failed: " + httplib::to_string(res.error()));
  if (res->status != 200) {
    throw ProviderError("provider returned HTTP " + std::to_string(res->status) + ": " + res->body);
  }
  try {
    return json::parse(res->body).at("response").get<std::string>();
  } catch (const json::exception &e) {
    throw ProviderError(std::string("malformed provider response: ") + e.what());
  }
}

ScriptProvider::ScriptProvider(json rules) {
  if (!rules.is_array()) throw MalformedInput("script rules must be a JSON array");
  for (const auto &r : rules) {
    Rule rule;
    for (const auto &c : r.value("contains", json::array())) rule.contains.push_back(c.get<std::string>());
    if (r.contains("responses")) {
      for (const auto &s : r.at("responses")) rule.responses.push_back(s.get<std::string>());
    } else if (r.contains("response")) {
      rule.responses.push_back(r.at("response").get<std::string>());
    }
    if (rule.responses.empty()) throw MalformedInput("script rule without response");
    rules_.push_back(std::move(rule));
  }
}

std::unique_ptr<ScriptProvider> ScriptProvider::from_file(const std::filesystem::path &path) {
  return std::make_unique<ScriptProvider>(util::read_json_file(path));
}

std::string ScriptProvider::generate(const std::string &prompt) {
  for (auto &rule : rules_) {
    bool match = true;
    for (const auto &c : rule.contains) {
      if (prompt.find(c) == std::string::npos) {
        match = false;
        break;
      }
    }
    if (!match) continue;
    std::size_t i = std::min(rule.next, rule.responses.size() - 1);
    ++rule.next;
    return rule.responses[i];
  }
  throw ProviderError("no script rule matches prompt starting with: " + prompt.substr(0, 120));
}

std::unique_ptr<Provider> provider_from_env() {
  const char *endpoint = std::getenv("XCRATE_LLM_ENDPOINT");
  if (!endpoint || !*endpoint) return nullptr;
  std::string ep = endpoint;
  if (ep.rfind("script:", 0) == 0) return ScriptProvider::from_file(ep.substr(7));
  const char *key = std::getenv("XCRATE_LLM_KEY");
  return std::make_unique<HttpProvider>(ep, key ? key : "");
}

// ---------------------------------------------------------------------------
// Gateway

LlmGateway::LlmGateway(Mode mode, std::unique_ptr<Provider> provider,
                       std::optional<std::filesystem::path> log_path)
    : mode_(mode), provider_(std::move(provider)), log_path_(std::move(log_path)) {
  if (mode_ == Mode::replay && log_path_) {
    for (auto &r : read_log(*log_path_)) replay_.emplace(r.request_hash, std::move(r));
  }
  if (mode_ != Mode::replay && !provider_) {
    throw ProviderError("no provider configured for " + std::string(to_string(mode_)) + " mode");
  }
  if (mode_ == Mode::record && !log_path_) throw MalformedInput("record mode needs a log path");
}

std::shared_ptr<LlmGateway> LlmGateway::replay(const std::filesystem::path &log) {
  return std::make_shared<LlmGateway>(Mode::replay, nullptr, log);
}

std::shared_ptr<LlmGateway> LlmGateway::replay(std::vector<PromptRecord> records) {
  auto g = std::make_shared<LlmGateway>(Mode::replay, nullptr);
  for (auto &r : records) {
    if (r.request_hash.empty()) r.request_hash = request_hash(r.prompt);
    g->replay_.emplace(r.request_hash, std::move(r));
  }
  return g;
}

std::shared_ptr<LlmGateway> LlmGateway::record(const std::filesystem::path &log,
                                               std::unique_ptr<Provider> provider) {
  return std::make_shared<LlmGateway>(Mode::record, std::move(provider), log);
}

std::shared_ptr<LlmGateway> LlmGateway::live(std::unique_ptr<Provider> provider) {
  return std::make_shared<LlmGateway>(Mode::live, std::move(provider));
}

std::string LlmGateway::complete(const std::string &prompt) {
  std::lock_guard lock(mutex_);
  ++calls_;
  std::string hash = request_hash(prompt);
  if (mode_ == Mode::replay) {
    auto it = replay_.find(hash);
    if (it == replay_.end()) {
      throw ReplayMiss("no recorded response for request " + hash + " (prompt begins: " +
                       prompt.substr(0, 80) + ")");
    }
    return it->second.response;
  }
  std::string response = provider_->generate(prompt);
  if (mode_ == Mode::record) {
    PromptRecord r{hash, prompt, response, utc_timestamp()};
    if (log_path_->has_parent_path()) std::filesystem::create_directories(log_path_->parent_path());
    std::ofstream out(*log_path_, std::ios::app);
    if (!out) throw ProviderError("cannot append to log " + log_path_->string());
    out << to_json(r).dump() << '\n';
    recorded_.push_back(std::move(r));
  }
  return response;
}

std::size_t LlmGateway::call_count() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

std::vector<PromptRecord> LlmGateway::recorded() const {
  std::lock_guard lock(mutex_);
  return recorded_;
}

}  // namespace xcrate::llm
