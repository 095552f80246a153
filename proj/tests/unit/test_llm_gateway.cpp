#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <thread>

#include "temp_dir.hpp"
#include "xcrate/error.hpp"
#include "xcrate/llm_gateway.hpp"
#include "xcrate/util/json_file.hpp"

using namespace xcrate;
using namespace xcrate::llm;

namespace {

std::unique_ptr<Provider> echo_rules() {
  return std::make_unique<ScriptProvider>(nlohmann::json::parse(R"([
    {"contains": ["hello"], "response": "world"},
    {"contains": ["count"], "responses": ["one", "two"]},
    {"contains": [], "response": "fallback"}])"));
}

}  // namespace

TEST(LlmGateway, ReplayHitReturnsStoredText) {
  auto g = LlmGateway::replay({PromptRecord{"", "question", "answer", ""}});
  EXPECT_EQ(g->complete("question"), "answer");
}

TEST(LlmGateway, ReplayMiss) {
  auto g = LlmGateway::replay(std::vector<PromptRecord>{});
  EXPECT_THROW(g->complete("anything"), ReplayMiss);
}

TEST(LlmGateway, CanonicalizationIgnoresTrailingWhitespace) {
  EXPECT_EQ(request_hash("a  \nb\t"), request_hash("a\nb"));
  EXPECT_NE(request_hash("a\nb"), request_hash("a\n b"));
  auto g = LlmGateway::replay({PromptRecord{"", "line one\nline two", "ok", ""}});
  EXPECT_EQ(g->complete("line one   \nline two \t"), "ok");
}

TEST(LlmGateway, RecordThenReplayIsIdentical) {
  fixtures::TempDir dir;
  auto log = dir / "log.jsonl";
  auto rec = LlmGateway::record(log, echo_rules());
  std::string first = rec->complete("say hello");
  std::string second = rec->complete("count 1");
  EXPECT_EQ(first, "world");
  EXPECT_EQ(rec->recorded().size(), 2u);

  auto records = read_log(log);
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0].request_hash, request_hash("say hello"));
  EXPECT_FALSE(records[0].timestamp.empty());

  auto rep = LlmGateway::replay(log);
  EXPECT_EQ(rep->complete("say hello"), first);
  EXPECT_EQ(rep->complete("count 1"), second);
  EXPECT_EQ(rep->complete("count 1"), second);
}

TEST(LlmGateway, FirstRecordWinsOnDuplicateHash) {
  auto g = LlmGateway::replay({PromptRecord{"", "p", "first", ""}, PromptRecord{"", "p", "second", ""}});
  EXPECT_EQ(g->complete("p"), "first");
}

TEST(LlmGateway, ScriptSequencesAdvanceAndRepeatLast) {
  ScriptProvider p(nlohmann::json::parse(R"([{"contains":["x"],"responses":["a","b"]}])"));
  EXPECT_EQ(p.generate("x"), "a");
  EXPECT_EQ(p.generate("x"), "b");
  EXPECT_EQ(p.generate("x"), "b");
  EXPECT_THROW(p.generate("y"), ProviderError);
}

TEST(LlmGateway, LiveModeNeedsProvider) {
  EXPECT_THROW(LlmGateway(Mode::live, nullptr), ProviderError);
  auto g = LlmGateway::live(echo_rules());
  EXPECT_EQ(g->complete("hello"), "world");
  EXPECT_TRUE(g->recorded().empty());
}

TEST(LlmGateway, ProviderFromEnvironment) {
  fixtures::TempDir dir;
  util::write_json_file(dir / "rules.json", nlohmann::json::parse(R"([{"contains":[],"response":"r"}])"));
  ::setenv("XCRATE_LLM_ENDPOINT", ("script:" + (dir / "rules.json").string()).c_str(), 1);
  auto p = provider_from_env();
  ASSERT_NE(p, nullptr);
  EXPECT_EQ(p->generate("q"), "r");
  ::setenv("XCRATE_LLM_ENDPOINT", "http://127.0.0.1:1/complete", 1);
  auto http = provider_from_env();
  ASSERT_NE(http, nullptr);
  EXPECT_THROW(http->generate("q"), ProviderError);
  ::unsetenv("XCRATE_LLM_ENDPOINT");
  EXPECT_EQ(provider_from_env(), nullptr);
}

TEST(LlmGateway, ConcurrentCallsAreSerialized) {
  fixtures::TempDir dir;
  auto g = LlmGateway::record(dir / "log.jsonl", echo_rules());
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&g, i] {
      for (int k = 0; k < 10; ++k) g->complete("hello " + std::to_string(i) + "/" + std::to_string(k));
    });
  }
  for (auto &t : threads) t.join();
  EXPECT_EQ(g->call_count(), 80u);
  EXPECT_EQ(read_log(dir / "log.jsonl").size(), 80u);
}

TEST(LlmGateway, MalformedLogLine) {
  fixtures::TempDir dir;
  std::ofstream(dir / "bad.jsonl") << "{\"prompt\": \"a\", \"response\": \"b\"}\nnot json\n";
  EXPECT_THROW(read_log(dir / "bad.jsonl"), MalformedInput);
}
