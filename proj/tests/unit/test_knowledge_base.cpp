#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <set>

#include "crate_fixtures.hpp"
#include "temp_dir.hpp"
#include "xcrate/error.hpp"
#include "xcrate/knowledge_base.hpp"
#include "xcrate/util/json_file.hpp"
#include "xcrate/util/text.hpp"

using namespace xcrate;
using namespace xcrate::kb;

namespace {

KnowledgeBase fixture_kb(const std::string &crate, const RetrievalConfig &config = {},
                         const RankerContext &ctx = {}) {
  auto crates = fixtures::index_fixture(crate);
  return build_kb(crates.at(crate), config, ctx);
}

std::vector<std::string> ids(const QueryOutcome &o) {
  std::vector<std::string> out;
  for (const auto &r : o.results) out.push_back(r.entry.api_id);
  return out;
}

}  // namespace

TEST(MakeQuery, PaperExampleString) {
  go::GoApiEntry e{"crypto/sha512", "New", "New returns a new hash.Hash computing the SHA-512 checksum.", ""};
  EXPECT_EQ(make_query(e).render(),
            "sha512.New: New returns a new hash.Hash computing the SHA-512 checksum.");
}

TEST(MakeQuery, EmptyDocUsesSignature) {
  go::GoApiEntry e{"crypto/sha512", "New", "", "func New() hash.Hash"};
  EXPECT_EQ(make_query(e).render(), "sha512.New: func New() hash.Hash");
}

TEST(MakeQuery, NewlinesCollapseAgainstOracle) {
  std::mt19937 rng(5);
  const std::string alphabet = "ab \n\t\r.";
  for (int trial = 0; trial < 200; ++trial) {
    std::string doc;
    for (int i = 0, n = static_cast<int>(rng() % 30); i < n; ++i) doc += alphabet[rng() % alphabet.size()];
    // Oracle: split on any whitespace, rejoin with single spaces.
    std::string expected;
    std::string word;
    auto flush = [&] {
      if (word.empty()) return;
      if (!expected.empty()) expected += ' ';
      expected += word;
      word.clear();
    };
    for (char c : doc) {
      if (c == ' ' || c == '\n' || c == '\t' || c == '\r') flush();
      else word += c;
    }
    flush();
    go::GoApiEntry e{"p/q", "F", doc, ""};
    EXPECT_EQ(make_query(e).render(), "q.F: " + expected);
  }
}

TEST(Tokenize, CamelCaseAndStopwords) {
  auto t = tokenize("SigningKey::to_bytes returns the SHA-512");
  std::set<std::string> s(t.begin(), t.end());
  EXPECT_TRUE(s.count("signingkey"));
  EXPECT_TRUE(s.count("signing"));
  EXPECT_TRUE(s.count("key"));
  EXPECT_TRUE(s.count("bytes"));
  EXPECT_TRUE(s.count("sha"));
  EXPECT_TRUE(s.count("512"));
  EXPECT_FALSE(s.count("the"));
  EXPECT_FALSE(s.count("to"));
}

TEST(NormalizeQuery, LowercaseCollapseKeepsPunctuation) {
  EXPECT_EQ(normalize_query("Sha512.New:  New\nRETURNS"), "sha512.new: new returns");
}

TEST(KnowledgeBase, EmptyIndexAnswersNothing) {
  KnowledgeBase kb = build_kb(index::ApiIndex("empty", {}));
  EXPECT_TRUE(kb.query(ApiQuery{"x.Y", "anything", std::nullopt}, 5).results.empty());
}

TEST(KnowledgeBase, DefaultsAndUnknownRanker) {
  KnowledgeBase kb = fixture_kb("sha2_fixture");
  EXPECT_GE(kb.size(), 3u);
  EXPECT_EQ(kb.config().stage1, "lexical");
  EXPECT_EQ(kb.config().k, 35);
  EXPECT_EQ(kb.config().top_n, 3);
  RetrievalConfig bad;
  bad.stage2 = "dense-encoder";
  EXPECT_THROW(fixture_kb("sha2_fixture", bad), UnknownRanker);
  RetrievalConfig listwise;
  listwise.stage3 = "llm-listwise";
  EXPECT_THROW(fixture_kb("sha2_fixture", listwise), UnknownRanker);
}

TEST(KnowledgeBase, Sha512NewRanksFirstWithCallEnablingImports) {
  KnowledgeBase kb = fixture_kb("sha2_fixture");
  go::GoApiEntry e{"crypto/sha512", "New", "New returns a new hash.Hash computing the SHA-512 checksum.", ""};
  auto out = kb.query(make_query(e), 3);
  ASSERT_FALSE(out.results.empty());
  const auto &top = out.results[0].entry;
  EXPECT_EQ(top.api_id, "Sha512::new");
  std::set<std::string> paths;
  for (const auto &p : top.import_paths) paths.insert(p.str());
  EXPECT_EQ(paths, (std::set<std::string>{"sha2_fixture::Sha512", "sha2_fixture::Digest"}));
}

TEST(KnowledgeBase, SeedResolvesToSigningKeyToBytes) {
  KnowledgeBase kb = fixture_kb("ed25519_fixture");
  go::GoApiEntry e{"crypto/ed25519", "PrivateKey.Seed",
                   "Seed returns the private key seed corresponding to priv.", ""};
  auto out = kb.query(make_query(e), 3);
  ASSERT_FALSE(out.results.empty());
  EXPECT_EQ(out.results[0].entry.api_id, "SigningKey::to_bytes");
}

TEST(KnowledgeBase, LargeNReturnsTotalOrder) {
  KnowledgeBase kb = fixture_kb("hex_fixture");
  auto out = kb.query(ApiQuery{"hex.X", "zzz unrelated", std::nullopt}, 1000);
  EXPECT_EQ(out.results.size(), kb.size());
  std::set<std::string> uniq;
  for (std::size_t i = 0; i < out.results.size(); ++i) {
    uniq.insert(out.results[i].entry.api_id);
    if (i > 0) {
      const auto &a = out.results[i - 1];
      const auto &b = out.results[i];
      EXPECT_TRUE(a.score > b.score || (a.score == b.score && a.entry.api_id < b.entry.api_id));
    }
  }
  EXPECT_EQ(uniq.size(), kb.size());
}

TEST(KnowledgeBase, CutoffAtK) {
  RetrievalConfig c;
  c.k = 2;
  KnowledgeBase kb = fixture_kb("ed25519_fixture", c);
  EXPECT_EQ(kb.query(ApiQuery{"a.B", "key", std::nullopt}, 10).results.size(), 2u);
  EXPECT_THROW(kb.query(ApiQuery{"a.B", "key", std::nullopt}, 0), MalformedInput);
}

TEST(KnowledgeBaseProperty, SubsetDeterminismAndMonotoneCutoff) {
  auto docs = fixtures::load_all_crates();
  std::mt19937 rng(17);
  std::vector<std::string> words{"key", "hash", "new", "sign", "verify", "bytes", "seed", "private",
                                 "public", "encode", "decode", "checksum", "rsa", "der", "salt"};
  for (const auto &[crate, doc] : docs) {
    KnowledgeBase kb = fixture_kb(crate);
    std::set<std::string> all;
    for (const auto &e : kb.entries()) all.insert(e.api_id);
    for (int trial = 0; trial < 20; ++trial) {
      std::string text;
      for (int i = 0; i < 4; ++i) text += words[rng() % words.size()] + " ";
      ApiQuery q{"pkg.F", text, std::nullopt};
      int n = 1 + static_cast<int>(rng() % 12);
      auto full = ids(kb.query(q, n));
      EXPECT_EQ(full, ids(kb.query(q, n)));
      std::set<std::string> uniq(full.begin(), full.end());
      EXPECT_EQ(uniq.size(), full.size());
      for (const auto &id : full) EXPECT_TRUE(all.count(id));
      for (int m = 1; m <= n; ++m) {
        auto prefix = ids(kb.query(q, m));
        EXPECT_TRUE(std::equal(prefix.begin(), prefix.end(), full.begin()));
      }
    }
  }
}

TEST(KnowledgeBase, LabeledCorpusGoldInTopThree) {
  auto corpus = util::read_json_file(fixtures::fixture_path("retrieval/corpus.json"));
  ASSERT_GE(corpus.size(), 10u);
  std::map<std::string, KnowledgeBase> kbs;
  for (const auto &c : corpus) {
    std::string crate = c.at("crate");
    if (!kbs.count(crate)) kbs.emplace(crate, fixture_kb(crate));
    go::GoApiEntry api{c["api"]["package"], c["api"]["name"], c["api"]["doc"], c["api"]["signature"]};
    auto top = ids(kbs.at(crate).query(make_query(api), 3));
    EXPECT_NE(std::find(top.begin(), top.end(), c.at("gold").get<std::string>()), top.end())
        << api.qualified_name() << " -> " << util::join(top, ", ");
  }
}

TEST(KnowledgeBase, RecordedRerankAndFallback) {
  fixtures::TempDir dir;
  ApiQuery q{"hex.EncodeToString", "EncodeToString returns the hexadecimal encoding of src.", std::nullopt};
  {
    std::ofstream out(dir / "scores.jsonl");
    out << nlohmann::json{{"query_hash", query_hash(q)}, {"api_id", "FromHexError"}, {"score", 9.0}}.dump() << "\n";
    out << nlohmann::json{{"query_hash", query_hash(q)}, {"api_id", "encode"}, {"score", 1.0}}.dump() << "\n";
  }
  RetrievalConfig c;
  c.stage2 = "recorded:" + (dir / "scores.jsonl").string();
  KnowledgeBase kb = fixture_kb("hex_fixture", c);
  auto out = kb.query(q, 2);
  EXPECT_FALSE(out.degraded);
  EXPECT_EQ(ids(out), (std::vector<std::string>{"FromHexError", "encode"}));
  EXPECT_EQ(out.results[0].stage, Stage::rerank);

  auto miss = kb.query(ApiQuery{"hex.DecodeString", "DecodeString returns bytes", std::nullopt}, 1);
  EXPECT_TRUE(miss.degraded);
  ASSERT_EQ(miss.results.size(), 1u);
  EXPECT_EQ(miss.results[0].stage, Stage::retrieve);
  EXPECT_EQ(miss.results[0].entry.api_id, "decode");
}

TEST(KnowledgeBase, ListwiseRerankThroughGateway) {
  auto gateway = llm::LlmGateway::live(std::make_unique<llm::ScriptProvider>(
      nlohmann::json::parse(R"([{"contains":["sha512.New"],"response":"[\"Digest::new\", \"Sha512::new\"]"}])")));
  RetrievalConfig c;
  c.stage3 = "llm-listwise";
  KnowledgeBase kb = fixture_kb("sha2_fixture", c, RankerContext{gateway, ""});
  go::GoApiEntry e{"crypto/sha512", "New", "New returns a new hash.Hash computing the SHA-512 checksum.", ""};
  auto out = kb.query(make_query(e), 3);
  EXPECT_FALSE(out.degraded);
  ASSERT_EQ(out.results.size(), 3u);
  EXPECT_EQ(out.results[0].entry.api_id, "Digest::new");
  EXPECT_EQ(out.results[1].entry.api_id, "Sha512::new");
  EXPECT_EQ(out.results[0].stage, Stage::listwise);

  auto failing = llm::LlmGateway::replay(std::vector<llm::PromptRecord>{});
  KnowledgeBase kb2 = fixture_kb("sha2_fixture", c, RankerContext{failing, ""});
  auto fallback = kb2.query(make_query(e), 3);
  EXPECT_TRUE(fallback.degraded);
  EXPECT_EQ(fallback.results[0].entry.api_id, "Sha512::new");
}

TEST(RetrievalConfig, JsonRoundTrip) {
  auto c = RetrievalConfig::from_json(nlohmann::json::parse(R"({"stage1":"lexical","stage2":null,"stage3":"llm-listwise"})"));
  EXPECT_EQ(c.k, 35);
  EXPECT_EQ(c.top_n, 3);
  EXPECT_FALSE(c.stage2);
  EXPECT_EQ(*c.stage3, "llm-listwise");
  EXPECT_EQ(c.to_json().at("stage3_candidates"), 35);
  EXPECT_THROW(RetrievalConfig::from_json(nlohmann::json::parse(R"({"k":0})")), MalformedInput);
}
