#pragma once

// Ranked retrieval over one crate's ApiIndex: stage 1 selects the top-k
// candidates, stage 2 optionally rescores them, stage 3 optionally performs a
// listwise rerank.

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "xcrate/api_index.hpp"
#include "xcrate/go_api.hpp"
#include "xcrate/llm_gateway.hpp"

namespace xcrate::kb {

using index::ApiEntry;
using index::ApiIndex;

inline constexpr int kDefaultK = 35;
inline constexpr int kDefaultTopN = 3;

struct RetrievalConfig {
  std::string stage1 = "lexical";
  std::optional<std::string> stage2;
  std::optional<std::string> stage3;
  int k = kDefaultK;
  int top_n = kDefaultTopN;
  /// How many of the current ordering stage 3 sees; unset means all stage-1 survivors.
  std::optional<int> stage3_candidates;

  static RetrievalConfig from_json(const nlohmann::json &j);
  nlohmann::json to_json() const;
};

enum class Stage { retrieve, rerank, listwise };
std::string_view to_string(Stage s);

struct ApiQuery {
  std::string source_api;
  std::string doc;
  std::optional<std::string> signature;

  /// `source_api + ": " + doc`, then the signature separated by a space.
  std::string render() const;
};

ApiQuery make_query(const go::GoApiEntry &api);

/// Lowercases and collapses whitespace; punctuation is kept.
std::string normalize_query(std::string_view text);

/// Lowercase word tokens. Splits on non-alphanumerics and additionally emits
/// the parts of camel-case words; a few function words are dropped.
std::vector<std::string> tokenize(std::string_view text);

std::string query_hash(const ApiQuery &q);

struct ScoredCandidate {
  const ApiEntry *entry = nullptr;
  double score = 0.0;
};

/// Sorts by score descending, then api_id ascending.
void sort_candidates(std::vector<ScoredCandidate> &c);

class Ranker {
 public:
  virtual ~Ranker() = default;
  virtual std::string id() const = 0;
  /// Rescores and sorts `candidates`. Throws RankerFailure.
  virtual std::vector<ScoredCandidate> rank(const ApiQuery &q,
                                            const std::vector<ScoredCandidate> &candidates) const = 0;
};

/// tf-idf cosine similarity over the tokens of api_id and doc.
class LexicalRanker : public Ranker {
 public:
  explicit LexicalRanker(const std::vector<ApiEntry> &corpus);
  std::string id() const override { return "lexical"; }
  std::vector<ScoredCandidate> rank(const ApiQuery &q,
                                    const std::vector<ScoredCandidate> &candidates) const override;
  double score(const ApiQuery &q, const ApiEntry &e) const;

 private:
  using Vector = std::map<std::string, double>;
  Vector weigh(const std::vector<std::string> &tokens) const;

  std::map<std::string, double> idf_;
  std::map<std::string, Vector> docs_;  // api_id -> normalized weights
};

/// Replays externally computed scores: JSONL of `{query_hash, api_id, score}`.
class RecordedRanker : public Ranker {
 public:
  explicit RecordedRanker(const std::filesystem::path &scores_file);
  std::string id() const override { return "recorded:" + source_; }
  std::vector<ScoredCandidate> rank(const ApiQuery &q,
                                    const std::vector<ScoredCandidate> &candidates) const override;

 private:
  std::string source_;
  std::map<std::string, std::map<std::string, double>> scores_;
};

/// Asks the model to order the candidates; answers are a JSON array of api_ids.
class ListwiseLlmRanker : public Ranker {
 public:
  ListwiseLlmRanker(std::shared_ptr<llm::LlmGateway> gateway, std::string crate);
  std::string id() const override { return "llm-listwise"; }
  std::vector<ScoredCandidate> rank(const ApiQuery &q,
                                    const std::vector<ScoredCandidate> &candidates) const override;
  std::string prompt(const ApiQuery &q, const std::vector<ScoredCandidate> &candidates) const;

 private:
  std::shared_ptr<llm::LlmGateway> gateway_;
  std::string crate_;
};

struct RankerContext {
  std::shared_ptr<llm::LlmGateway> gateway;
  std::string crate;
};

/// `lexical`, `recorded:<path>` or `llm-listwise`; `noop` yields nullptr.
/// Throws UnknownRanker.
std::shared_ptr<const Ranker> make_ranker(const std::string &id, const std::vector<ApiEntry> &corpus,
                                          const RankerContext &context);

struct RankedResult {
  ApiEntry entry;
  double score = 0.0;
  Stage stage = Stage::retrieve;
};

struct QueryOutcome {
  std::vector<RankedResult> results;
  bool degraded = false;  // a stage failed and its predecessor's ordering was kept
  std::vector<std::string> failures;
};

class KnowledgeBase {
 public:
  KnowledgeBase() = default;
  KnowledgeBase(std::string crate, std::vector<ApiEntry> entries, RetrievalConfig config,
                std::shared_ptr<const Ranker> stage1, std::shared_ptr<const Ranker> stage2,
                std::shared_ptr<const Ranker> stage3);

  const std::string &crate_name() const { return crate_; }
  const std::vector<ApiEntry> &entries() const { return entries_; }
  const RetrievalConfig &config() const { return config_; }
  std::size_t size() const { return entries_.size(); }

  /// The best min(n, candidates) entries. n must be positive.
  QueryOutcome query(const ApiQuery &q, int n) const;
  QueryOutcome query(const ApiQuery &q) const { return query(q, config_.top_n); }

 private:
  std::string crate_;
  std::vector<ApiEntry> entries_;
  RetrievalConfig config_;
  std::shared_ptr<const Ranker> stage1_, stage2_, stage3_;
};

/// Throws UnknownRanker.
KnowledgeBase build_kb(const ApiIndex &index, const RetrievalConfig &config = {},
                       const RankerContext &context = {});

}  // namespace xcrate::kb
