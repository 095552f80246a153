#include "xcrate/knowledge_base.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "xcrate/error.hpp"
#include "xcrate/util/hash.hpp"
#include "xcrate/util/text.hpp"

namespace xcrate::kb {

using nlohmann::json;

RetrievalConfig RetrievalConfig::from_json(const json &j) {
  RetrievalConfig c;
  try {
    auto opt = [&j](const char *key) -> std::optional<std::string> {
      if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
      return j.at(key).get<std::string>();
    };
    if (j.contains("stage1")) c.stage1 = j.at("stage1").get<std::string>();
    c.stage2 = opt("stage2");
    c.stage3 = opt("stage3");
    c.k = j.value("k", kDefaultK);
    c.top_n = j.value("top_n", kDefaultTopN);
    if (j.contains("stage3_candidates") && !j.at("stage3_candidates").is_null()) {
      c.stage3_candidates = j.at("stage3_candidates").get<int>();
    }
  } catch (const json::exception &e) {
    throw MalformedInput(std::string("retrieval config: ") + e.what());
  }
  if (c.k < 1 || c.top_n < 1) throw MalformedInput("retrieval config: k and top_n must be positive");
  return c;
}

json RetrievalConfig::to_json() const {
  auto opt = [](const std::optional<std::string> &s) { return s ? json(*s) : json(nullptr); };
  return {{"stage1", stage1},
          {"stage2", opt(stage2)},
          {"stage3", opt(stage3)},
          {"k", k},
          {"top_n", top_n},
          {"stage3_candidates", stage3_candidates.value_or(k)}};
}

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::retrieve: return "retrieve";
    case Stage::rerank: return "rerank";
    case Stage::listwise: return "listwise";
  }
  return "?";
}

std::string ApiQuery::render() const {
  std::string out = source_api + ": " + util::collapse_whitespace(doc);
  if (signature && !signature->empty()) {
    if (out.back() != ' ') out += ' ';
    out += util::collapse_whitespace(*signature);
  }
  return out;
}

ApiQuery make_query(const go::GoApiEntry &api) {
  ApiQuery q;
  q.source_api = api.qualified_name();
  q.doc = util::collapse_whitespace(api.doc);
  if (!api.signature.empty()) q.signature = api.signature;
  return q;
}

std::string normalize_query(std::string_view text) {
  return util::to_lower(util::collapse_whitespace(text));
}

namespace {

const std::set<std::string> &stopwords() {
  static const std::set<std::string> words{"a",  "an", "and", "as",  "by",      "for",    "in",
                                           "is", "it", "its", "of",  "on",      "or",     "the",
                                           "to", "with", "this", "that", "returns", "return"};
  return words;
}

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }
bool is_lower(char c) { return std::islower(static_cast<unsigned char>(c)) != 0; }

// "SigningKey" -> {"Signing", "Key"}; "RSAKey" -> {"RSA", "Key"}.
std::vector<std::string> camel_parts(const std::string &word) {
  std::vector<std::string> parts;
  std::string cur;
  for (std::size_t i = 0; i < word.size(); ++i) {
    char c = word[i];
    bool boundary = false;
    if (!cur.empty() && is_upper(c)) {
      char prev = word[i - 1];
      bool next_lower = i + 1 < word.size() && is_lower(word[i + 1]);
      boundary = is_lower(prev) || (is_upper(prev) && next_lower);
    }
    if (boundary) {
      parts.push_back(cur);
      cur.clear();
    }
    cur += c;
  }
  if (!cur.empty()) parts.push_back(cur);
  return parts;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  auto emit = [&out](const std::string &w) {
    std::string lw = util::to_lower(w);
    if (!lw.empty() && !stopwords().count(lw)) out.push_back(lw);
  };
  std::string word;
  auto flush = [&] {
    if (word.empty()) return;
    auto parts = camel_parts(word);
    emit(word);
    if (parts.size() > 1) {
      for (const auto &p : parts) emit(p);
    }
    word.clear();
  };
  for (char c : text) {
    if (is_alnum(c)) {
      word += c;
    } else {
      flush();
    }
  }
  flush();
  return out;
}

std::string query_hash(const ApiQuery &q) { return util::sha256_hex(q.render()); }

void sort_candidates(std::vector<ScoredCandidate> &c) {
  std::stable_sort(c.begin(), c.end(), [](const ScoredCandidate &a, const ScoredCandidate &b) {
    if (a.score != b.score) return a.score > b.score;
    return a.entry->api_id < b.entry->api_id;
  });
}

// ---------------------------------------------------------------------------
// Lexical

LexicalRanker::LexicalRanker(const std::vector<ApiEntry> &corpus) {
  std::map<std::string, std::vector<std::string>> tokens;
  std::map<std::string, int> df;
  for (const auto &e : corpus) {
    auto t = tokenize(e.api_id + " " + e.doc);
    for (const auto &w : std::set<std::string>(t.begin(), t.end())) ++df[w];
    tokens[e.api_id] = std::move(t);
  }
  double n = static_cast<double>(corpus.size());
  for (const auto &[w, count] : df) idf_[w] = std::log(1.0 + n / count);
  for (const auto &[id, t] : tokens) docs_[id] = weigh(t);
}

LexicalRanker::Vector LexicalRanker::weigh(const std::vector<std::string> &tokens) const {
  std::map<std::string, int> tf;
  for (const auto &t : tokens) ++tf[t];
  Vector v;
  double norm = 0;
  for (const auto &[w, count] : tf) {
    auto it = idf_.find(w);
    if (it == idf_.end()) continue;
    double weight = (1.0 + std::log(static_cast<double>(count))) * it->second;
    v[w] = weight;
    norm += weight * weight;
  }
  if (norm > 0) {
    norm = std::sqrt(norm);
    for (auto &[w, x] : v) x /= norm;
  }
  return v;
}

double LexicalRanker::score(const ApiQuery &q, const ApiEntry &e) const {
  auto doc = docs_.find(e.api_id);
  if (doc == docs_.end()) return 0.0;
  Vector qv = weigh(tokenize(normalize_query(q.render())));
  double dot = 0;
  for (const auto &[w, x] : qv) {
    auto it = doc->second.find(w);
    if (it != doc->second.end()) dot += x * it->second;
  }
  return dot;
}

std::vector<ScoredCandidate> LexicalRanker::rank(const ApiQuery &q,
                                                 const std::vector<ScoredCandidate> &candidates) const {
  std::vector<ScoredCandidate> out;
  out.reserve(candidates.size());
  for (const auto &c : candidates) out.push_back({c.entry, score(q, *c.entry)});
  sort_candidates(out);
  return out;
}

// ---------------------------------------------------------------------------
// Recorded scores

RecordedRanker::RecordedRanker(const std::filesystem::path &scores_file)
    : source_(scores_file.string()) {
  std::ifstream in(scores_file);
  if (!in) throw UnknownRanker("recorded scores file not found: " + source_);
  std::string line;
  while (std::getline(in, line)) {
    if (util::trim(line).empty()) continue;
    try {
      json j = json::parse(line);
      scores_[j.at("query_hash").get<std::string>()][j.at("api_id").get<std::string>()] =
          j.at("score").get<double>();
    } catch (const json::exception &e) {
      throw UnknownRanker("malformed recorded scores in " + source_ + ": " + e.what());
    }
  }
}

std::vector<ScoredCandidate> RecordedRanker::rank(const ApiQuery &q,
                                                  const std::vector<ScoredCandidate> &candidates) const {
  auto it = scores_.find(query_hash(q));
  if (it == scores_.end()) throw RankerFailure("no recorded scores for query '" + q.render() + "'");
  std::vector<ScoredCandidate> out;
  for (const auto &c : candidates) {
    auto s = it->second.find(c.entry->api_id);
    out.push_back({c.entry, s == it->second.end() ? std::numeric_limits<double>::lowest() : s->second});
  }
  sort_candidates(out);
  return out;
}

// ---------------------------------------------------------------------------
// Listwise

ListwiseLlmRanker::ListwiseLlmRanker(std::shared_ptr<llm::LlmGateway> gateway, std::string crate)
    : gateway_(std::move(gateway)), crate_(std::move(crate)) {}

std::string ListwiseLlmRanker::prompt(const ApiQuery &q,
                                      const std::vector<ScoredCandidate> &candidates) const {
  std::string p = "Rank the following APIs of the Rust crate " + crate_ +
                  " by how well each one can replace the source API.\n\nSource API: " + q.render() +
                  "\n\nCandidates:\n";
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    p += std::to_string(i + 1) + ". " + candidates[i].entry->api_id + " - " +
         util::collapse_whitespace(candidates[i].entry->doc) + "\n";
  }
  p += "\nAnswer with a JSON array of candidate api_ids, best first.\n";
  return p;
}

std::vector<ScoredCandidate> ListwiseLlmRanker::rank(const ApiQuery &q,
                                                     const std::vector<ScoredCandidate> &candidates) const {
  if (candidates.empty()) return {};
  std::string answer;
  try {
    answer = gateway_->complete(prompt(q, candidates));
  } catch (const Error &e) {
    throw RankerFailure(std::string("listwise rerank: ") + e.what());
  }
  auto open = answer.find('[');
  auto close = answer.rfind(']');
  if (open == std::string::npos || close == std::string::npos || close < open) {
    throw RankerFailure("listwise rerank answer has no JSON array");
  }
  json order;
  try {
    order = json::parse(answer.substr(open, close - open + 1));
  } catch (const json::exception &e) {
    throw RankerFailure(std::string("listwise rerank answer: ") + e.what());
  }
  std::vector<ScoredCandidate> out;
  std::set<const ApiEntry *> used;
  auto take = [&](const ApiEntry *e) {
    if (used.insert(e).second) out.push_back({e, 0.0});
  };
  for (const auto &item : order) {
    if (item.is_string()) {
      for (const auto &c : candidates) {
        if (c.entry->api_id == item.get<std::string>()) take(c.entry);
      }
    } else if (item.is_number_integer()) {
      auto i = item.get<long>();
      if (i >= 1 && static_cast<std::size_t>(i) <= candidates.size()) take(candidates[i - 1].entry);
    }
  }
  for (const auto &c : candidates) take(c.entry);
  for (std::size_t i = 0; i < out.size(); ++i) out[i].score = static_cast<double>(out.size() - i);
  return out;
}

std::shared_ptr<const Ranker> make_ranker(const std::string &id, const std::vector<ApiEntry> &corpus,
                                          const RankerContext &context) {
  if (id == "noop" || id.empty()) return nullptr;
  if (id == "lexical") return std::make_shared<LexicalRanker>(corpus);
  if (id.rfind("recorded:", 0) == 0) return std::make_shared<RecordedRanker>(id.substr(9));
  if (id == "llm-listwise") {
    if (!context.gateway) throw UnknownRanker("llm-listwise requires a model gateway");
    return std::make_shared<ListwiseLlmRanker>(context.gateway, context.crate);
  }
  throw UnknownRanker("unknown ranker '" + id + "'");
}

// ---------------------------------------------------------------------------
// Knowledge base

KnowledgeBase::KnowledgeBase(std::string crate, std::vector<ApiEntry> entries, RetrievalConfig config,
                             std::shared_ptr<const Ranker> stage1, std::shared_ptr<const Ranker> stage2,
                             std::shared_ptr<const Ranker> stage3)
    : crate_(std::move(crate)),
      entries_(std::move(entries)),
      config_(std::move(config)),
      stage1_(std::move(stage1)),
      stage2_(std::move(stage2)),
      stage3_(std::move(stage3)) {}

QueryOutcome KnowledgeBase::query(const ApiQuery &q, int n) const {
  if (n < 1) throw MalformedInput("query size must be positive");
  QueryOutcome outcome;
  std::vector<ScoredCandidate> current;
  current.reserve(entries_.size());
  for (const auto &e : entries_) current.push_back({&e, 0.0});
  sort_candidates(current);
  std::vector<Stage> stages(current.size(), Stage::retrieve);

  auto apply = [&](const std::shared_ptr<const Ranker> &ranker, Stage s, std::size_t limit) {
    if (!ranker) return;
    auto split = static_cast<std::ptrdiff_t>(std::min(limit, current.size()));
    std::vector<ScoredCandidate> head(current.begin(), current.begin() + split);
    try {
      std::vector<ScoredCandidate> ranked = ranker->rank(q, head);
      if (ranked.size() != head.size()) throw RankerFailure("ranker changed the candidate count");
      std::copy(ranked.begin(), ranked.end(), current.begin());
      std::fill(stages.begin(), stages.begin() + split, s);
    } catch (const RankerFailure &e) {
      outcome.degraded = true;
      outcome.failures.push_back(ranker->id() + ": " + e.what());
    }
  };

  apply(stage1_, Stage::retrieve, current.size());
  if (current.size() > static_cast<std::size_t>(config_.k)) {
    current.resize(static_cast<std::size_t>(config_.k));
    stages.resize(current.size());
  }
  apply(stage2_, Stage::rerank, current.size());
  apply(stage3_, Stage::listwise,
        static_cast<std::size_t>(config_.stage3_candidates.value_or(config_.k)));

  std::size_t count = std::min(static_cast<std::size_t>(n), current.size());
  for (std::size_t i = 0; i < count; ++i) {
    outcome.results.push_back({*current[i].entry, current[i].score, stages[i]});
  }
  return outcome;
}

KnowledgeBase build_kb(const ApiIndex &index, const RetrievalConfig &config,
                       const RankerContext &context) {
  RankerContext ctx = context;
  if (ctx.crate.empty()) ctx.crate = index.crate_name();
  auto resolve = [&](const std::optional<std::string> &id) -> std::shared_ptr<const Ranker> {
    return id ? make_ranker(*id, index.entries(), ctx) : nullptr;
  };
  auto s1 = make_ranker(config.stage1, index.entries(), ctx);
  auto s2 = resolve(config.stage2);
  auto s3 = resolve(config.stage3);
  return KnowledgeBase(index.crate_name(), index.entries(), config, std::move(s1), std::move(s2),
                       std::move(s3));
}

}  // namespace xcrate::kb
