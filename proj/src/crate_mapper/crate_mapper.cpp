#include "xcrate/crate_mapper.hpp"

#include <algorithm>
#include <set>

#include "xcrate/error.hpp"
#include "xcrate/knowledge_base.hpp"
#include "xcrate/util/json_file.hpp"
#include "xcrate/util/text.hpp"

namespace xcrate::mapping {

using nlohmann::json;

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::proposed_by_llm: return "proposed_by_llm";
    case Provenance::keyword_search: return "keyword_search";
    case Provenance::manual: return "manual";
  }
  return "?";
}

Provenance provenance_from_string(std::string_view s) {
  if (s == "proposed_by_llm") return Provenance::proposed_by_llm;
  if (s == "keyword_search") return Provenance::keyword_search;
  if (s == "manual") return Provenance::manual;
  throw MalformedInput("unknown provenance '" + std::string(s) + "'");
}

CandidateCatalog parse_catalog(const json &j) {
  if (!j.is_array()) throw MalformedInput("candidate catalog must be an array");
  CandidateCatalog out;
  try {
    for (const auto &c : j) {
      CandidateCrate cc{c.at("crate").get<std::string>(), c.value("description", ""), {}};
      for (const auto &k : c.value("keywords", json::array())) cc.keywords.push_back(k.get<std::string>());
      out.push_back(std::move(cc));
    }
  } catch (const json::exception &e) {
    throw MalformedInput(std::string("candidate catalog: ") + e.what());
  }
  return out;
}

CandidateCatalog load_catalog(const std::filesystem::path &path) {
  return parse_catalog(util::read_json_file(path));
}

const std::string &CrateMapping::crate_for(const std::string &package) const {
  auto it = entries.find(package);
  if (it == entries.end()) throw MissingKb("package " + package + " has no mapped crate");
  return it->second;
}

json CrateMapping::to_json() const {
  json out = json::object();
  for (const auto &[pkg, crate] : entries) {
    auto p = provenance.find(pkg);
    out[pkg] = {{"crate", crate},
                {"provenance", p == provenance.end() ? "manual" : std::string(to_string(p->second))}};
  }
  return out;
}

namespace {

std::set<std::string> package_tokens(const go::GoPackageDoc &package) {
  std::string text = util::replace_all(package.package, "/", " ") + " " + package.summary;
  for (const auto &e : package.entries) text += " " + e.name;
  auto t = kb::tokenize(text);
  return {t.begin(), t.end()};
}

const CandidateCrate *find_candidate(const CandidateCatalog &catalog, const std::string &crate) {
  for (const auto &c : catalog) {
    if (c.crate == crate) return &c;
  }
  return nullptr;
}

std::string clean_proposal(const std::string &reply) {
  std::string s = util::trim(reply);
  auto nl = s.find('\n');
  if (nl != std::string::npos) s = s.substr(0, nl);
  std::string out;
  for (char c : s) {
    if (c == '`' || c == '"' || c == '\'') continue;
    if (c == ' ' || c == '\t') break;
    out += c;
  }
  return util::replace_all(out, "-", "_");
}

}  // namespace

std::vector<KeywordHit> keyword_search(const go::GoPackageDoc &package, const CandidateCatalog &catalog) {
  std::set<std::string> query = package_tokens(package);
  std::vector<KeywordHit> hits;
  for (const auto &c : catalog) {
    std::set<std::string> terms;
    for (const auto &k : c.keywords) {
      for (const auto &t : kb::tokenize(k)) terms.insert(t);
    }
    for (const auto &t : kb::tokenize(util::replace_all(c.crate, "_", " "))) terms.insert(t);
    int matches = 0;
    for (const auto &t : terms) matches += static_cast<int>(query.count(t));
    if (matches > 0) hits.push_back({c.crate, matches});
  }
  std::sort(hits.begin(), hits.end(), [](const KeywordHit &a, const KeywordHit &b) {
    if (a.matches != b.matches) return a.matches > b.matches;
    return a.crate < b.crate;
  });
  return hits;
}

std::string proposal_prompt(const go::GoPackageDoc &package) {
  std::string p = "Propose the single Rust crate that best replaces the Go package " + package.package +
                  ".\n\nPackage documentation:\n" + util::collapse_whitespace(package.summary) + "\n";
  if (!package.entries.empty()) {
    p += "\nAPIs used:\n";
    for (const auto &e : package.entries) p += "- " + e.qualified_name() + "\n";
  }
  p += "\nAnswer with the crate name only.\n";
  return p;
}

std::optional<std::string> llm_proposal(const go::GoPackageDoc &package, llm::LlmGateway *gateway) {
  if (!gateway) return std::nullopt;
  try {
    std::string name = clean_proposal(gateway->complete(proposal_prompt(package)));
    if (name.empty()) return std::nullopt;
    return name;
  } catch (const ReplayMiss &) {
    return std::nullopt;
  } catch (const ProviderError &) {
    return std::nullopt;
  }
}

CrateMapping match_crates(const std::vector<go::GoPackageDoc> &packages, const CandidateCatalog &catalog,
                          llm::LlmGateway *gateway, const CrateMapping &preset) {
  CrateMapping mapping = preset;
  std::vector<std::string> unmatched;
  for (const auto &pkg : packages) {
    if (mapping.entries.count(pkg.package)) continue;
    std::optional<std::string> proposal = llm_proposal(pkg, gateway);
    std::vector<KeywordHit> hits = keyword_search(pkg, catalog);
    if (!proposal && hits.empty()) {
      unmatched.push_back(pkg.package);
      continue;
    }
    std::string chosen;
    Provenance prov = Provenance::proposed_by_llm;
    if (!proposal) {
      chosen = hits.front().crate;
      prov = Provenance::keyword_search;
    } else if (hits.empty() || hits.front().crate == *proposal) {
      chosen = *proposal;
    } else {
      // Disagreement: rerank the proposal and the keyword hits on their documentation.
      std::vector<index::ApiEntry> docs;
      auto add = [&](const std::string &crate) {
        for (const auto &d : docs) {
          if (d.api_id == crate) return;
        }
        index::ApiEntry e;
        e.api_id = crate;
        if (const CandidateCrate *c = find_candidate(catalog, crate)) {
          e.doc = c->description + " " + util::join(c->keywords, " ");
        }
        docs.push_back(std::move(e));
      };
      add(*proposal);
      for (const auto &h : hits) add(h.crate);
      kb::LexicalRanker ranker(docs);
      kb::ApiQuery q{pkg.package, pkg.summary, std::nullopt};
      double proposal_score = ranker.score(q, docs.front());
      chosen = *proposal;
      double best = proposal_score;
      for (std::size_t i = 1; i < docs.size(); ++i) {
        double s = ranker.score(q, docs[i]);
        if (s > best) {
          best = s;
          chosen = docs[i].api_id;
        }
      }
      prov = chosen == *proposal ? Provenance::proposed_by_llm : Provenance::keyword_search;
    }
    mapping.entries[pkg.package] = chosen;
    mapping.provenance[pkg.package] = prov;
  }
  if (!unmatched.empty()) {
    throw NoCandidate("no crate candidate for: " + util::join(unmatched, ", ") +
                      " (add a manual override)");
  }
  return mapping;
}

CrateMapping apply_overrides(CrateMapping mapping, const json &overrides) {
  if (!overrides.is_object()) throw MalformedOverride("overrides must be a JSON object");
  for (const auto &[pkg, crate] : overrides.items()) {
    if (!crate.is_string() || crate.get<std::string>().empty()) {
      throw MalformedOverride("override for " + pkg + " must be a non-empty crate name");
    }
    mapping.entries[pkg] = crate.get<std::string>();
    mapping.provenance[pkg] = Provenance::manual;
  }
  return mapping;
}

CrateMapping load_manual_overrides(CrateMapping mapping, const std::filesystem::path &overrides_file) {
  json j;
  try {
    j = json::parse(util::read_file(overrides_file));
  } catch (const json::exception &e) {
    throw MalformedOverride(overrides_file.string() + ": " + e.what());
  } catch (const MalformedInput &e) {
    throw MalformedOverride(e.what());
  }
  return apply_overrides(std::move(mapping), j);
}

}  // namespace xcrate::mapping
