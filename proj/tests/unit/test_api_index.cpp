#include <gtest/gtest.h>

#include <algorithm>

#include "crate_fixtures.hpp"
#include "reachability_oracle.hpp"
#include "synthetic_crates.hpp"
#include "xcrate/api_index.hpp"
#include "xcrate/error.hpp"

using namespace xcrate;
using namespace xcrate::index;
using doc::Path;

namespace {

std::vector<std::string> rendered(const ApiEntry &e) {
  std::vector<std::string> out;
  for (const auto &p : e.import_paths) out.push_back(p.str());
  return out;
}

bool has_path(const ApiEntry &e, const std::string &p) {
  auto r = rendered(e);
  return std::find(r.begin(), r.end(), p) != r.end();
}

doc::ModuleDoc parse(const std::string &json) { return doc::parse_crate_doc(json); }

}  // namespace

TEST(ApiIndex, SingleRootType) {
  auto root = parse(R"({"name":"c","visibility":"public","reexports":[],"items":[
    {"kind":"type","name":"Foo","doc":"A foo.","visibility":"public"}]})");
  ApiIndex idx = compute_items_map(root, {});
  ASSERT_EQ(idx.size(), 1u);
  EXPECT_EQ(idx.entries()[0].api_id, "Foo");
  EXPECT_EQ(idx.entries()[0].doc, "A foo.");
  EXPECT_EQ(rendered(idx.entries()[0]), (std::vector<std::string>{"c::Foo"}));
}

TEST(ApiIndex, Ed25519RootReexportOnly) {
  auto crates = fixtures::index_fixture("ed25519_fixture");
  const ApiIndex &idx = crates.at("ed25519_fixture");
  const ApiEntry *sk = idx.find("SigningKey");
  ASSERT_NE(sk, nullptr);
  EXPECT_EQ(rendered(*sk), (std::vector<std::string>{"ed25519_fixture::SigningKey"}));
  const ApiEntry *to_bytes = idx.find("SigningKey::to_bytes");
  ASSERT_NE(to_bytes, nullptr);
  EXPECT_EQ(rendered(*to_bytes), (std::vector<std::string>{"ed25519_fixture::SigningKey"}));
}

TEST(ApiIndex, Sha2TraitPathAttachedToTraitMethods) {
  auto crates = fixtures::index_fixture("sha2_fixture");
  ASSERT_TRUE(crates.count("digest_fixture"));
  const ApiIndex &idx = crates.at("sha2_fixture");
  const ApiEntry *m = idx.find("Sha512::new");
  ASSERT_NE(m, nullptr);
  EXPECT_EQ(rendered(*m), (std::vector<std::string>{"sha2_fixture::Digest", "sha2_fixture::Sha512"}));
  EXPECT_EQ(m->trait_key, "digest_fixture::Digest");
  const ApiEntry *digest = idx.find("Digest");
  ASSERT_NE(digest, nullptr);
  EXPECT_EQ(rendered(*digest), (std::vector<std::string>{"sha2_fixture::Digest"}));
  EXPECT_EQ(digest->doc, crates.at("digest_fixture").find("Digest")->doc);
  EXPECT_FALSE(idx.has_import_path(Path::parse("sha2_fixture::core_api::Sha512")));
}

TEST(ApiIndex, ExtractionOrderIsPostOrder) {
  auto docs = fixtures::load_all_crates();
  std::vector<std::string> seen;
  auto crates = extract_crate(docs.at("sha2_fixture"), docs, fixtures::load_fixture_deps());
  for (const auto &[name, idx] : crates) seen.push_back(name);
  EXPECT_EQ(seen, (std::vector<std::string>{"digest_fixture", "sha2_fixture"}));
}

TEST(ApiIndex, MissingDependencyDoc) {
  auto docs = fixtures::load_all_crates();
  std::map<std::string, doc::ModuleDoc> only_root{{"sha2_fixture", docs.at("sha2_fixture")}};
  EXPECT_THROW(extract_crate(docs.at("sha2_fixture"), only_root, fixtures::load_fixture_deps()),
               MissingDependencyDoc);
}

TEST(ApiIndex, PrivateTraitMethodsAreDeleted) {
  ExtractionLog log;
  auto crates = fixtures::index_fixture("ed25519_fixture", &log);
  const ApiIndex &idx = crates.at("ed25519_fixture");
  EXPECT_EQ(idx.find("SigningKey::clamp_scalar"), nullptr);
  EXPECT_FALSE(log.warnings.empty());
  const ApiEntry *sign = idx.find("SigningKey::sign");
  ASSERT_NE(sign, nullptr);
  EXPECT_TRUE(has_path(*sign, "ed25519_fixture::Signer"));
}

TEST(ApiIndex, InherentMethodUsesTypePath) {
  auto root = parse(R"({"name":"c","visibility":"public","reexports":[],"items":[
    {"kind":"type","name":"T","visibility":"public",
     "impl_blocks":[{"for_type":"T","methods":[{"name":"new","doc":"make"}]}]}]})");
  ApiIndex idx = compute_items_map(root, {});
  ASSERT_NE(idx.find("T::new"), nullptr);
  EXPECT_EQ(rendered(*idx.find("T::new")), (std::vector<std::string>{"c::T"}));
  EXPECT_TRUE(idx.find("T::new")->trait_key.empty());
}

TEST(ApiIndex, TraitAtTwoPublicPaths) {
  auto root = parse(R"({"name":"c","visibility":"public","items":[
    {"kind":"module","name":"inner","visibility":"private","submodule":{"items":[
      {"kind":"trait","name":"Tr","visibility":"public","methods":[{"name":"go"}]}],"reexports":[]}},
    {"kind":"module","name":"prelude","visibility":"public","submodule":{"items":[],
      "reexports":["crate::inner::Tr"]}},
    {"kind":"type","name":"T","visibility":"public",
     "impl_blocks":[{"trait_name":"Tr","for_type":"T","methods":[{"name":"go"}]}]}],
    "reexports":["crate::inner::Tr"]})");
  ApiIndex idx = compute_items_map(root, {});
  const ApiEntry *m = idx.find("T::go");
  ASSERT_NE(m, nullptr);
  auto paths = rendered(*m);
  std::set<std::string> got(paths.begin(), paths.end());

  fixtures::ReachabilityOracle oracle({{"c", &root}});
  auto reach = oracle.enumerate("c", 6);
  std::set<std::string> expected = reach.at("c::T");
  expected.insert(reach.at("c::inner::Tr").begin(), reach.at("c::inner::Tr").end());
  EXPECT_EQ(got, expected);
  EXPECT_EQ(got, (std::set<std::string>{"c::T", "c::Tr", "c::prelude::Tr"}));
}

TEST(ApiIndex, PrivateSubmoduleWithoutReexportIsInvisible) {
  auto root = parse(R"({"name":"c","visibility":"public","reexports":[],"items":[
    {"kind":"module","name":"hidden","visibility":"private","submodule":{"items":[
      {"kind":"type","name":"Secret","visibility":"public"}],"reexports":[]}}]})");
  EXPECT_TRUE(compute_items_map(root, {}).empty());
}

TEST(ApiIndex, InternalReexportThroughPrivateModule) {
  auto root = parse(R"({"name":"c","visibility":"public","items":[
    {"kind":"module","name":"inner","visibility":"private","submodule":{"items":[
      {"kind":"type","name":"Widget","visibility":"public"}],"reexports":[]}}],
    "reexports":["crate::inner::Widget"]})");
  ApiIndex idx = compute_items_map(root, {});
  ASSERT_NE(idx.find("Widget"), nullptr);
  EXPECT_EQ(rendered(*idx.find("Widget")), (std::vector<std::string>{"c::Widget"}));
  CrateTrees trees{{"c", &root}};
  EXPECT_TRUE(is_valid_import_path(Path::parse("c::Widget"), trees));
  EXPECT_FALSE(is_valid_import_path(Path::parse("c::inner::Widget"), trees));
}

TEST(ApiIndex, TraitInPublicAndPrivateModules) {
  auto root = parse(R"({"name":"c","visibility":"public","items":[
    {"kind":"trait","name":"RootTr","visibility":"public"},
    {"kind":"module","name":"m","visibility":"public","submodule":{"items":[
      {"kind":"trait","name":"MTr","visibility":"public"}],"reexports":[]}},
    {"kind":"module","name":"p","visibility":"private","submodule":{"items":[
      {"kind":"trait","name":"PTr","visibility":"public"}],"reexports":[]}}],
    "reexports":["c::p::PTr"]})");
  ApiIndex idx = compute_items_map(root, {});
  EXPECT_EQ(rendered(*idx.find("RootTr")), (std::vector<std::string>{"c::RootTr"}));
  EXPECT_EQ(rendered(*idx.find("MTr")), (std::vector<std::string>{"c::m::MTr"}));
  EXPECT_EQ(rendered(*idx.find("PTr")), (std::vector<std::string>{"c::PTr"}));
}

TEST(ApiIndex, ExtractTypeEmitsOnePendingPerMethod) {
  auto sha2 = fixtures::load_crate("sha2_fixture");
  const doc::ItemDoc *sha512 = sha2.find_item("core_api")->submodule->find_item("Sha512");
  PartialIndex part = extract_type(Path::parse("sha2_fixture"), *sha512,
                                   Path::parse("sha2_fixture::core_api::Sha512"));
  EXPECT_EQ(part.entries.size(), 1u);
  ASSERT_EQ(part.pending.size(), 3u);
  for (const auto &[key, pm] : part.pending) {
    ASSERT_TRUE(pm.defining_trait.has_value());
    EXPECT_EQ(pm.defining_trait->name, "Digest");
  }
  doc::ItemDoc bare;
  bare.kind = doc::ItemKind::type;
  bare.name = "Bare";
  PartialIndex single = extract_type(Path::parse("c"), bare, Path::parse("c::Bare"));
  EXPECT_EQ(single.entries.size(), 1u);
  EXPECT_TRUE(single.pending.empty());
}

TEST(ApiIndex, TraitMethodDeclarationsUseTraitPath) {
  auto crates = fixtures::index_fixture("sha2_fixture");
  const ApiEntry *decl = crates.at("sha2_fixture").find("Digest::update");
  ASSERT_NE(decl, nullptr);
  EXPECT_EQ(rendered(*decl), (std::vector<std::string>{"sha2_fixture::Digest"}));
}

TEST(ApiIndex, ExternalModuleReexportRebasesPaths) {
  auto dep = parse(R"({"name":"dep","visibility":"public","reexports":[],"items":[
    {"kind":"module","name":"sub","visibility":"public","submodule":{"items":[
      {"kind":"type","name":"Thing","visibility":"public"}],"reexports":[]}}]})");
  auto root = parse(R"({"name":"top","visibility":"public","items":[],"reexports":["dep::sub"]})");
  CratesMap crates{{"dep", compute_items_map(dep, {})}};
  ApiIndex idx = compute_items_map(root, crates);
  ASSERT_NE(idx.find("Thing"), nullptr);
  EXPECT_EQ(rendered(*idx.find("Thing")), (std::vector<std::string>{"top::sub::Thing"}));
}

TEST(ApiIndex, UnresolvedReexports) {
  auto local = parse(R"({"name":"c","visibility":"public","items":[],"reexports":["crate::nope::X"]})");
  EXPECT_THROW(compute_items_map(local, {}), UnresolvedReexport);
  auto external = parse(R"({"name":"c","visibility":"public","items":[],"reexports":["other::X"]})");
  EXPECT_THROW(compute_items_map(external, {}), UnresolvedReexport);
  auto dep = parse(R"({"name":"other","visibility":"public","items":[],"reexports":[]})");
  CratesMap crates{{"other", compute_items_map(dep, {})}};
  EXPECT_THROW(compute_items_map(external, crates), UnresolvedReexport);
}

TEST(ApiIndex, AliasChainsBoundedAtEight) {
  auto make = [](int hops) {
    std::string items = R"({"kind":"type","name":"Target","visibility":"public"})";
    std::string inner = "crate::m0::Target";
    for (int i = 1; i <= hops; ++i) {
      items += R"(,{"kind":"module","name":"m)" + std::to_string(i) +
               R"(","visibility":"private","submodule":{"items":[],"reexports":[{"path":")" + inner +
               R"(","visibility":"private"}]}})";
      inner = "crate::m" + std::to_string(i) + "::Target";
    }
    std::string json = R"({"name":"c","visibility":"public","items":[{"kind":"module","name":"m0",)"
                       R"("visibility":"private","submodule":{"items":[)" +
                       items.substr(0, items.find("}") + 1) + R"(],"reexports":[]}})" +
                       items.substr(items.find("}") + 1) + R"(],"reexports":[")" + inner + R"("]})";
    return doc::parse_crate_doc(json);
  };
  auto ok = make(7);
  ApiIndex idx = compute_items_map(ok, {});
  ASSERT_NE(idx.find("Target"), nullptr);
  EXPECT_EQ(rendered(*idx.find("Target")), (std::vector<std::string>{"c::Target"}));
  EXPECT_THROW(compute_items_map(make(8), {}), UnresolvedReexport);
}

TEST(ApiIndex, NameCollisionsAreQualified) {
  auto root = parse(R"({"name":"c","visibility":"public","reexports":[],"items":[
    {"kind":"module","name":"a","visibility":"public","submodule":{"items":[
      {"kind":"type","name":"Error","visibility":"public"}],"reexports":[]}},
    {"kind":"module","name":"b","visibility":"public","submodule":{"items":[
      {"kind":"type","name":"Error","visibility":"public"}],"reexports":[]}}]})");
  ApiIndex idx = compute_items_map(root, {});
  EXPECT_NE(idx.find("a::Error"), nullptr);
  EXPECT_NE(idx.find("b::Error"), nullptr);
  EXPECT_EQ(idx.find("Error"), nullptr);
}

TEST(ApiIndex, SameMethodNameFromTwoTraits) {
  auto root = parse(R"({"name":"c","visibility":"public","reexports":[],"items":[
    {"kind":"trait","name":"A","visibility":"public"},
    {"kind":"trait","name":"B","visibility":"public"},
    {"kind":"type","name":"T","visibility":"public","impl_blocks":[
      {"trait_name":"A","for_type":"T","methods":[{"name":"run"}]},
      {"trait_name":"B","for_type":"T","methods":[{"name":"run"}]}]}]})");
  ApiIndex idx = compute_items_map(root, {});
  EXPECT_NE(idx.find("<T as A>::run"), nullptr);
  EXPECT_NE(idx.find("<T as B>::run"), nullptr);
  EXPECT_TRUE(has_path(*idx.find("<T as B>::run"), "c::B"));
}

TEST(ApiIndex, PrivateTypeMethodsDroppedWithWarning) {
  auto root = parse(R"({"name":"c","visibility":"public","reexports":[],"items":[
    {"kind":"trait","name":"Tr","visibility":"public"},
    {"kind":"type","name":"Hidden","visibility":"private","impl_blocks":[
      {"trait_name":"Tr","for_type":"Hidden","methods":[{"name":"x"}]}]}]})");
  ExtractionLog log;
  ApiIndex idx = compute_items_map(root, {}, &log);
  EXPECT_EQ(idx.size(), 1u);
  ASSERT_EQ(log.warnings.size(), 1u);
  EXPECT_NE(log.warnings[0].find("Hidden"), std::string::npos);
}

TEST(ApiIndex, ValidityOracleFixtureCases) {
  auto docs = fixtures::load_all_crates();
  CrateTrees trees;
  for (const auto &[name, m] : docs) trees[name] = &m;
  EXPECT_TRUE(is_valid_import_path(Path::parse("ed25519_fixture::SigningKey"), trees));
  EXPECT_FALSE(is_valid_import_path(Path::parse("ed25519_fixture::signing::SigningKey"), trees));
  EXPECT_TRUE(is_valid_import_path(Path::parse("sha2_fixture::Digest"), trees));
  EXPECT_TRUE(is_valid_import_path(Path::parse("ed25519_fixture::constants::secret_key_length"), trees));
  EXPECT_FALSE(is_valid_import_path(Path::parse("ed25519_fixture"), trees));
  EXPECT_FALSE(is_valid_import_path(Path::parse("nope::X"), trees));
  EXPECT_FALSE(is_valid_import_path(Path::parse("ed25519_fixture::SigningKey::to_bytes"), trees));
}

TEST(ApiIndex, CompletenessAgainstExhaustiveWalkOnFixtures) {
  auto docs = fixtures::load_all_crates();
  std::map<std::string, const doc::ModuleDoc *> trees;
  for (const auto &[name, m] : docs) trees[name] = &m;
  fixtures::ReachabilityOracle oracle(trees);
  for (const auto &[name, m] : docs) {
    auto crates = extract_crate(m, docs, fixtures::load_fixture_deps());
    const ApiIndex &idx = crates.at(name);
    auto reach = oracle.enumerate(name, 8);
    for (const auto &[def, paths] : reach) {
      const doc::ItemDoc *item = oracle.item_at(def);
      ASSERT_NE(item, nullptr);
      if (item->kind == doc::ItemKind::module) continue;
      const ApiEntry *e = idx.find_by_def(def);
      ASSERT_NE(e, nullptr) << name << ": " << def;
      auto got = rendered(*e);
      EXPECT_EQ(std::set<std::string>(got.begin(), got.end()), paths) << def;
    }
  }
}

TEST(ApiIndex, NoPlaceholdersSurviveAndTraitKeysResolve) {
  for (const auto &[name, m] : fixtures::load_all_crates()) {
    auto crates = fixtures::index_fixture(name);
    for (const auto &[crate, idx] : crates) {
      for (const auto &e : idx.entries()) {
        EXPECT_FALSE(e.import_paths.empty());
        if (!e.trait_key.empty()) {
          EXPECT_NE(idx.find_by_def(e.trait_key), nullptr) << e.api_id;
        }
      }
    }
  }
}

TEST(ApiIndex, IdempotentCanonicalSerialization) {
  auto a = fixtures::index_fixture("sha2_fixture");
  auto b = fixtures::index_fixture("sha2_fixture");
  EXPECT_EQ(to_json(a.at("sha2_fixture")).dump(), to_json(b.at("sha2_fixture")).dump());
  ApiIndex back = index_from_json(to_json(a.at("sha2_fixture")));
  EXPECT_EQ(back, a.at("sha2_fixture"));
}

TEST(ApiIndex, JsonFormatShape) {
  auto crates = fixtures::index_fixture("sha2_fixture");
  auto j = to_json(crates.at("sha2_fixture"));
  EXPECT_EQ(j.at("format_version"), 1);
  EXPECT_EQ(j.at("crate"), "sha2_fixture");
  std::vector<std::string> ids;
  for (const auto &e : j.at("entries")) {
    ids.push_back(e.at("api_id"));
    EXPECT_TRUE(e.contains("kind"));
    EXPECT_TRUE(e.contains("doc"));
    EXPECT_TRUE(e.at("import_paths").is_array());
  }
  EXPECT_TRUE(std::is_sorted(ids.begin(), ids.end()));
  EXPECT_THROW(index_from_json(nlohmann::json::parse(R"({"format_version":9})")), MalformedInput);
}

TEST(ApiIndexProperty, SyntheticTreesYieldOnlyValidPaths) {
  std::size_t external_entries = 0, trait_methods = 0, total = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    fixtures::SyntheticCrateBuilder dep_builder(seed * 2);
    doc::ModuleDoc dep = dep_builder.build("depc", "d");
    ApiIndex dep_idx = compute_items_map(dep, {});
    fixtures::SyntheticCrateBuilder builder(seed * 2 + 1);
    doc::ModuleDoc root = builder.build(
        "mainc", "x", fixtures::SyntheticCrateBuilder::trait_names(dep_idx),
        fixtures::SyntheticCrateBuilder::importable_targets(dep_idx, dep));
    ASSERT_NO_THROW(doc::validate_module_tree(root)) << seed;
    CratesMap crates{{"depc", dep_idx}};
    ApiIndex idx = compute_items_map(root, crates);
    CrateTrees trees{{"depc", &dep}, {"mainc", &root}};
    for (const auto *ix : {&dep_idx, &idx}) {
      for (const auto &e : ix->entries()) {
        ASSERT_FALSE(e.import_paths.empty());
        for (const auto &p : e.import_paths) {
          EXPECT_TRUE(is_valid_import_path(p, trees)) << "seed " << seed << ": " << e.api_id << " at " << p.str();
        }
      }
    }
    for (const auto &e : idx.entries()) {
      ++total;
      if (e.def_key.rfind("depc::", 0) == 0) ++external_entries;
      if (!e.trait_key.empty() && e.trait_key != e.owner_key) ++trait_methods;
    }
  }
  // The generator must actually exercise the interesting branches.
  EXPECT_GT(total, 1000u);
  EXPECT_GT(external_entries, 100u);
  EXPECT_GT(trait_methods, 50u);
}
