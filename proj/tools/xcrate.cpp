#include <CLI11.hpp>

#include <iostream>
#include <map>

#include "xcrate/api_index.hpp"
#include "xcrate/doc_model.hpp"
#include "xcrate/error.hpp"
#include "xcrate/knowledge_base.hpp"
#include "xcrate/llm_gateway.hpp"
#include "xcrate/pipeline/run.hpp"
#include "xcrate/util/json_file.hpp"

namespace fs = std::filesystem;
using namespace xcrate;

namespace {

struct CrateInputs {
  std::string doc;
  std::vector<std::string> deps;  // name=path
  std::string graph;
};

void add_crate_options(CLI::App *cmd, CrateInputs &in) {
  cmd->add_option("doc", in.doc, "crate documentation JSON")->required()->check(CLI::ExistingFile);
  cmd->add_option("--dep", in.deps, "documentation of a dependency, as name=path");
  cmd->add_option("--deps", in.graph, "dependency graph JSON")->check(CLI::ExistingFile);
}

index::CratesMap load_crates(const CrateInputs &in, std::string &crate) {
  doc::CrateDoc root = doc::parse_crate_doc_file(util::read_file(in.doc));
  crate = root.crate_name;
  std::map<std::string, doc::ModuleDoc> docs{{crate, root.root}};
  for (const auto &d : in.deps) {
    auto eq = d.find('=');
    if (eq == std::string::npos) throw MalformedInput("--dep expects name=path, got " + d);
    docs[d.substr(0, eq)] = doc::parse_crate_doc_file(util::read_file(d.substr(eq + 1))).root;
  }
  doc::DependencyGraph graph = in.graph.empty() ? doc::DependencyGraph{} : doc::parse_dependency_graph(util::read_file(in.graph));
  return index::extract_crate(root.root, docs, graph);
}

std::shared_ptr<llm::LlmGateway> make_gateway(const std::string &replay, const std::string &record) {
  if (!replay.empty() && !record.empty()) throw MalformedInput("--replay and --record are exclusive");
  if (!replay.empty()) return llm::LlmGateway::replay(replay);
  auto provider = llm::provider_from_env();
  if (!provider) throw ProviderError("no model endpoint: set XCRATE_LLM_ENDPOINT or pass --replay");
  if (!record.empty()) return llm::LlmGateway::record(record, std::move(provider));
  return llm::LlmGateway::live(std::move(provider));
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Go to Rust translation with library-aware retrieval and differential validation"};
  app.require_subcommand(1);

  pipeline::RunOptions run_opts;
  std::string project, replay, record, budgets, report_path;
  std::vector<std::string> var_defs;
  CLI::App *run = app.add_subcommand("run", "translate and validate a project");
  run->add_option("project", project, "project directory (holding project.json)")->required()->check(CLI::ExistingDirectory);
  run->add_flag("--no-rag", run_opts.no_rag, "translate without retrieved library context");
  run->add_flag("--no-imports", run_opts.no_imports, "omit import paths from retrieved context");
  run->add_option("--replay", replay, "answer model calls from this log")->check(CLI::ExistingFile);
  run->add_option("--record", record, "append model calls to this log");
  run->add_option("--budgets", budgets, "retry budgets schema,glue,body (default 3,3,5)");
  run->add_option("--workers", run_opts.workers, "parallel function validations")->check(CLI::PositiveNumber);
  run->add_option("--report", report_path, "write the JSON report here");
  run->add_option("--out", run_opts.out_dir, "artifact directory (default <project>/out)");
  run->add_option("--var", var_defs, "NAME=VALUE for sidecar commands");
  run->add_option("--rustc", run_opts.rustc, "rustc executable");
  run->add_option("--protoc", run_opts.protoc, "protoc executable");

  CrateInputs index_in;
  std::string index_out;
  CLI::App *idx = app.add_subcommand("index", "print the API index of a crate");
  add_crate_options(idx, index_in);
  idx->add_option("-o,--output", index_out, "write the index here instead of stdout");

  CrateInputs query_in;
  std::string api, api_doc, retrieval;
  int top_n = kb::kDefaultTopN;
  CLI::App *query = app.add_subcommand("query", "rank crate APIs for a source API");
  add_crate_options(query, query_in);
  query->add_option("--api", api, "source API, e.g. sha512.New")->required();
  query->add_option("--api-doc", api_doc, "its documentation");
  query->add_option("-n", top_n, "results")->check(CLI::PositiveNumber);
  query->add_option("--retrieval", retrieval, "retrieval config JSON")->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      if (!budgets.empty()) run_opts.budget = validation::Budget::parse(budgets);
      for (const auto &v : var_defs) {
        auto eq = v.find('=');
        if (eq == std::string::npos) throw MalformedInput("--var expects NAME=VALUE, got " + v);
        run_opts.vars[v.substr(0, eq)] = v.substr(eq + 1);
      }
      run_opts.gateway = make_gateway(replay, record);
      pipeline::ProjectReport report = pipeline::run_project(project, run_opts);
      std::cout << report.table();
      if (!report_path.empty()) util::write_json_file(report_path, report.to_json());
      return report.failed() ? 1 : 0;
    }
    if (*idx) {
      std::string crate;
      index::CratesMap crates = load_crates(index_in, crate);
      nlohmann::json j = index::to_json(crates.at(crate));
      if (index_out.empty())
        std::cout << j.dump(2) << '\n';
      else
        util::write_json_file(index_out, j);
      return 0;
    }
    if (*query) {
      std::string crate;
      index::CratesMap crates = load_crates(query_in, crate);
      kb::RetrievalConfig config =
          retrieval.empty() ? kb::RetrievalConfig{} : kb::RetrievalConfig::from_json(util::read_json_file(retrieval));
      kb::KnowledgeBase base = kb::build_kb(crates.at(crate), config, {nullptr, crate});
      kb::ApiQuery q{api, api_doc, std::nullopt};
      for (const auto &r : base.query(q, top_n).results) {
        std::cout << r.score << '\t' << r.entry.api_id;
        for (const auto &p : r.entry.import_paths) std::cout << '\t' << p.str();
        std::cout << '\n';
      }
      return 0;
    }
  } catch (const std::exception &e) {
    std::cerr << "xcrate: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
