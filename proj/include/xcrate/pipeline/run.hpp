#pragma once

// End-to-end driver: crate mapping, knowledge bases, translation in
// dependency order, compile checks, validation and the summary report.

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "xcrate/llm_gateway.hpp"
#include "xcrate/pipeline/project.hpp"
#include "xcrate/pipeline/translate.hpp"
#include "xcrate/validation/interop.hpp"
#include "xcrate/validation/report.hpp"

namespace xcrate::pipeline {

struct RunOptions {
  bool no_rag = false;
  bool no_imports = false;
  validation::Budget budget;
  int workers = 1;
  std::filesystem::path out_dir;  // artifacts; a fresh directory is recommended
  validation::Variables vars;     // extra `${NAME}` values for sidecar commands
  std::shared_ptr<llm::LlmGateway> gateway;
  std::string rustc = "rustc";
  std::string protoc = "protoc";
};

struct UnitOutcome {
  std::string item_id;
  UnitKind kind = UnitKind::function;
  bool translated = false;
  bool compiled = false;
  std::string translation;
  std::vector<std::string> apis;  // source APIs the unit uses
  std::vector<std::string> invalid_imports;
  std::vector<std::string> errors;
};

struct ProjectReport {
  std::string project;
  std::size_t rag_load = 0;  // entries across the knowledge bases of the mapped crates
  std::map<std::string, std::string> mapping;
  validation::ValidationReport validation;
  std::vector<UnitOutcome> units;
  std::vector<std::string> skipped;       // fragments outside the supported subset
  std::vector<std::string> hard_errors;   // failures that are not translation outcomes
  bool no_rag = false;
  bool no_imports = false;

  validation::Rates rates() const { return validation.rates(); }
  bool failed() const { return !hard_errors.empty(); }
  nlohmann::json to_json() const;
  /// One row with the rate columns, then one line per function.
  std::string table() const;
};

/// Runs the whole pipeline on `project_dir`. Per-unit failures are recorded
/// in the report; configuration problems throw (MalformedInput, MissingKb,
/// CompilerUnavailable).
ProjectReport run_project(const std::filesystem::path &project_dir, const RunOptions &options);

}  // namespace xcrate::pipeline
