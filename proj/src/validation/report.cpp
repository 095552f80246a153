#include "xcrate/validation/report.hpp"

#include "xcrate/error.hpp"

namespace xcrate::validation {

std::string_view to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::skipped: return "skipped";
  }
  return "skipped";
}

CheckStatus check_status_from_string(std::string_view s) {
  if (s == "pass") return CheckStatus::pass;
  if (s == "fail") return CheckStatus::fail;
  if (s == "skipped") return CheckStatus::skipped;
  throw MalformedInput("unknown check status `" + std::string(s) + "`");
}

bool FunctionReport::phase_ordered() const {
  if (!compiled && (go_roundtrip == CheckStatus::pass || full_roundtrip == CheckStatus::pass ||
                    io_equiv == CheckStatus::pass))
    return false;
  if (io_equiv == CheckStatus::pass && full_roundtrip != CheckStatus::pass) return false;
  if (full_roundtrip == CheckStatus::pass && go_roundtrip != CheckStatus::pass) return false;
  return true;
}

Rates ValidationReport::rates() const {
  Rates r;
  std::size_t comp = 0, comp_dep = 0, eq = 0, eq_dep = 0;
  for (const auto &f : functions) {
    ++r.n_full;
    bool passed = f.io_equiv == CheckStatus::pass;
    comp += f.compiled;
    eq += passed;
    if (f.uses_external_apis) {
      ++r.n_dep;
      comp_dep += f.compiled;
      eq_dep += passed;
    }
  }
  auto pct = [](std::size_t k, std::size_t n) -> std::optional<double> {
    if (n == 0) return std::nullopt;
    return 100.0 * static_cast<double>(k) / static_cast<double>(n);
  };
  r.comp_full = pct(comp, r.n_full);
  r.comp_dep = pct(comp_dep, r.n_dep);
  r.equiv_full = pct(eq, r.n_full);
  r.equiv_dep = pct(eq_dep, r.n_dep);
  return r;
}

namespace {

nlohmann::json rate(const std::optional<double> &v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json ValidationReport::to_json() const {
  nlohmann::json fns = nlohmann::json::array();
  for (const auto &f : functions) {
    nlohmann::json j = {{"function_id", f.function_id},
                        {"uses_external_apis", f.uses_external_apis},
                        {"compiled", f.compiled},
                        {"go_roundtrip", to_string(f.go_roundtrip)},
                        {"full_roundtrip", to_string(f.full_roundtrip)},
                        {"io_equiv", to_string(f.io_equiv)},
                        {"note", f.note},
                        {"attempts",
                         {{"schema", f.attempts.schema},
                          {"source_glue", f.attempts.source_glue},
                          {"target_glue", f.attempts.target_glue},
                          {"body", f.body_attempts}}},
                        {"diagnostics", f.diagnostics}};
    j["counterexample"] = f.counterexample ? nlohmann::json(*f.counterexample) : nlohmann::json(nullptr);
    fns.push_back(std::move(j));
  }
  Rates r = rates();
  return {{"functions", fns},
          {"rates",
           {{"n_full", r.n_full},
            {"n_dep", r.n_dep},
            {"comp_full", rate(r.comp_full)},
            {"comp_dep", rate(r.comp_dep)},
            {"equiv_full", rate(r.equiv_full)},
            {"equiv_dep", rate(r.equiv_dep)}}}};
}

ValidationReport ValidationReport::from_json(const nlohmann::json &j) {
  ValidationReport rep;
  try {
    for (const auto &f : j.at("functions")) {
      FunctionReport r;
      r.function_id = f.at("function_id").get<std::string>();
      r.uses_external_apis = f.value("uses_external_apis", false);
      r.compiled = f.value("compiled", false);
      r.go_roundtrip = check_status_from_string(f.value("go_roundtrip", "skipped"));
      r.full_roundtrip = check_status_from_string(f.value("full_roundtrip", "skipped"));
      r.io_equiv = check_status_from_string(f.value("io_equiv", "skipped"));
      r.note = f.value("note", "");
      if (f.contains("attempts")) {
        const auto &a = f["attempts"];
        r.attempts.schema = a.value("schema", 0);
        r.attempts.source_glue = a.value("source_glue", 0);
        r.attempts.target_glue = a.value("target_glue", 0);
        r.body_attempts = a.value("body", 0);
      }
      if (f.contains("counterexample") && !f["counterexample"].is_null())
        r.counterexample = f["counterexample"].get<std::size_t>();
      r.diagnostics = f.value("diagnostics", std::vector<std::string>{});
      rep.functions.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception &e) {
    throw MalformedInput(std::string("validation report: ") + e.what());
  }
  return rep;
}

}  // namespace xcrate::validation
