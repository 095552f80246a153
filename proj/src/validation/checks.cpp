#include "xcrate/validation/checks.hpp"

#include "xcrate/error.hpp"
#include "xcrate/validation/tupling.hpp"

namespace xcrate::validation {

namespace {

CheckResult violation(const HarnessOutcome &o, const std::vector<std::string> &inputs, const std::string &what) {
  CheckResult r;
  r.counterexample = o.counterexample;
  if (o.counterexample && *o.counterexample < inputs.size()) r.counterexample_value = inputs[*o.counterexample];
  r.detail = what + ": " + o.diagnostics;
  return r;
}

void expect_count(const HarnessOutcome &o, std::size_t n, const std::string &what) {
  if (o.frames.size() != n)
    throw HarnessError(what + " returned " + std::to_string(o.frames.size()) + " frames for " + std::to_string(n) +
                       " inputs");
}

// Carrier images of `values` under the source forward adapter of `type`.
std::optional<CheckResult> forward(const HarnessCommand &source, const std::string &type,
                                   const std::vector<std::string> &values, std::vector<std::string> &images) {
  HarnessOutcome o = run_harness(source, {"forward", type}, values);
  if (o.violated) return violation(o, values, "forward adapter of " + type + " failed");
  expect_count(o, values.size(), "source forward " + type);
  images = std::move(o.frames);
  return std::nullopt;
}

std::vector<std::string> interleave(const std::vector<std::string> &a, const std::vector<std::string> &b) {
  std::vector<std::string> out;
  out.reserve(a.size() * 2);
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.push_back(a[i]);
    out.push_back(b[i]);
  }
  return out;
}

bool failed_flag(const carrier::CarrierSchema &schema, const carrier::CarrierValue &v) {
  const carrier::CarrierField *f = schema.field_named(kFailedField);
  if (!f || f->type.kind != carrier::ScalarKind::bool_) return false;
  const carrier::Element *e = v.get(f->number);
  return e && std::get<bool>(*e);
}

}  // namespace

CheckResult check_go_roundtrip(const HarnessCommand &source, const std::string &type, const ObservedValues &values) {
  HarnessOutcome o = run_harness(source, {"roundtrip", type}, values.values);
  if (o.violated) return violation(o, values.values, "source round trip of " + type);
  expect_count(o, values.values.size(), "source roundtrip " + type);
  CheckResult r;
  r.passed = true;
  r.frames = std::move(o.frames);
  return r;
}

CheckResult check_full_roundtrip(const HarnessCommand &source, const HarnessCommand &target, const std::string &type,
                                 const ObservedValues &values) {
  std::vector<std::string> images;
  if (auto fail = forward(source, type, values.values, images)) return *fail;
  HarnessOutcome t = run_harness(target, {"roundtrip", type}, images);
  if (t.violated) return violation(t, values.values, "target round trip of " + type);
  expect_count(t, images.size(), "target roundtrip " + type);
  HarnessOutcome c = run_harness(source, {"compare", type}, interleave(values.values, t.frames));
  if (c.violated) return violation(c, values.values, "value changed through the target side");
  CheckResult r;
  r.passed = true;
  r.frames = std::move(t.frames);
  return r;
}

CheckResult check_io_equivalence(const FunctionHarnesses &h, const carrier::Codec &codec, const ObservedValues &inputs,
                                 const ObservedValues &outputs, double rel_tol) {
  if (inputs.values.size() != outputs.values.size())
    throw MalformedInput("observed inputs and outputs differ in length");
  auto message = codec.registry().message_for(h.output_type);
  if (!message) throw UnboundDependency("output type " + h.output_type + " has no carrier schema");
  const carrier::CarrierSchema &schema = codec.registry().at(*message);

  std::vector<std::string> in_images, out_images;
  if (auto fail = forward(h.source, h.input_type, inputs.values, in_images)) return *fail;
  if (auto fail = forward(h.source, h.output_type, outputs.values, out_images)) return *fail;
  HarnessOutcome g = run_harness(h.target, {"execute"}, in_images);
  if (g.violated) return violation(g, inputs.values, "translated function failed");
  expect_count(g, in_images.size(), "target execute");

  for (std::size_t i = 0; i < out_images.size(); ++i) {
    carrier::CarrierValue want = codec.decode(*message, out_images[i]);
    carrier::CarrierValue got;
    try {
      got = codec.decode(*message, g.frames[i]);
    } catch (const MalformedInput &e) {
      CheckResult r;
      r.counterexample = i;
      r.counterexample_value = inputs.values[i];
      r.detail = std::string("undecodable target output: ") + e.what();
      return r;
    }
    bool both_failed = failed_flag(schema, want) && failed_flag(schema, got);
    if (!both_failed && !codec.equal(want, got, rel_tol)) {
      CheckResult r;
      r.counterexample = i;
      r.counterexample_value = inputs.values[i];
      r.detail = "outputs differ at " + codec.first_difference(want, got, rel_tol) + ": expected " +
                 codec.to_json(want).dump() + ", got " + codec.to_json(got).dump();
      return r;
    }
  }
  CheckResult r;
  r.passed = true;
  r.frames = std::move(g.frames);
  return r;
}

CheckResult check_go_level_agreement(const FunctionHarnesses &h, const ObservedValues &inputs,
                                     const ObservedValues &outputs) {
  if (inputs.values.size() != outputs.values.size())
    throw MalformedInput("observed inputs and outputs differ in length");
  std::vector<std::string> in_images;
  if (auto fail = forward(h.source, h.input_type, inputs.values, in_images)) return *fail;
  HarnessOutcome g = run_harness(h.target, {"execute"}, in_images);
  if (g.violated) return violation(g, inputs.values, "translated function failed");
  expect_count(g, in_images.size(), "target execute");
  HarnessOutcome c = run_harness(h.source, {"compare", h.output_type}, interleave(outputs.values, g.frames));
  if (c.violated) return violation(c, inputs.values, "source-level outputs differ");
  CheckResult r;
  r.passed = true;
  return r;
}

CheckResult check_determinism(const HarnessCommand &source, const ObservedValues &inputs) {
  HarnessOutcome a = run_harness(source, {"run"}, inputs.values);
  HarnessOutcome b = run_harness(source, {"run"}, inputs.values);
  if (a.violated) return violation(a, inputs.values, "source function failed");
  if (b.violated) return violation(b, inputs.values, "source function failed");
  expect_count(a, inputs.values.size(), "source run");
  expect_count(b, inputs.values.size(), "source run");
  for (std::size_t i = 0; i < a.frames.size(); ++i) {
    if (a.frames[i] != b.frames[i]) {
      CheckResult r;
      r.counterexample = i;
      r.counterexample_value = inputs.values[i];
      r.detail = "two runs disagree: " + a.frames[i] + " versus " + b.frames[i];
      return r;
    }
  }
  CheckResult r;
  r.passed = true;
  r.frames = std::move(a.frames);
  return r;
}

}  // namespace xcrate::validation
