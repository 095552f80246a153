#pragma once

// The round-trip, I/O-equivalence and agreement checks. Every check drives
// harness processes only; the values themselves never leave frame form
// except for the final carrier-level comparison.
//
// Source harness modes: `roundtrip T`, `forward T`, `compare T` (frames
// alternate source value and carrier value), `execute` (source inputs to
// carrier outputs) and `run` (source inputs to source outputs).
// Target harness modes: `roundtrip T` and `execute` (carrier to carrier).

#include <optional>
#include <string>
#include <vector>

#include "xcrate/carrier/codec.hpp"
#include "xcrate/validation/harness.hpp"

namespace xcrate::validation {

struct CheckResult {
  bool passed = false;
  std::optional<std::size_t> counterexample;  // index into the checked values
  std::string counterexample_value;           // the failing input frame
  std::string detail;
  std::vector<std::string> frames;  // carrier images, when the check produces them

  explicit operator bool() const { return passed; }
};

/// Go-side round trip: backward(forward(v)) = v for every v. On success the
/// frames are the carrier images forward(v).
CheckResult check_go_roundtrip(const HarnessCommand &source, const std::string &type, const ObservedValues &values);

/// Full round trip through the target side: v -> carrier -> target value ->
/// carrier -> v.
CheckResult check_full_roundtrip(const HarnessCommand &source, const HarnessCommand &target,
                                 const std::string &type, const ObservedValues &values);

struct FunctionHarnesses {
  HarnessCommand source;
  HarnessCommand target;
  std::string input_type;   // source tuple type names
  std::string output_type;
};

/// forward_O(o) = g(forward_I(i)) for every observed pair, compared on
/// carrier-decoded values of the output message. Two outputs that both set
/// the `failed` flag are equal whatever their other fields.
CheckResult check_io_equivalence(const FunctionHarnesses &harnesses, const carrier::Codec &codec,
                                 const ObservedValues &inputs, const ObservedValues &outputs,
                                 double rel_tol = carrier::kDefaultRelTolerance);

/// o = backward_O(g(forward_I(i))), compared on the source side.
CheckResult check_go_level_agreement(const FunctionHarnesses &harnesses, const ObservedValues &inputs,
                                     const ObservedValues &outputs);

/// Runs the source function twice on every input; passes when both runs
/// produce identical outputs.
CheckResult check_determinism(const HarnessCommand &source, const ObservedValues &inputs);

}  // namespace xcrate::validation
