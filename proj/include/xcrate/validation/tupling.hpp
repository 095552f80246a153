#pragma once

// Functions are validated as maps between two synthetic tuple types: the
// input tuple holds the receiver (if any) and the parameters, the output
// tuple the results plus a `failed` flag when the function can return an
// error.

#include <string>

#include "xcrate/carrier/go_types.hpp"
#include "xcrate/validation/toolchain.hpp"

namespace xcrate::validation {

inline constexpr const char *kFailedField = "failed";

/// `Clamp`, or `IdentityDescribe` for a method.
std::string tuple_base_name(const carrier::GoFunction &fn);

struct GoTuples {
  carrier::GoTypeDef input;
  carrier::GoTypeDef output;
};

GoTuples tuple_go_function(const carrier::GoFunction &fn);

struct TargetTuples {
  std::string input_def;
  std::string output_def;
  TargetCall call;
};

/// Target tuple structs and the call plan for `sig`, the translation of
/// `fn`. Throws SignatureMismatch when arity, receiver or error handling
/// disagree.
TargetTuples tuple_rust_function(const carrier::GoFunction &fn, const RustFnSig &sig);

}  // namespace xcrate::validation
