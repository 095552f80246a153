#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "xcrate/carrier/go_types.hpp"
#include "xcrate/llm_gateway.hpp"

namespace xcrate::carrier {

enum class ScalarKind { double_, float_, int32, int64, uint32, uint64, bool_, string, bytes, message };

std::string_view to_string(ScalarKind k);
std::optional<ScalarKind> scalar_kind_from_string(std::string_view s);

struct ProtoType {
  ScalarKind kind = ScalarKind::bytes;
  std::string message;  // kind == message only
  bool repeated = false;

  bool is_message() const { return kind == ScalarKind::message; }
  /// Numeric kinds are packed when repeated.
  bool is_packable() const;
  std::string str() const;

  friend bool operator==(const ProtoType &, const ProtoType &) = default;
};

struct CarrierField {
  std::string name;  // snake_case
  ProtoType type;
  int number = 0;
  bool optional = false;
  std::string source_name;  // Go field name
  std::string source_type;  // Go type expression

  friend bool operator==(const CarrierField &, const CarrierField &) = default;
};

struct CarrierSchema {
  std::string message_name;
  std::vector<CarrierField> fields;
  std::set<std::string> depends_on;
  std::string source_type;

  const CarrierField *field(int number) const;
  const CarrierField *field_named(std::string_view name) const;

  friend bool operator==(const CarrierSchema &, const CarrierSchema &) = default;
};

/// Per-project map of carrier messages, also tracking which source type each
/// message was synthesized from.
class SchemaRegistry {
 public:
  /// Registers `schema` for its source type, replacing any earlier schema for
  /// that type. Throws SchemaRejected when the message name is already bound
  /// to another source type, and UnboundDependency on dangling references.
  void bind(const CarrierSchema &schema);
  void unbind(const std::string &source_type);

  const CarrierSchema *find(std::string_view message_name) const;
  const CarrierSchema &at(std::string_view message_name) const;
  std::optional<std::string> message_for(std::string_view source_type) const;
  bool contains_source(std::string_view source_type) const;

  const std::map<std::string, CarrierSchema, std::less<>> &schemas() const { return schemas_; }
  const std::map<std::string, std::string, std::less<>> &bindings() const { return binding_; }
  bool empty() const { return schemas_.empty(); }

  /// Topological on depends_on, ties broken lexicographically.
  std::vector<std::string> ordered_messages() const;

  /// Transitive depends_on closure of `messages`, including themselves.
  SchemaRegistry closure(const std::vector<std::string> &messages) const;

  /// Carrier type name used by generated code on both sides, `Proto<SourceType>`.
  std::string carrier_type_name(std::string_view message_name) const;

  nlohmann::json to_json() const;
  static SchemaRegistry from_json(const nlohmann::json &j);

  friend bool operator==(const SchemaRegistry &, const SchemaRegistry &) = default;

 private:
  std::map<std::string, CarrierSchema, std::less<>> schemas_;
  std::map<std::string, std::string, std::less<>> binding_;  // source type -> message
};

/// Identifier segmentation used for all name conversions: splits on `_`,
/// lower-to-upper transitions and the end of an acronym (`RSAIdentity` gives
/// `RSA`, `Identity`).
std::vector<std::string> split_identifier(std::string_view ident);
std::string snake_case(std::string_view ident);
/// `RSAIdentity` → `RsaIdentity`.
std::string message_name_for(std::string_view go_type_name);
/// `ssh_key` → `SshKey`.
std::string pascal_from_snake(std::string_view snake);

struct SynthesisOptions {
  int attempt = 1;
  std::string feedback;  // previous failure, included in the prompt on retries
};

/// Encoding decision for one field: deterministic for builtin and
/// user-defined types, gateway-assisted for library types.
enum class FieldClass { scalar, user, library, rejected };

/// The prompt sent for library-typed fields; empty if there are none.
std::string schema_prompt(const GoTypeDef &src_type, const SchemaRegistry &registry,
                          const SynthesisOptions &options = {});

/// Builds the carrier schema for `src_type`. Library fields default to bytes;
/// when a gateway is given it may pick a scalar kind or a registered message
/// instead. Throws UnboundDependency when a user-defined field type is not in
/// the registry and SchemaRejected for function, channel or map fields or an
/// invalid gateway answer.
CarrierSchema synthesize_schema(const GoTypeDef &src_type, const SchemaRegistry &registry,
                                llm::LlmGateway *gateway, const SynthesisOptions &options = {});

inline constexpr std::string_view kCarrierPackage = "xcrate.carrier";

/// proto3 text for every message, in ordered_messages() order.
std::string render_schema(const SchemaRegistry &registry,
                          std::string_view package = kCarrierPackage);

nlohmann::json to_json(const CarrierSchema &schema);
CarrierSchema schema_from_json(const nlohmann::json &j);

}  // namespace xcrate::carrier
