#pragma once

// Schema-driven proto3 wire codec over a dynamic value representation.
// Encoding is canonical: fields in number order, implicit-presence defaults
// omitted, numeric sequences packed. decode accepts unpacked sequences and
// skips unknown fields.

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "xcrate/carrier/schema.hpp"

namespace xcrate::carrier {

struct CarrierValue;
using MessagePtr = std::shared_ptr<const CarrierValue>;

/// int32/int64 values are held as int64_t, uint32/uint64 as uint64_t and
/// float/double as double; string and bytes share std::string.
using Element = std::variant<bool, std::int64_t, std::uint64_t, double, std::string, MessagePtr>;

struct CarrierValue {
  std::string message;
  /// Field number to elements; singular fields hold at most one.
  std::map<int, std::vector<Element>> fields;

  void set(int number, Element e) { fields[number] = {std::move(e)}; }
  void add(int number, Element e) { fields[number].push_back(std::move(e)); }
  const Element *get(int number) const;
};

inline constexpr double kDefaultRelTolerance = 1e-9;

struct RandomOptions {
  int max_repeated = 4;
  int max_bytes = 24;
  double absent_probability = 0.25;  // optional scalars and message fields
};

class Codec {
 public:
  explicit Codec(SchemaRegistry registry) : registry_(std::move(registry)) {}

  const SchemaRegistry &registry() const { return registry_; }

  /// Throws MalformedInput when the value does not fit the schema.
  std::string encode(const CarrierValue &value) const;
  /// Throws MalformedInput on malformed wire data or a wire-type mismatch.
  CarrierValue decode(std::string_view message, std::string_view bytes) const;

  /// Deep structural equality. Absent implicit-presence scalars equal their
  /// default; doubles compare with relative tolerance `rel_tol`.
  bool equal(const CarrierValue &a, const CarrierValue &b, double rel_tol = kDefaultRelTolerance) const;

  CarrierValue random_value(std::string_view message, std::mt19937_64 &rng,
                            const RandomOptions &options = {}) const;

  /// Readable JSON form keyed by field name; bytes are hex strings.
  nlohmann::json to_json(const CarrierValue &value) const;
  CarrierValue from_json(std::string_view message, const nlohmann::json &j) const;

  /// First differing field path between a and b, empty if equal.
  std::string first_difference(const CarrierValue &a, const CarrierValue &b,
                               double rel_tol = kDefaultRelTolerance) const;

 private:
  void encode_into(const CarrierValue &value, std::string &out) const;
  CarrierValue decode_message(const CarrierSchema &schema, std::string_view bytes, int depth) const;
  std::string diff(const CarrierValue &a, const CarrierValue &b, double rel_tol, const std::string &path) const;

  SchemaRegistry registry_;
};

bool doubles_equal(double a, double b, double rel_tol);

}  // namespace xcrate::carrier
