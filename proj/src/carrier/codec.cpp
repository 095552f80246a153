#include "xcrate/carrier/codec.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

#include "xcrate/error.hpp"
#include "xcrate/util/text.hpp"

namespace xcrate::carrier {

namespace {

enum WireType : std::uint32_t { kVarint = 0, kFixed64 = 1, kLen = 2, kFixed32 = 5 };

constexpr int kMaxDepth = 64;

void put_varint(std::string &out, std::uint64_t v) {
  while (v >= 0x80) {
    out.push_back(static_cast<char>((v & 0x7f) | 0x80));
    v >>= 7;
  }
  out.push_back(static_cast<char>(v));
}

void put_fixed(std::string &out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_tag(std::string &out, int number, WireType wt) {
  put_varint(out, (static_cast<std::uint64_t>(number) << 3) | wt);
}

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}
  bool done() const { return pos_ >= data_.size(); }

  std::uint64_t varint() {
    std::uint64_t v = 0;
    for (int shift = 0; shift < 64; shift += 7) {
      if (pos_ >= data_.size()) throw MalformedInput("truncated varint");
      auto b = static_cast<unsigned char>(data_[pos_++]);
      v |= static_cast<std::uint64_t>(b & 0x7f) << shift;
      if (!(b & 0x80)) return v;
    }
    throw MalformedInput("varint longer than 10 bytes");
  }

  std::uint64_t fixed(int bytes) {
    if (data_.size() - pos_ < static_cast<std::size_t>(bytes)) throw MalformedInput("truncated fixed-width value");
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_++])) << (8 * i);
    return v;
  }

  std::string_view bytes() {
    std::uint64_t n = varint();
    if (n > data_.size() - pos_) throw MalformedInput("length-delimited field overruns the buffer");
    std::string_view s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  void skip(std::uint32_t wt) {
    switch (wt) {
      case kVarint: varint(); break;
      case kFixed64: fixed(8); break;
      case kLen: bytes(); break;
      case kFixed32: fixed(4); break;
      default: throw MalformedInput("unsupported wire type " + std::to_string(wt));
    }
  }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

WireType wire_type_of(ScalarKind k) {
  switch (k) {
    case ScalarKind::double_: return kFixed64;
    case ScalarKind::float_: return kFixed32;
    case ScalarKind::string:
    case ScalarKind::bytes:
    case ScalarKind::message: return kLen;
    default: return kVarint;
  }
}

[[noreturn]] void mismatch(const CarrierField &f, const char *want) {
  throw MalformedInput("field " + f.name + " expects " + want);
}

// Payload of one scalar element, without the tag.
void put_scalar(std::string &out, const CarrierField &f, const Element &e) {
  switch (f.type.kind) {
    case ScalarKind::bool_:
      if (!std::holds_alternative<bool>(e)) mismatch(f, "bool");
      put_varint(out, std::get<bool>(e) ? 1 : 0);
      break;
    case ScalarKind::int32:
    case ScalarKind::int64:
      if (!std::holds_alternative<std::int64_t>(e)) mismatch(f, "a signed integer");
      put_varint(out, static_cast<std::uint64_t>(std::get<std::int64_t>(e)));
      break;
    case ScalarKind::uint32:
    case ScalarKind::uint64:
      if (!std::holds_alternative<std::uint64_t>(e)) mismatch(f, "an unsigned integer");
      put_varint(out, std::get<std::uint64_t>(e));
      break;
    case ScalarKind::double_:
      if (!std::holds_alternative<double>(e)) mismatch(f, "a double");
      put_fixed(out, std::bit_cast<std::uint64_t>(std::get<double>(e)), 8);
      break;
    case ScalarKind::float_:
      if (!std::holds_alternative<double>(e)) mismatch(f, "a float");
      put_fixed(out, std::bit_cast<std::uint32_t>(static_cast<float>(std::get<double>(e))), 4);
      break;
    case ScalarKind::string:
    case ScalarKind::bytes:
      if (!std::holds_alternative<std::string>(e)) mismatch(f, "a string");
      put_varint(out, std::get<std::string>(e).size());
      out += std::get<std::string>(e);
      break;
    case ScalarKind::message:
      break;
  }
}

Element read_scalar(Reader &r, const CarrierField &f) {
  switch (f.type.kind) {
    case ScalarKind::bool_: return r.varint() != 0;
    case ScalarKind::int32: return static_cast<std::int64_t>(static_cast<std::int32_t>(r.varint()));
    case ScalarKind::int64: return static_cast<std::int64_t>(r.varint());
    case ScalarKind::uint32: return static_cast<std::uint64_t>(static_cast<std::uint32_t>(r.varint()));
    case ScalarKind::uint64: return r.varint();
    case ScalarKind::double_: return std::bit_cast<double>(r.fixed(8));
    case ScalarKind::float_: return static_cast<double>(std::bit_cast<float>(static_cast<std::uint32_t>(r.fixed(4))));
    case ScalarKind::string:
    case ScalarKind::bytes: return std::string(r.bytes());
    case ScalarKind::message: break;
  }
  throw MalformedInput("unexpected message field");
}

bool is_default(const CarrierField &f, const Element &e) {
  switch (f.type.kind) {
    case ScalarKind::bool_: return !std::get<bool>(e);
    case ScalarKind::int32:
    case ScalarKind::int64: return std::get<std::int64_t>(e) == 0;
    case ScalarKind::uint32:
    case ScalarKind::uint64: return std::get<std::uint64_t>(e) == 0;
    case ScalarKind::double_: return std::bit_cast<std::uint64_t>(std::get<double>(e)) == 0;
    case ScalarKind::float_: return std::bit_cast<std::uint32_t>(static_cast<float>(std::get<double>(e))) == 0;
    case ScalarKind::string:
    case ScalarKind::bytes: return std::get<std::string>(e).empty();
    case ScalarKind::message: return false;
  }
  return false;
}

Element default_element(const CarrierField &f) {
  switch (f.type.kind) {
    case ScalarKind::bool_: return false;
    case ScalarKind::int32:
    case ScalarKind::int64: return std::int64_t{0};
    case ScalarKind::uint32:
    case ScalarKind::uint64: return std::uint64_t{0};
    case ScalarKind::double_:
    case ScalarKind::float_: return 0.0;
    default: return std::string();
  }
}

void check_range(const CarrierField &f, const Element &e) {
  if (f.type.kind == ScalarKind::int32 && std::holds_alternative<std::int64_t>(e)) {
    auto v = std::get<std::int64_t>(e);
    if (v < std::numeric_limits<std::int32_t>::min() || v > std::numeric_limits<std::int32_t>::max())
      throw MalformedInput("field " + f.name + ": value out of int32 range");
  }
  if (f.type.kind == ScalarKind::uint32 && std::holds_alternative<std::uint64_t>(e) &&
      std::get<std::uint64_t>(e) > std::numeric_limits<std::uint32_t>::max())
    throw MalformedInput("field " + f.name + ": value out of uint32 range");
}

std::string element_repr(const Element &e) {
  return std::visit(
      [](const auto &v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
        else if constexpr (std::is_same_v<T, std::string>) return "0x" + util::to_hex(v);
        else if constexpr (std::is_same_v<T, MessagePtr>) return "<message>";
        else return std::to_string(v);
      },
      e);
}

}  // namespace

bool doubles_equal(double a, double b, double rel_tol) {
  if (a == b) return true;
  if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
  return std::fabs(a - b) <= rel_tol * std::max(std::fabs(a), std::fabs(b));
}

const Element *CarrierValue::get(int number) const {
  auto it = fields.find(number);
  if (it == fields.end() || it->second.empty()) return nullptr;
  return &it->second.front();
}

std::string Codec::encode(const CarrierValue &value) const {
  std::string out;
  encode_into(value, out);
  return out;
}

void Codec::encode_into(const CarrierValue &value, std::string &out) const {
  const CarrierSchema &schema = registry_.at(value.message);
  for (const auto &[number, elems] : value.fields)
    if (!schema.field(number)) throw MalformedInput(value.message + ": no field numbered " + std::to_string(number));

  for (const auto &f : schema.fields) {
    auto it = value.fields.find(f.number);
    if (it == value.fields.end() || it->second.empty()) continue;
    const auto &elems = it->second;
    if (!f.type.repeated && elems.size() > 1) throw MalformedInput(value.message + "." + f.name + ": singular field with several values");

    if (f.type.is_message()) {
      for (const auto &e : elems) {
        if (!std::holds_alternative<MessagePtr>(e) || !std::get<MessagePtr>(e)) mismatch(f, "a message");
        const CarrierValue &sub = *std::get<MessagePtr>(e);
        if (sub.message != f.type.message) throw MalformedInput(f.name + ": expected message " + f.type.message);
        std::string body;
        encode_into(sub, body);
        put_tag(out, f.number, kLen);
        put_varint(out, body.size());
        out += body;
      }
      continue;
    }
    for (const auto &e : elems) check_range(f, e);
    if (f.type.repeated && f.type.is_packable()) {
      std::string body;
      for (const auto &e : elems) put_scalar(body, f, e);
      put_tag(out, f.number, kLen);
      put_varint(out, body.size());
      out += body;
      continue;
    }
    for (const auto &e : elems) {
      // Validate the alternative before the default check reads it.
      std::string payload;
      put_scalar(payload, f, e);
      if (!f.type.repeated && !f.optional && is_default(f, e)) continue;
      put_tag(out, f.number, wire_type_of(f.type.kind));
      out += payload;
    }
  }
}

CarrierValue Codec::decode(std::string_view message, std::string_view bytes) const {
  return decode_message(registry_.at(message), bytes, 0);
}

CarrierValue Codec::decode_message(const CarrierSchema &schema, std::string_view bytes, int depth) const {
  if (depth > kMaxDepth) throw MalformedInput("message nesting too deep");
  CarrierValue v;
  v.message = schema.message_name;
  Reader r(bytes);
  while (!r.done()) {
    std::uint64_t tag = r.varint();
    auto number = static_cast<int>(tag >> 3);
    auto wt = static_cast<std::uint32_t>(tag & 7);
    if (number <= 0) throw MalformedInput("invalid field number 0");
    const CarrierField *f = schema.field(number);
    if (!f) {
      r.skip(wt);
      continue;
    }
    auto &slot = v.fields[number];
    if (f->type.is_message()) {
      if (wt != kLen) throw MalformedInput(f->name + ": wrong wire type for message");
      auto sub = std::make_shared<CarrierValue>(decode_message(registry_.at(f->type.message), r.bytes(), depth + 1));
      if (f->type.repeated) {
        slot.push_back(MessagePtr(std::move(sub)));
      } else {
        slot = {MessagePtr(std::move(sub))};
      }
      continue;
    }
    WireType expected = wire_type_of(f->type.kind);
    if (f->type.repeated && f->type.is_packable() && wt == kLen) {
      Reader packed(r.bytes());
      while (!packed.done()) slot.push_back(read_scalar(packed, *f));
      continue;
    }
    if (wt != expected) throw MalformedInput(f->name + ": wrong wire type " + std::to_string(wt));
    Element e = read_scalar(r, *f);
    if (f->type.repeated) {
      slot.push_back(std::move(e));
    } else {
      slot = {std::move(e)};
    }
  }
  for (auto it = v.fields.begin(); it != v.fields.end();) {
    if (it->second.empty()) {
      it = v.fields.erase(it);
    } else {
      ++it;
    }
  }
  return v;
}

bool Codec::equal(const CarrierValue &a, const CarrierValue &b, double rel_tol) const {
  return diff(a, b, rel_tol, a.message).empty();
}

std::string Codec::first_difference(const CarrierValue &a, const CarrierValue &b, double rel_tol) const {
  return diff(a, b, rel_tol, a.message);
}

std::string Codec::diff(const CarrierValue &a, const CarrierValue &b, double rel_tol, const std::string &path) const {
  if (a.message != b.message) return path + ": message " + a.message + " vs " + b.message;
  const CarrierSchema &schema = registry_.at(a.message);
  static const std::vector<Element> kNone;
  for (const auto &f : schema.fields) {
    auto ia = a.fields.find(f.number);
    auto ib = b.fields.find(f.number);
    const auto &ea = ia == a.fields.end() ? kNone : ia->second;
    const auto &eb = ib == b.fields.end() ? kNone : ib->second;
    std::string here = path + "." + f.name;

    if (!f.type.repeated && !f.optional && !f.type.is_message()) {
      Element da = ea.empty() ? default_element(f) : ea.front();
      Element db = eb.empty() ? default_element(f) : eb.front();
      if (f.type.kind == ScalarKind::double_ || f.type.kind == ScalarKind::float_) {
        if (!doubles_equal(std::get<double>(da), std::get<double>(db), rel_tol))
          return here + ": " + element_repr(da) + " vs " + element_repr(db);
      } else if (da != db) {
        return here + ": " + element_repr(da) + " vs " + element_repr(db);
      }
      continue;
    }
    if (ea.size() != eb.size())
      return here + ": " + std::to_string(ea.size()) + " vs " + std::to_string(eb.size()) + " values";
    for (std::size_t i = 0; i < ea.size(); ++i) {
      std::string at = f.type.repeated ? here + "[" + std::to_string(i) + "]" : here;
      if (f.type.is_message()) {
        std::string d = diff(*std::get<MessagePtr>(ea[i]), *std::get<MessagePtr>(eb[i]), rel_tol, at);
        if (!d.empty()) return d;
      } else if (f.type.kind == ScalarKind::double_ || f.type.kind == ScalarKind::float_) {
        if (!doubles_equal(std::get<double>(ea[i]), std::get<double>(eb[i]), rel_tol))
          return at + ": " + element_repr(ea[i]) + " vs " + element_repr(eb[i]);
      } else if (ea[i] != eb[i]) {
        return at + ": " + element_repr(ea[i]) + " vs " + element_repr(eb[i]);
      }
    }
  }
  return {};
}

CarrierValue Codec::random_value(std::string_view message, std::mt19937_64 &rng, const RandomOptions &options) const {
  const CarrierSchema &schema = registry_.at(message);
  CarrierValue v;
  v.message = schema.message_name;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> count(0, options.max_repeated);
  std::uniform_int_distribution<int> len(0, options.max_bytes);

  auto scalar = [&](const CarrierField &f) -> Element {
    // Mix small values with full-range ones so both short and long varints occur.
    bool small = unit(rng) < 0.5;
    switch (f.type.kind) {
      case ScalarKind::bool_: return unit(rng) < 0.5;
      case ScalarKind::int32: {
        std::uniform_int_distribution<std::int32_t> d(small ? -100 : std::numeric_limits<std::int32_t>::min(),
                                                       small ? 100 : std::numeric_limits<std::int32_t>::max());
        return static_cast<std::int64_t>(d(rng));
      }
      case ScalarKind::int64: {
        std::uniform_int_distribution<std::int64_t> d(small ? -1000 : std::numeric_limits<std::int64_t>::min(),
                                                       small ? 1000 : std::numeric_limits<std::int64_t>::max());
        return d(rng);
      }
      case ScalarKind::uint32: {
        std::uniform_int_distribution<std::uint32_t> d(0, small ? 200 : std::numeric_limits<std::uint32_t>::max());
        return static_cast<std::uint64_t>(d(rng));
      }
      case ScalarKind::uint64: {
        std::uniform_int_distribution<std::uint64_t> d(0, small ? 2000 : std::numeric_limits<std::uint64_t>::max());
        return d(rng);
      }
      case ScalarKind::double_: {
        std::uniform_real_distribution<double> d(-1e6, 1e6);
        return small ? std::round(d(rng)) : d(rng) * std::pow(10.0, std::uniform_int_distribution<int>(-30, 30)(rng));
      }
      case ScalarKind::float_: {
        std::uniform_real_distribution<float> d(-1e4f, 1e4f);
        return static_cast<double>(d(rng));
      }
      case ScalarKind::string: {
        static constexpr std::string_view alphabet = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 _-";
        std::string s;
        int n = len(rng);
        for (int i = 0; i < n; ++i) s.push_back(alphabet[rng() % alphabet.size()]);
        return s;
      }
      case ScalarKind::bytes: {
        std::string s;
        int n = len(rng);
        for (int i = 0; i < n; ++i) s.push_back(static_cast<char>(rng() & 0xff));
        return s;
      }
      case ScalarKind::message: break;
    }
    return std::string();
  };

  for (const auto &f : schema.fields) {
    if (f.type.repeated) {
      int n = count(rng);
      for (int i = 0; i < n; ++i) {
        if (f.type.is_message()) {
          v.add(f.number, MessagePtr(std::make_shared<CarrierValue>(random_value(f.type.message, rng, options))));
        } else {
          v.add(f.number, scalar(f));
        }
      }
      continue;
    }
    if (f.type.is_message()) {
      if (unit(rng) >= options.absent_probability)
        v.set(f.number, MessagePtr(std::make_shared<CarrierValue>(random_value(f.type.message, rng, options))));
      continue;
    }
    if (f.optional && unit(rng) < options.absent_probability) continue;
    Element e = scalar(f);
    // Implicit-presence fields never hold an explicit default after decoding.
    if (!f.optional && is_default(f, e)) continue;
    v.set(f.number, std::move(e));
  }
  return v;
}

nlohmann::json Codec::to_json(const CarrierValue &value) const {
  const CarrierSchema &schema = registry_.at(value.message);
  nlohmann::json out = nlohmann::json::object();
  for (const auto &f : schema.fields) {
    auto it = value.fields.find(f.number);
    if (it == value.fields.end() || it->second.empty()) continue;
    auto one = [&](const Element &e) -> nlohmann::json {
      if (f.type.is_message()) return to_json(*std::get<MessagePtr>(e));
      if (f.type.kind == ScalarKind::bytes) return util::to_hex(std::get<std::string>(e));
      return std::visit(
          [](const auto &x) -> nlohmann::json {
            if constexpr (std::is_same_v<std::decay_t<decltype(x)>, MessagePtr>) return nullptr;
            else return x;
          },
          e);
    };
    if (f.type.repeated) {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto &e : it->second) arr.push_back(one(e));
      out[f.name] = arr;
    } else {
      out[f.name] = one(it->second.front());
    }
  }
  return out;
}

CarrierValue Codec::from_json(std::string_view message, const nlohmann::json &j) const {
  const CarrierSchema &schema = registry_.at(message);
  if (!j.is_object()) throw MalformedInput(std::string(message) + ": expected a JSON object");
  CarrierValue v;
  v.message = schema.message_name;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const CarrierField *f = schema.field_named(it.key());
    if (!f) throw MalformedInput(std::string(message) + ": unknown field " + it.key());
    auto one = [&](const nlohmann::json &x) -> Element {
      try {
        switch (f->type.kind) {
          case ScalarKind::message: return MessagePtr(std::make_shared<CarrierValue>(from_json(f->type.message, x)));
          case ScalarKind::bytes: return util::from_hex(x.get<std::string>());
          case ScalarKind::string: return x.get<std::string>();
          case ScalarKind::bool_: return x.get<bool>();
          case ScalarKind::int32:
          case ScalarKind::int64: return x.get<std::int64_t>();
          case ScalarKind::uint32:
          case ScalarKind::uint64: return x.get<std::uint64_t>();
          case ScalarKind::double_:
          case ScalarKind::float_: return x.get<double>();
        }
      } catch (const nlohmann::json::exception &e) {
        throw MalformedInput(it.key() + ": " + e.what());
      }
      return std::string();
    };
    if (f->type.repeated) {
      if (!it.value().is_array()) throw MalformedInput(it.key() + ": expected an array");
      for (const auto &x : it.value()) v.add(f->number, one(x));
    } else if (!it.value().is_null()) {
      v.set(f->number, one(it.value()));
    }
  }
  return v;
}

}  // namespace xcrate::carrier
