#include "xcrate/carrier/compile.hpp"

#include <google/protobuf/descriptor.pb.h>

#include <set>

#include <unistd.h>

#include "xcrate/error.hpp"
#include "xcrate/util/json_file.hpp"
#include "xcrate/util/subprocess.hpp"
#include "xcrate/util/text.hpp"

namespace xcrate::carrier {

namespace fs = std::filesystem;
namespace pb = google::protobuf;

namespace {

ScalarKind kind_from_descriptor(const pb::FieldDescriptorProto &f, const std::string &msg) {
  using T = pb::FieldDescriptorProto;
  switch (f.type()) {
    case T::TYPE_DOUBLE: return ScalarKind::double_;
    case T::TYPE_FLOAT: return ScalarKind::float_;
    case T::TYPE_INT32: return ScalarKind::int32;
    case T::TYPE_INT64: return ScalarKind::int64;
    case T::TYPE_UINT32: return ScalarKind::uint32;
    case T::TYPE_UINT64: return ScalarKind::uint64;
    case T::TYPE_BOOL: return ScalarKind::bool_;
    case T::TYPE_STRING: return ScalarKind::string;
    case T::TYPE_BYTES: return ScalarKind::bytes;
    case T::TYPE_MESSAGE: return ScalarKind::message;
    default:
      throw SchemaCompileError(msg + "." + f.name() + ": field type outside the carrier subset");
  }
}

struct GoKind {
  std::string type;        // Go element type
  std::string wire;        // protowire type constant
  std::string append;      // expression appending element `V` to `b`
  std::string consume;     // statement list consuming one element into `v`
  std::string convert;     // expression converting consumed `v` to the element type
};

GoKind go_kind(const ProtoType &t, const SchemaRegistry &reg) {
  switch (t.kind) {
    case ScalarKind::double_:
      return {"float64", "protowire.Fixed64Type", "protowire.AppendFixed64(b, math.Float64bits($V))",
              "protowire.ConsumeFixed64(b)", "math.Float64frombits(v)"};
    case ScalarKind::float_:
      return {"float32", "protowire.Fixed32Type", "protowire.AppendFixed32(b, math.Float32bits($V))",
              "protowire.ConsumeFixed32(b)", "math.Float32frombits(v)"};
    case ScalarKind::int32:
      return {"int32", "protowire.VarintType", "protowire.AppendVarint(b, uint64($V))", "protowire.ConsumeVarint(b)",
              "int32(v)"};
    case ScalarKind::int64:
      return {"int64", "protowire.VarintType", "protowire.AppendVarint(b, uint64($V))", "protowire.ConsumeVarint(b)",
              "int64(v)"};
    case ScalarKind::uint32:
      return {"uint32", "protowire.VarintType", "protowire.AppendVarint(b, uint64($V))", "protowire.ConsumeVarint(b)",
              "uint32(v)"};
    case ScalarKind::uint64:
      return {"uint64", "protowire.VarintType", "protowire.AppendVarint(b, $V)", "protowire.ConsumeVarint(b)", "v"};
    case ScalarKind::bool_:
      return {"bool", "protowire.VarintType", "protowire.AppendVarint(b, protowire.EncodeBool($V))",
              "protowire.ConsumeVarint(b)", "protowire.DecodeBool(v)"};
    case ScalarKind::string:
      return {"string", "protowire.BytesType", "protowire.AppendString(b, $V)", "protowire.ConsumeString(b)", "v"};
    case ScalarKind::bytes:
      return {"[]byte", "protowire.BytesType", "protowire.AppendBytes(b, $V)", "protowire.ConsumeBytes(b)",
              "append([]byte{}, v...)"};
    case ScalarKind::message: {
      std::string name = reg.carrier_type_name(t.message);
      return {"*" + name, "protowire.BytesType", "protowire.AppendBytes(b, $V.Marshal())", "protowire.ConsumeBytes(b)",
              ""};
    }
  }
  return {};
}

std::string subst(std::string text, const std::string &value) { return util::replace_all(std::move(text), "$V", value); }

std::string go_zero_check(const ProtoType &t, const std::string &expr) {
  switch (t.kind) {
    case ScalarKind::double_: return "math.Float64bits(" + expr + ") != 0";
    case ScalarKind::float_: return "math.Float32bits(" + expr + ") != 0";
    case ScalarKind::bool_: return expr;
    case ScalarKind::string:
    case ScalarKind::bytes: return "len(" + expr + ") > 0";
    case ScalarKind::message: return expr + " != nil";
    default: return expr + " != 0";
  }
}

void emit_go_message(std::string &out, const CarrierSchema &s, const SchemaRegistry &reg) {
  std::string name = reg.carrier_type_name(s.message_name);
  std::size_t width = 0;
  for (const auto &f : s.fields) width = std::max(width, pascal_from_snake(f.name).size());

  out += "type " + name + " struct {\n";
  for (const auto &f : s.fields) {
    GoKind k = go_kind(f.type, reg);
    std::string field = pascal_from_snake(f.name);
    std::string type = k.type;
    if (f.type.repeated) type = "[]" + type;
    else if (f.optional && f.type.kind != ScalarKind::bytes && !f.type.is_message()) type = "*" + type;
    out += "\t" + field + std::string(width - field.size() + 1, ' ') + type + "\n";
  }
  out += "}\n\n";

  out += "// Marshal encodes m in canonical proto3 wire format.\n";
  out += "func (m *" + name + ") Marshal() []byte {\n\tvar b []byte\n";
  for (const auto &f : s.fields) {
    GoKind k = go_kind(f.type, reg);
    std::string field = "m." + pascal_from_snake(f.name);
    std::string num = std::to_string(f.number);
    if (f.type.repeated && f.type.is_packable()) {
      out += "\tif len(" + field + ") > 0 {\n\t\tvar p []byte\n\t\tfor _, x := range " + field + " {\n";
      out += "\t\t\tp = " + util::replace_all(subst(k.append, "x"), "(b,", "(p,") + "\n\t\t}\n";
      out += "\t\tb = protowire.AppendTag(b, " + num + ", protowire.BytesType)\n\t\tb = protowire.AppendBytes(b, p)\n\t}\n";
    } else if (f.type.repeated) {
      out += "\tfor _, x := range " + field + " {\n\t\tb = protowire.AppendTag(b, " + num + ", " + k.wire + ")\n";
      out += "\t\tb = " + subst(k.append, "x") + "\n\t}\n";
    } else if (f.optional && f.type.kind == ScalarKind::bytes) {
      out += "\tif " + field + " != nil {\n\t\tb = protowire.AppendTag(b, " + num + ", " + k.wire + ")\n";
      out += "\t\tb = " + subst(k.append, field) + "\n\t}\n";
    } else if (f.optional && !f.type.is_message()) {
      out += "\tif " + field + " != nil {\n\t\tb = protowire.AppendTag(b, " + num + ", " + k.wire + ")\n";
      out += "\t\tb = " + subst(k.append, "*" + field) + "\n\t}\n";
    } else {
      out += "\tif " + go_zero_check(f.type, field) + " {\n\t\tb = protowire.AppendTag(b, " + num + ", " + k.wire + ")\n";
      out += "\t\tb = " + subst(k.append, field) + "\n\t}\n";
    }
  }
  out += "\treturn b\n}\n\n";

  out += "// Unmarshal replaces m with the message decoded from b.\n";
  out += "func (m *" + name + ") Unmarshal(b []byte) error {\n\t*m = " + name + "{}\n";
  out += "\tfor len(b) > 0 {\n\t\tnum, typ, n := protowire.ConsumeTag(b)\n";
  out += "\t\tif n < 0 {\n\t\t\treturn protowire.ParseError(n)\n\t\t}\n\t\tb = b[n:]\n\t\tswitch {\n";
  for (const auto &f : s.fields) {
    GoKind k = go_kind(f.type, reg);
    std::string field = "m." + pascal_from_snake(f.name);
    std::string num = std::to_string(f.number);
    auto consume_one = [&](const std::string &indent, const std::string &src, const std::string &store) {
      std::string code = indent + "v, n := " + util::replace_all(k.consume, "(b)", "(" + src + ")") + "\n";
      code += indent + "if n < 0 {\n" + indent + "\treturn protowire.ParseError(n)\n" + indent + "}\n";
      code += indent + src + " = " + src + "[n:]\n";
      if (f.type.is_message()) {
        std::string t = reg.carrier_type_name(f.type.message);
        code += indent + "x := &" + t + "{}\n" + indent + "if err := x.Unmarshal(v); err != nil {\n" + indent +
                "\treturn err\n" + indent + "}\n";
        code += indent + util::replace_all(store, "$X", "x") + "\n";
      } else {
        code += indent + util::replace_all(store, "$X", k.convert) + "\n";
      }
      return code;
    };
    if (f.type.repeated && f.type.is_packable()) {
      out += "\t\tcase num == " + num + " && typ == protowire.BytesType:\n";
      out += "\t\t\tp, n := protowire.ConsumeBytes(b)\n\t\t\tif n < 0 {\n\t\t\t\treturn protowire.ParseError(n)\n\t\t\t}\n";
      out += "\t\t\tb = b[n:]\n\t\t\tfor len(p) > 0 {\n";
      out += consume_one("\t\t\t\t", "p", field + " = append(" + field + ", $X)");
      out += "\t\t\t}\n";
    }
    out += "\t\tcase num == " + num + " && typ == " + k.wire + ":\n";
    std::string store;
    if (f.type.repeated) store = field + " = append(" + field + ", $X)";
    else if (f.optional && f.type.kind != ScalarKind::bytes && !f.type.is_message())
      store = "{\n\t\t\t\tx := $X\n\t\t\t\t" + field + " = &x\n\t\t\t}";
    else store = field + " = $X";
    out += consume_one("\t\t\t", "b", store);
  }
  out += "\t\tdefault:\n\t\t\tn := protowire.ConsumeFieldValue(num, typ, b)\n";
  out += "\t\t\tif n < 0 {\n\t\t\t\treturn protowire.ParseError(n)\n\t\t\t}\n\t\t\tb = b[n:]\n\t\t}\n\t}\n\treturn nil\n}\n";
}

std::string rust_type(const ProtoType &t, const SchemaRegistry &reg) {
  switch (t.kind) {
    case ScalarKind::double_: return "f64";
    case ScalarKind::float_: return "f32";
    case ScalarKind::int32: return "i32";
    case ScalarKind::int64: return "i64";
    case ScalarKind::uint32: return "u32";
    case ScalarKind::uint64: return "u64";
    case ScalarKind::bool_: return "bool";
    case ScalarKind::string: return "String";
    case ScalarKind::bytes: return "Vec<u8>";
    case ScalarKind::message: return reg.carrier_type_name(t.message);
  }
  return "()";
}

int rust_wire(const ProtoType &t) {
  switch (t.kind) {
    case ScalarKind::double_: return 1;
    case ScalarKind::float_: return 5;
    case ScalarKind::string:
    case ScalarKind::bytes:
    case ScalarKind::message: return 2;
    default: return 0;
  }
}

// Statement writing element `e` (an expression of the element type) into `buf`.
std::string rust_put(const ProtoType &t, const std::string &e, const std::string &buf) {
  switch (t.kind) {
    case ScalarKind::int32: return "wire::put_varint(" + buf + ", " + e + " as i64 as u64);";
    case ScalarKind::int64:
    case ScalarKind::uint32: return "wire::put_varint(" + buf + ", " + e + " as u64);";
    case ScalarKind::uint64: return "wire::put_varint(" + buf + ", " + e + ");";
    case ScalarKind::bool_: return "wire::put_varint(" + buf + ", if " + e + " { 1 } else { 0 });";
    case ScalarKind::double_:
    case ScalarKind::float_: return buf + ".extend_from_slice(&" + e + ".to_bits().to_le_bytes());";
    case ScalarKind::string: return "wire::put_len(" + buf + ", " + e + ".as_bytes());";
    case ScalarKind::bytes: return "wire::put_len(" + buf + ", &" + e + ");";
    case ScalarKind::message: return "wire::put_len(" + buf + ", &" + e + ".encode());";
  }
  return "";
}

std::string rust_read(const ProtoType &t, const std::string &r, const SchemaRegistry &reg) {
  switch (t.kind) {
    case ScalarKind::int32: return r + ".varint()? as i32";
    case ScalarKind::int64: return r + ".varint()? as i64";
    case ScalarKind::uint32: return r + ".varint()? as u32";
    case ScalarKind::uint64: return r + ".varint()?";
    case ScalarKind::bool_: return r + ".varint()? != 0";
    case ScalarKind::double_: return "f64::from_bits(" + r + ".fixed64()?)";
    case ScalarKind::float_: return "f32::from_bits(" + r + ".fixed32()?)";
    case ScalarKind::string: return "wire::utf8(" + r + ".bytes()?)?";
    case ScalarKind::bytes: return r + ".bytes()?.to_vec()";
    case ScalarKind::message: return reg.carrier_type_name(t.message) + "::decode(" + r + ".bytes()?)?";
  }
  return "";
}

std::string rust_nonzero(const ProtoType &t, const std::string &e) {
  switch (t.kind) {
    case ScalarKind::double_:
    case ScalarKind::float_: return e + ".to_bits() != 0";
    case ScalarKind::bool_: return e;
    case ScalarKind::string:
    case ScalarKind::bytes: return "!" + e + ".is_empty()";
    default: return e + " != 0";
  }
}

constexpr std::string_view kRustRuntime = R"(#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeError(pub String);

impl std::fmt::Display for DecodeError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "carrier decode error: {}", self.0)
    }
}

impl std::error::Error for DecodeError {}

pub mod wire {
    use super::DecodeError;

    pub fn put_varint(out: &mut Vec<u8>, mut v: u64) {
        while v >= 0x80 {
            out.push((v as u8 & 0x7f) | 0x80);
            v >>= 7;
        }
        out.push(v as u8);
    }

    pub fn put_tag(out: &mut Vec<u8>, number: u32, wire_type: u32) {
        put_varint(out, ((number as u64) << 3) | wire_type as u64);
    }

    pub fn put_len(out: &mut Vec<u8>, data: &[u8]) {
        put_varint(out, data.len() as u64);
        out.extend_from_slice(data);
    }

    pub fn utf8(data: &[u8]) -> Result<String, DecodeError> {
        String::from_utf8(data.to_vec()).map_err(|_| DecodeError("invalid UTF-8 in string field".into()))
    }

    pub struct Reader<'a> {
        data: &'a [u8],
        pos: usize,
    }

    impl<'a> Reader<'a> {
        pub fn new(data: &'a [u8]) -> Self {
            Reader { data, pos: 0 }
        }

        pub fn done(&self) -> bool {
            self.pos >= self.data.len()
        }

        pub fn varint(&mut self) -> Result<u64, DecodeError> {
            let mut v: u64 = 0;
            let mut shift = 0;
            while shift < 64 {
                let b = *self.data.get(self.pos).ok_or_else(|| DecodeError("truncated varint".into()))?;
                self.pos += 1;
                v |= ((b & 0x7f) as u64) << shift;
                if b & 0x80 == 0 {
                    return Ok(v);
                }
                shift += 7;
            }
            Err(DecodeError("varint longer than 10 bytes".into()))
        }

        fn take(&mut self, n: usize) -> Result<&'a [u8], DecodeError> {
            if self.data.len() - self.pos < n {
                return Err(DecodeError("field overruns the buffer".into()));
            }
            let s = &self.data[self.pos..self.pos + n];
            self.pos += n;
            Ok(s)
        }

        pub fn fixed32(&mut self) -> Result<u32, DecodeError> {
            let s = self.take(4)?;
            Ok(u32::from_le_bytes([s[0], s[1], s[2], s[3]]))
        }

        pub fn fixed64(&mut self) -> Result<u64, DecodeError> {
            let s = self.take(8)?;
            let mut a = [0u8; 8];
            a.copy_from_slice(s);
            Ok(u64::from_le_bytes(a))
        }

        pub fn bytes(&mut self) -> Result<&'a [u8], DecodeError> {
            let n = self.varint()? as usize;
            self.take(n)
        }

        pub fn skip(&mut self, wire_type: u32) -> Result<(), DecodeError> {
            match wire_type {
                0 => self.varint().map(|_| ()),
                1 => self.take(8).map(|_| ()),
                2 => self.bytes().map(|_| ()),
                5 => self.take(4).map(|_| ()),
                w => Err(DecodeError(format!("unsupported wire type {}", w))),
            }
        }
    }

    pub fn expect(wire_type: u32, want: u32, field: &str) -> Result<(), DecodeError> {
        if wire_type == want {
            Ok(())
        } else {
            Err(DecodeError(format!("field {}: wrong wire type {}", field, wire_type)))
        }
    }
}
)";

void emit_rust_message(std::string &out, const CarrierSchema &s, const SchemaRegistry &reg) {
  std::string name = reg.carrier_type_name(s.message_name);
  out += "\n#[derive(Debug, Clone, PartialEq, Default)]\npub struct " + name + " {\n";
  for (const auto &f : s.fields) {
    std::string t = rust_type(f.type, reg);
    if (f.type.repeated) t = "Vec<" + t + ">";
    else if (f.optional || f.type.is_message()) t = "Option<" + t + ">";
    out += "    pub " + rust_field_name(f.name) + ": " + t + ",\n";
  }
  out += "}\n\nimpl " + name + " {\n";
  out += "    pub fn encode(&self) -> Vec<u8> {\n        let mut out = Vec::new();\n        self.encode_into(&mut out);\n"
         "        out\n    }\n\n";
  out += "    #[allow(unused_variables)]\n    pub fn encode_into(&self, out: &mut Vec<u8>) {\n";
  for (const auto &f : s.fields) {
    std::string field = "self." + rust_field_name(f.name);
    std::string num = std::to_string(f.number);
    std::string wt = std::to_string(rust_wire(f.type));
    if (f.type.repeated && f.type.is_packable()) {
      out += "        if !" + field + ".is_empty() {\n            let mut p = Vec::new();\n";
      out += "            for v in " + field + ".iter() {\n                let pb = &mut p;\n                " + rust_put(f.type, "(*v)", "pb") + "\n            }\n";
      out += "            wire::put_tag(out, " + num + ", 2);\n            wire::put_len(out, &p);\n        }\n";
    } else if (f.type.repeated) {
      out += "        for v in " + field + ".iter() {\n            wire::put_tag(out, " + num + ", " + wt + ");\n";
      out += "            " + rust_put(f.type, "(*v)", "out") + "\n        }\n";
    } else if (f.optional || f.type.is_message()) {
      out += "        if let Some(v) = &" + field + " {\n            wire::put_tag(out, " + num + ", " + wt + ");\n";
      out += "            " + rust_put(f.type, "(*v)", "out") + "\n        }\n";
    } else {
      out += "        if " + rust_nonzero(f.type, field) + " {\n            wire::put_tag(out, " + num + ", " + wt + ");\n";
      out += "            " + rust_put(f.type, field, "out") + "\n        }\n";
    }
  }
  out += "    }\n\n";
  out += "    pub fn decode(buf: &[u8]) -> Result<Self, DecodeError> {\n";
  out += "        #[allow(unused_mut)]\n        let mut m = Self::default();\n        let mut r = wire::Reader::new(buf);\n";
  out += "        while !r.done() {\n            let tag = r.varint()?;\n            let wt = (tag & 7) as u32;\n";
  out += "            match tag >> 3 {\n                0 => return Err(DecodeError(\"field number 0\".into())),\n";
  for (const auto &f : s.fields) {
    std::string field = "m." + rust_field_name(f.name);
    std::string wt = std::to_string(rust_wire(f.type));
    out += "                " + std::to_string(f.number) + " => {\n";
    if (f.type.repeated && f.type.is_packable()) {
      out += "                    if wt == 2 {\n                        let mut p = wire::Reader::new(r.bytes()?);\n";
      out += "                        while !p.done() {\n                            " + field + ".push(" +
             rust_read(f.type, "p", reg) + ");\n                        }\n                    } else {\n";
      out += "                        wire::expect(wt, " + wt + ", \"" + f.name + "\")?;\n";
      out += "                        " + field + ".push(" + rust_read(f.type, "r", reg) + ");\n                    }\n";
    } else {
      out += "                    wire::expect(wt, " + wt + ", \"" + f.name + "\")?;\n";
      if (f.type.repeated) out += "                    " + field + ".push(" + rust_read(f.type, "r", reg) + ");\n";
      else if (f.optional || f.type.is_message()) out += "                    " + field + " = Some(" + rust_read(f.type, "r", reg) + ");\n";
      else out += "                    " + field + " = " + rust_read(f.type, "r", reg) + ";\n";
    }
    out += "                }\n";
  }
  out += "                _ => r.skip(wt)?,\n            }\n        }\n        Ok(m)\n    }\n}\n";
}

}  // namespace

std::string rust_field_name(const std::string &proto_name) {
  static const std::set<std::string> raw = {
      "as",    "break",  "const", "continue", "else",     "enum",    "extern", "false",  "fn",     "for",
      "if",    "impl",   "in",    "let",      "loop",     "match",   "mod",    "move",   "mut",    "pub",
      "ref",   "return", "static", "struct",  "trait",    "true",    "type",   "unsafe", "use",    "where",
      "while", "async",  "await", "dyn",      "abstract", "become",  "box",    "do",     "final",  "macro",
      "override", "priv", "typeof", "unsized", "virtual", "yield",   "try"};
  static const std::set<std::string> reserved = {"self", "Self", "super", "crate"};
  if (raw.count(proto_name)) return "r#" + proto_name;
  if (reserved.count(proto_name)) return proto_name + "_";
  return proto_name;
}

SchemaRegistry registry_from_descriptor_set(const std::string &descriptor_set,
                                            const std::map<std::string, std::string> &source_types) {
  pb::FileDescriptorSet set;
  if (!set.ParseFromString(descriptor_set)) throw SchemaCompileError("unreadable descriptor set");
  std::vector<CarrierSchema> pending;
  for (const auto &file : set.file()) {
    if (file.enum_type_size() > 0) throw SchemaCompileError(file.name() + ": enums are outside the carrier subset");
    for (const auto &m : file.message_type()) {
      if (m.nested_type_size() > 0 || m.enum_type_size() > 0)
        throw SchemaCompileError(m.name() + ": nested declarations are outside the carrier subset");
      CarrierSchema s;
      s.message_name = m.name();
      auto src = source_types.find(m.name());
      s.source_type = src == source_types.end() ? m.name() : src->second;
      for (const auto &f : m.field()) {
        if (f.has_oneof_index() && !f.proto3_optional())
          throw SchemaCompileError(m.name() + "." + f.name() + ": oneof is outside the carrier subset");
        CarrierField cf;
        cf.name = f.name();
        cf.number = f.number();
        cf.type.kind = kind_from_descriptor(f, m.name());
        cf.type.repeated = f.label() == pb::FieldDescriptorProto::LABEL_REPEATED;
        cf.optional = f.proto3_optional();
        cf.source_name = f.name();
        if (cf.type.is_message()) {
          std::string tn = f.type_name();
          cf.type.message = tn.substr(tn.rfind('.') + 1);
          s.depends_on.insert(cf.type.message);
        }
        s.fields.push_back(std::move(cf));
      }
      pending.push_back(std::move(s));
    }
  }
  SchemaRegistry reg;
  // Bind in dependency order; the compiler has already rejected dangling names.
  while (!pending.empty()) {
    bool progress = false;
    for (auto it = pending.begin(); it != pending.end();) {
      bool ready = true;
      for (const auto &d : it->depends_on) ready = ready && reg.find(d) != nullptr;
      if (!ready) {
        ++it;
        continue;
      }
      try {
        reg.bind(*it);
      } catch (const Error &e) {
        throw SchemaCompileError(std::string("schema outside the carrier subset: ") + e.what());
      }
      it = pending.erase(it);
      progress = true;
    }
    if (!progress) throw SchemaCompileError("cyclic or self-referential messages are outside the carrier subset");
  }
  return reg;
}

std::string emit_go_carriers(const SchemaRegistry &registry, const std::string &go_package) {
  bool any = !registry.empty();
  bool needs_math = false;
  for (const auto &[_, s] : registry.schemas())
    for (const auto &f : s.fields)
      needs_math = needs_math || f.type.kind == ScalarKind::double_ || f.type.kind == ScalarKind::float_;

  std::string out = "// Code generated from the carrier schema. DO NOT EDIT.\n\npackage " + go_package + "\n";
  if (any) {
    out += "\nimport (\n";
    if (needs_math) out += "\t\"math\"\n\n";
    out += "\t\"google.golang.org/protobuf/encoding/protowire\"\n)\n";
  }
  for (const auto &name : registry.ordered_messages()) {
    out += "\n";
    emit_go_message(out, registry.at(name), registry);
  }
  return out;
}

std::string emit_rust_carriers(const SchemaRegistry &registry) {
  std::string out = "// Generated from the carrier schema. Do not edit.\n#![allow(dead_code, unused_imports)]\n\n";
  out += kRustRuntime;
  for (const auto &name : registry.ordered_messages()) emit_rust_message(out, registry.at(name), registry);
  out += "\n/// Decodes `buf` as the named message and re-encodes it.\n";
  out += "pub fn roundtrip_by_name(name: &str, buf: &[u8]) -> Result<Vec<u8>, DecodeError> {\n    match name {\n";
  for (const auto &name : registry.ordered_messages())
    out += "        \"" + name + "\" => Ok(" + registry.carrier_type_name(name) + "::decode(buf)?.encode()),\n";
  out += "        _ => Err(DecodeError(format!(\"unknown message {}\", name))),\n    }\n}\n";
  return out;
}

CompiledCarriers compile_carriers(const fs::path &schema_file, const CompileOptions &options) {
  std::string protoc = options.protoc.string();
  if (options.protoc.is_absolute() ? !fs::exists(options.protoc) : !util::find_on_path(protoc))
    throw CompilerUnavailable("schema compiler `" + protoc + "` not found");
  if (!fs::exists(schema_file)) throw SchemaCompileError("schema file " + schema_file.string() + " does not exist");

  fs::path work = options.out_dir;
  bool temp = work.empty();
  if (temp) {
    work = fs::temp_directory_path() / ("xcrate-protoc-" + std::to_string(std::hash<std::string>{}(
                                                                schema_file.string() + std::to_string(::getpid()))));
  }
  fs::create_directories(work);
  fs::path desc = work / "carrier.desc";
  fs::path abs = fs::absolute(schema_file);

  util::ProcessOptions popts;
  popts.timeout = options.timeout;
  auto result = util::run_process({protoc, "--experimental_allow_proto3_optional",
                                   "--proto_path=" + abs.parent_path().string(),
                                   "--descriptor_set_out=" + desc.string(), abs.filename().string()},
                                  "", popts);
  if (result.spawn_failed) throw CompilerUnavailable("could not start `" + protoc + "`");
  CompiledCarriers out;
  out.exit_status = result.exit_code;
  out.compiler_stderr = result.err;
  if (result.timed_out || result.exit_code != 0) {
    if (temp) fs::remove_all(work);
    throw SchemaCompileError("exit status " + std::to_string(result.exit_code) + ": " + util::trim(result.err));
  }
  out.descriptor_set = util::read_file(desc);
  if (temp) fs::remove_all(work);

  out.registry = registry_from_descriptor_set(out.descriptor_set, options.source_types);
  out.go_source = emit_go_carriers(out.registry, options.go_package);
  out.rust_source = emit_rust_carriers(out.registry);
  if (!temp) {
    util::write_file(work / "carrier.go", out.go_source);
    util::write_file(work / "carrier.rs", out.rust_source);
  }
  return out;
}

}  // namespace xcrate::carrier
