// The fixture sidecar's interpreter is test infrastructure, but the
// round-trip results depend on it behaving like Go on adapter code.

#include <gtest/gtest.h>

#include "gosim.hpp"

using namespace xcrate::fixtures::gosim;
using xcrate::carrier::parse_go_struct;
using xcrate::carrier::parse_go_type;
using nlohmann::json;

namespace {

TypeEnv keypair_env() {
  TypeEnv env;
  env.add(parse_go_struct("type KeyPair struct { Private ed25519.PrivateKey; Label string }"));
  env.add(parse_go_struct("type ProtoKeyPair struct { Private []byte; Label string }"));
  env.add(parse_go_struct("type Item struct { N int64; Tags []string }"));
  return env;
}

}  // namespace

TEST(GoSim, AdapterRoundTrip) {
  TypeEnv env = keypair_env();
  Interpreter in(env);
  in.load(R"(
import "crypto/ed25519"

func ToProtoKeyPair(v KeyPair) (*ProtoKeyPair, error) {
	return &ProtoKeyPair{Private: []byte(v.Private), Label: v.Label}, nil
}

func FromProtoKeyPair(p *ProtoKeyPair) (KeyPair, error) {
	return KeyPair{Private: ed25519.PrivateKey(p.Private), Label: p.Label}, nil
}
)");
  ASSERT_TRUE(in.has_function("ToProtoKeyPair"));
  json native{{"Private", "00ff10"}, {"Label", "main"}};
  Value v = env.from_native(native, parse_go_type("KeyPair"));
  std::vector<Value> fwd = in.call("ToProtoKeyPair", {v});
  ASSERT_EQ(fwd.size(), 2u);
  EXPECT_TRUE(fwd[1].is_nil());
  std::vector<Value> back = in.call("FromProtoKeyPair", {fwd[0]});
  EXPECT_EQ(env.to_native(back[0], parse_go_type("KeyPair")), native);
}

TEST(GoSim, LoopsSlicesAndArithmetic) {
  TypeEnv env = keypair_env();
  Interpreter in(env);
  in.load(R"(
func Sum(xs []int64) int64 {
	var total int64
	for _, x := range xs {
		total += x
	}
	return total
}

func Evens(n int64) []int64 {
	out := make([]int64, 0, n)
	for i := int64(0); i < n; i++ {
		if i%2 == 0 {
			out = append(out, i)
		}
	}
	return out
}
)");
  Value xs = env.from_native(json{1, 2, 3, -10}, parse_go_type("[]int64"));
  EXPECT_EQ(in.call("Sum", {xs})[0].i, -4);
  Value evens = in.call("Evens", {Value::integer(7, "int64")})[0];
  EXPECT_EQ(env.to_native(evens, parse_go_type("[]int64")), (json{0, 2, 4, 6}));
}

TEST(GoSim, ErrorsPropagate) {
  TypeEnv env = keypair_env();
  Interpreter in(env);
  in.load(R"(
import "fmt"

func Check(n int64) (int64, error) {
	if n < 0 {
		return 0, fmt.Errorf("negative: %d", n)
	}
	return n, nil
}
)");
  std::vector<Value> ok = in.call("Check", {Value::integer(3, "int64")});
  EXPECT_TRUE(ok[1].is_nil());
  std::vector<Value> bad = in.call("Check", {Value::integer(-2, "int64")});
  ASSERT_EQ(bad[1].k, Value::K::error);
  EXPECT_EQ(bad[1].s, "negative: -2");
}

TEST(GoSim, UndefinedIdentifiersFailTheBuild) {
  TypeEnv env = keypair_env();
  Interpreter in(env);
  EXPECT_THROW(in.load("func F(x int64) int64 {\n\treturn undefinedHelper(x)\n}\n"), BuildError);
  Interpreter in2(env);
  EXPECT_THROW(in2.load("func F(x int64) int64 {\n\treturn x +\n"), BuildError);
}

TEST(GoSim, RuntimeErrorsNameTheLine) {
  TypeEnv env = keypair_env();
  Interpreter in(env);
  in.load("func At(xs []int64, i int64) int64 {\n\treturn xs[i]\n}\n");
  Value xs = env.from_native(json{1}, parse_go_type("[]int64"));
  try {
    in.call("At", {xs, Value::integer(5, "int64")});
    FAIL() << "expected a runtime error";
  } catch (const RuntimeError &e) {
    EXPECT_NE(std::string(e.what()).find("2:"), std::string::npos) << e.what();
  }
}

TEST(GoSim, NilAndEmptySlicesShareANativeForm) {
  TypeEnv env = keypair_env();
  Value zero = env.zero(parse_go_type("Item"));
  json native = env.to_native(zero, parse_go_type("Item"));
  EXPECT_EQ(native.at("N"), 0);
  EXPECT_TRUE(native.at("Tags").is_array());
  EXPECT_TRUE(native.at("Tags").empty());
}

TEST(GoSim, CoercionConvertsNumericKinds) {
  TypeEnv env = keypair_env();
  Value v = env.coerce(Value::integer(300, "int"), parse_go_type("int64"));
  EXPECT_EQ(v.i, 300);
  EXPECT_EQ(v.type, "int64");
  EXPECT_THROW(env.coerce(Value::string_("x"), parse_go_type("int64")), RuntimeError);
}

TEST(GoSim, FormatsLikeFmt) {
  EXPECT_EQ(format_go("%s (%d keys)", {Value::string_("alice"), Value::integer(2)}), "alice (2 keys)");
  EXPECT_EQ(format_go("%x|%q|%%", {Value::bytes("\x01\xab"), Value::string_("a\"b")}), "01ab|\"a\\\"b\"|%");
  EXPECT_EQ(format_go("%v", {Value::boolean(true)}), "true");
}

TEST(GoSim, LibraryTable) {
  const auto &lib = library_functions();
  for (const char *name : {"sha512.Sum512", "ed25519.NewKeyFromSeed", "fmt.Errorf", "errors.New"})
    EXPECT_TRUE(lib.count(name)) << name;
  EXPECT_TRUE(is_library_type(parse_go_type("ed25519.PrivateKey")));
  EXPECT_FALSE(is_library_type(parse_go_type("KeyPair")));
}
