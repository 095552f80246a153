#pragma once

// Hand-written Go functions with an equivalent Rust port and single-mutation
// variants of that port. Observed inputs come from testdata; the sidecar
// computes the outputs.

#include <string>
#include <vector>

#include <json.hpp>

#include "crate_fixtures.hpp"
#include "xcrate/util/json_file.hpp"

namespace xcrate::fixtures {

struct DifferentialCase {
  std::string function_id;
  std::string equivalent;
  std::vector<std::string> mutants;
};

inline const char *kDifferentialGo = R"(package diff

import (
	"crypto/ed25519"
	"crypto/rand"
	"crypto/sha512"
	"errors"
	"strconv"
	"strings"
)

func ed25519PrivateKeyToCurve25519(pk ed25519.PrivateKey) []byte {
	h := sha512.New()
	h.Write(pk.Seed())
	out := h.Sum(nil)
	return out[:32]
}

func Clamp(x int64, lo int64, hi int64) int64 {
	if x < lo {
		x = lo
	}
	if x > hi {
		x = hi
	}
	return x
}

func Fnv32(data []byte) uint32 {
	h := uint32(2166136261)
	for _, b := range data {
		h ^= uint32(b)
		h *= 16777619
	}
	return h
}

func JoinLabels(labels []string, sep string) string {
	return strings.Join(labels, sep)
}

func ScaleAll(xs []float64, k float64) []float64 {
	out := make([]float64, 0, len(xs))
	for _, x := range xs {
		out = append(out, x*k)
	}
	return out
}

func ParsePort(s string) (int, error) {
	if s == "" || len(s) > 5 {
		return 0, errors.New("bad port")
	}
	v, err := strconv.Atoi(s)
	if err != nil || v < 1 || v > 65535 || strings.ContainsAny(s, "+-") {
		return 0, errors.New("bad port")
	}
	return v, nil
}

func RandomNonce(n int) []byte {
	b := make([]byte, n)
	rand.Read(b)
	return b
}
)";

inline nlohmann::json differential_testdata() {
  nlohmann::json micro = util::read_json_file(fixture_path("micro_project/go/testdata.json"));
  nlohmann::json keys;
  for (const auto &f : micro.at("functions"))
    if (f.at("id") == "ed25519PrivateKeyToCurve25519") keys = f.at("inputs");
  using nlohmann::json;
  auto ints = [](std::int64_t x, std::int64_t lo, std::int64_t hi) { return json{{"X", x}, {"Lo", lo}, {"Hi", hi}}; };
  return {{"functions",
           {{{"id", "ed25519PrivateKeyToCurve25519"}, {"inputs", keys}},
            {{"id", "Clamp"},
             {"inputs",
              {ints(5, 0, 10), ints(-3, 0, 10), ints(42, 0, 10), ints(0, 0, 0), ints(INT64_MIN, -1, 1),
               ints(INT64_MAX, -1, 1), ints(7, 7, 9), ints(10, 0, 10)}}},
            {{"id", "Fnv32"},
             {"inputs", {{{"Data", ""}}, {{"Data", "61"}}, {{"Data", "666f6f626172"}}, {{"Data", "ff00ff00"}}}}},
            {{"id", "JoinLabels"},
             {"inputs",
              {{{"Labels", json::array()}, {"Sep", ","}},
               {{"Labels", {"a"}}, {"Sep", ", "}},
               {{"Labels", {"a", "b", "c"}}, {"Sep", ", "}},
               {{"Labels", {"", ""}}, {"Sep", "-"}}}}},
            {{"id", "ScaleAll"},
             {"inputs",
              {{{"Xs", {0.1, 0.2, 0.3}}, {"K", 3.0}},
               {{"Xs", json::array()}, {"K", 2.0}},
               {{"Xs", {1.5, -2.25, 1e-7}}, {"K", 0.1}}}}},
            {{"id", "ParsePort"},
             {"inputs",
              {{{"S", "80"}}, {{"S", "0"}}, {{"S", "65535"}}, {{"S", "65536"}}, {{"S", ""}}, {{"S", "abc"}},
               {{"S", "08080"}}, {{"S", "-1"}}}}},
            {{"id", "RandomNonce"}, {"inputs", {{{"N", 16}}, {{"N", 32}}}}}}}};
}

inline const char *kHashPort = R"(use ed25519_fixture::SigningKey;
use sha2_fixture::{Digest, Sha512};

pub fn ed25519_private_key_to_curve25519(pk: &SigningKey) -> Vec<u8> {
    let mut h = Sha512::new();
    h.update(pk.to_bytes());
    let out = h.finalize();
    out[..32].to_vec()
})";

inline std::vector<DifferentialCase> differential_cases() {
  std::string hash = kHashPort;
  auto replace = [](std::string s, const std::string &from, const std::string &to) {
    auto at = s.find(from);
    if (at == std::string::npos) throw std::logic_error("mutation site missing: " + from);
    return s.replace(at, from.size(), to);
  };
  std::string clamp = R"(pub fn clamp(x: i64, lo: i64, hi: i64) -> i64 {
    let mut x = x;
    if x < lo {
        x = lo;
    }
    if x > hi {
        x = hi;
    }
    x
})";
  std::string fnv = R"(pub fn fnv32(data: &[u8]) -> u32 {
    let mut h: u32 = 2166136261;
    for &b in data {
        h ^= b as u32;
        h = h.wrapping_mul(16777619);
    }
    h
})";
  std::string fnv_mutant = R"(pub fn fnv32(data: &[u8]) -> u32 {
    let mut h: u32 = 2166136261;
    for &b in data {
        h = h.wrapping_mul(16777619);
        h ^= b as u32;
    }
    h
})";
  std::string join = R"(pub fn join_labels(labels: &[String], sep: &str) -> String {
    let mut out = String::new();
    for (i, l) in labels.iter().enumerate() {
        if i > 0 {
            out.push_str(sep);
        }
        out.push_str(l);
    }
    out
})";
  std::string scale = R"(pub fn scale_all(xs: &[f64], k: f64) -> Vec<f64> {
    xs.iter().map(|x| x * k).collect()
})";
  std::string port = R"(pub fn parse_port(s: &str) -> Result<i64, String> {
    if s.is_empty() || s.len() > 5 || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!("bad port {:?}", s));
    }
    let v: i64 = s.parse().map_err(|e| format!("{}", e))?;
    if v < 1 || v > 65535 {
        return Err(format!("bad port {:?}", s));
    }
    Ok(v)
})";
  return {
      {"ed25519PrivateKeyToCurve25519",
       hash,
       {replace(hash, "out[..32]", "out[..31]"), replace(hash, "pk.to_bytes()", "pk.to_keypair_bytes()")}},
      {"Clamp", clamp, {replace(clamp, "x = hi;", "x = lo;")}},
      {"Fnv32", fnv, {fnv_mutant}},
      {"JoinLabels", join, {replace(join, "if i > 0 {", "if i >= 0 {")}},
      {"ScaleAll", scale, {replace(scale, "x * k", "((*x as f32) * (k as f32)) as f64")}},
      {"ParsePort", port, {replace(port, "v < 1 ||", "v < 0 ||")}},
  };
}

inline const char *kRandomNoncePort = R"(pub fn random_nonce(n: i64) -> Vec<u8> {
    vec![0u8; n as usize]
})";

// Glue for the hash function's input tuple comes from the model; the micro
// project's scripted answers cover it.
inline nlohmann::json micro_script_rules() {
  return util::read_json_file(fixture_path("micro_project/replay/full.rules.json"));
}

}  // namespace xcrate::fixtures
