#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace xcrate::util {

// Harness stream framing: each frame is a 4-byte big-endian length followed by
// that many payload bytes.
inline constexpr std::uint32_t kMaxFrameBytes = 64u * 1024u * 1024u;

void append_frame(std::string &out, std::string_view payload);
std::string encode_frames(const std::vector<std::string> &frames);
// Throws MalformedInput on a truncated or oversized frame.
std::vector<std::string> decode_frames(std::string_view data);

void write_frame(std::ostream &out, std::string_view payload);
// Returns nullopt at a clean end of stream.
std::optional<std::string> read_frame(std::istream &in);

}  // namespace xcrate::util
