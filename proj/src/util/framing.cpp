#include "xcrate/util/framing.hpp"

#include "xcrate/error.hpp"

namespace xcrate::util {

namespace {
void put_length(std::string &out, std::uint32_t n) {
  out.push_back(static_cast<char>((n >> 24) & 0xFF));
  out.push_back(static_cast<char>((n >> 16) & 0xFF));
  out.push_back(static_cast<char>((n >> 8) & 0xFF));
  out.push_back(static_cast<char>(n & 0xFF));
}

std::uint32_t get_length(const unsigned char *p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
         std::uint32_t{p[3]};
}
}  // namespace

void append_frame(std::string &out, std::string_view payload) {
  if (payload.size() > kMaxFrameBytes) throw MalformedInput("frame exceeds size limit");
  put_length(out, static_cast<std::uint32_t>(payload.size()));
  out.append(payload);
}

std::string encode_frames(const std::vector<std::string> &frames) {
  std::string out;
  for (const auto &f : frames) append_frame(out, f);
  return out;
}

std::vector<std::string> decode_frames(std::string_view data) {
  std::vector<std::string> frames;
  std::size_t pos = 0;
  while (pos < data.size()) {
    if (data.size() - pos < 4) throw MalformedInput("truncated frame header");
    std::uint32_t n = get_length(reinterpret_cast<const unsigned char *>(data.data() + pos));
    pos += 4;
    if (n > kMaxFrameBytes) throw MalformedInput("frame exceeds size limit");
    if (data.size() - pos < n) throw MalformedInput("truncated frame payload");
    frames.emplace_back(data.substr(pos, n));
    pos += n;
  }
  return frames;
}

void write_frame(std::ostream &out, std::string_view payload) {
  std::string buf;
  append_frame(buf, payload);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

std::optional<std::string> read_frame(std::istream &in) {
  unsigned char header[4];
  in.read(reinterpret_cast<char *>(header), 4);
  if (in.gcount() == 0) return std::nullopt;
  if (in.gcount() != 4) throw MalformedInput("truncated frame header");
  std::uint32_t n = get_length(header);
  if (n > kMaxFrameBytes) throw MalformedInput("frame exceeds size limit");
  std::string payload(n, '\0');
  in.read(payload.data(), n);
  if (static_cast<std::uint32_t>(in.gcount()) != n) throw MalformedInput("truncated frame payload");
  return payload;
}

}  // namespace xcrate::util
