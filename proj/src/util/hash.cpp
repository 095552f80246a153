#include "xcrate/util/hash.hpp"

#include <openssl/evp.h>

#include <array>
#include <stdexcept>

#include "xcrate/util/text.hpp"

namespace xcrate::util {

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  return to_hex(std::string_view(reinterpret_cast<const char *>(digest.data()), length));
}

}  // namespace xcrate::util
