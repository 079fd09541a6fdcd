#include "arena/crypto.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include "arena/error.hpp"

namespace arena {

Digest hmac_sha256(std::string_view key, std::string_view message) {
  Digest out{};
  unsigned int len = 0;
  if (!HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()),
            reinterpret_cast<const unsigned char*>(message.data()), message.size(), out.data(), &len) ||
      len != out.size()) {
    throw Error(Errc::InvalidArgument, "HMAC-SHA256 failed");
  }
  return out;
}

std::string base32(const std::uint8_t* data, std::size_t size) {
  static constexpr char kAlphabet[] = "abcdefghijklmnopqrstuvwxyz234567";
  std::string out;
  std::uint32_t buffer = 0;
  int bits = 0;
  for (std::size_t i = 0; i < size; ++i) {
    buffer = (buffer << 8) | data[i];
    bits += 8;
    while (bits >= 5) {
      out.push_back(kAlphabet[(buffer >> (bits - 5)) & 31]);
      bits -= 5;
    }
  }
  if (bits > 0) out.push_back(kAlphabet[(buffer << (5 - bits)) & 31]);
  return out;
}

std::string keyed_token(std::string_view secret, std::string_view message, std::size_t chars) {
  const auto digest = hmac_sha256(secret, message);
  auto text = base32(digest.data(), digest.size());
  if (chars < text.size()) text.resize(chars);
  return text;
}

}  // namespace arena
