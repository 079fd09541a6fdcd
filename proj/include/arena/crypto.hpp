#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace arena {

using Digest = std::array<std::uint8_t, 32>;

Digest hmac_sha256(std::string_view key, std::string_view message);

// RFC 4648 base32 without padding, lowercase.
std::string base32(const std::uint8_t* data, std::size_t size);

// Opaque lowercase token derived from a keyed hash, `chars` base32 characters long.
std::string keyed_token(std::string_view secret, std::string_view message, std::size_t chars = 16);

}  // namespace arena
