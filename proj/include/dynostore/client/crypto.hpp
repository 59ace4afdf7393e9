#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "dynostore/domain/bytes.hpp"

namespace dynostore::client {

using EncryptionKey = std::array<std::uint8_t, 32>;
using InitVector = std::array<std::uint8_t, 16>;

inline constexpr std::string_view kEncryptedTagPrefix = "aes256ctr:";

// Key files hold exactly 32 raw bytes.
EncryptionKey load_key_file(const std::filesystem::path& file);

// AES-256-CTR under a fresh random IV; output is IV || ciphertext.
Bytes encrypt(ByteView plaintext, const EncryptionKey& key);
Bytes encrypt(ByteView plaintext, const EncryptionKey& key, const InitVector& iv);
// Inverse of encrypt. Throws Truncated when the IV is missing.
Bytes decrypt(ByteView sealed, const EncryptionKey& key);

// 16 hex chars of the plaintext's SHA3-256.
std::string plaintext_checksum(ByteView plaintext);
std::string encrypted_tag(ByteView plaintext);
bool is_encrypted_tag(std::string_view tag);
// Throws WrongKey when `plaintext` does not match the checksum in `tag`.
void verify_plaintext(std::string_view tag, ByteView plaintext);

}  // namespace dynostore::client
