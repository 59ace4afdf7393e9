#include "dynostore/client/crypto.hpp"

#include <openssl/evp.h>
#include <openssl/rand.h>

#include <fstream>
#include <iterator>
#include <memory>

#include "dynostore/domain/error.hpp"
#include "dynostore/erasure/digest.hpp"

namespace dynostore::client {

namespace {

struct CipherCtxDeleter {
  void operator()(EVP_CIPHER_CTX* ctx) const { EVP_CIPHER_CTX_free(ctx); }
};

Bytes ctr_transform(ByteView input, const EncryptionKey& key, const InitVector& iv) {
  std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter> ctx(EVP_CIPHER_CTX_new());
  if (!ctx || EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_ctr(), nullptr, key.data(), iv.data()) != 1) {
    throw Error(Errc::BackendFailure, "cipher init failed");
  }
  Bytes out(input.size());
  // EVP_EncryptUpdate takes int lengths; feed large inputs in slices.
  constexpr std::size_t kSlice = 1 << 30;
  std::size_t done = 0;
  while (done < input.size()) {
    const int len = static_cast<int>(std::min(kSlice, input.size() - done));
    int written = 0;
    if (EVP_EncryptUpdate(ctx.get(), out.data() + done, &written, input.data() + done, len) != 1) {
      throw Error(Errc::BackendFailure, "cipher update failed");
    }
    done += static_cast<std::size_t>(written);
  }
  return out;
}

}  // namespace

EncryptionKey load_key_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(Errc::EncryptionKeyMissing, "cannot read key file " + file.string());
  Bytes raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (raw.size() != 32) {
    throw Error(Errc::InvalidParams, "key file must hold 32 bytes, found " + std::to_string(raw.size()));
  }
  EncryptionKey key;
  std::copy(raw.begin(), raw.end(), key.begin());
  return key;
}

Bytes encrypt(ByteView plaintext, const EncryptionKey& key) {
  InitVector iv;
  if (RAND_bytes(iv.data(), static_cast<int>(iv.size())) != 1) throw Error(Errc::BackendFailure, "no randomness");
  return encrypt(plaintext, key, iv);
}

Bytes encrypt(ByteView plaintext, const EncryptionKey& key, const InitVector& iv) {
  auto body = ctr_transform(plaintext, key, iv);
  Bytes sealed(iv.begin(), iv.end());
  sealed.insert(sealed.end(), body.begin(), body.end());
  return sealed;
}

Bytes decrypt(ByteView sealed, const EncryptionKey& key) {
  if (sealed.size() < 16) throw Error(Errc::Truncated, "ciphertext shorter than its IV");
  InitVector iv;
  std::copy_n(sealed.begin(), iv.size(), iv.begin());
  return ctr_transform(sealed.subspan(16), key, iv);
}

std::string plaintext_checksum(ByteView plaintext) {
  const auto digest = erasure::hash_object(plaintext);
  return to_hex(ByteView(digest.data(), 8));
}

std::string encrypted_tag(ByteView plaintext) { return std::string(kEncryptedTagPrefix) + plaintext_checksum(plaintext); }

bool is_encrypted_tag(std::string_view tag) { return tag.starts_with(kEncryptedTagPrefix); }

void verify_plaintext(std::string_view tag, ByteView plaintext) {
  if (tag.substr(kEncryptedTagPrefix.size()) != plaintext_checksum(plaintext)) {
    throw Error(Errc::WrongKey, "decrypted object does not match its checksum");
  }
}

}  // namespace dynostore::client
