#include "dynostore/erasure/digest.hpp"

#include <openssl/evp.h>

#include "dynostore/domain/error.hpp"

namespace dynostore::erasure {

struct Sha3Hasher::Impl {
  EVP_MD_CTX* ctx = nullptr;
};

Sha3Hasher::Sha3Hasher() : impl_(new Impl) {
  impl_->ctx = EVP_MD_CTX_new();
  if (impl_->ctx == nullptr || EVP_DigestInit_ex(impl_->ctx, EVP_sha3_256(), nullptr) != 1) {
    EVP_MD_CTX_free(impl_->ctx);
    delete impl_;
    throw Error(Errc::BackendFailure, "SHA3-256 unavailable");
  }
}

Sha3Hasher::~Sha3Hasher() {
  EVP_MD_CTX_free(impl_->ctx);
  delete impl_;
}

void Sha3Hasher::update(ByteView bytes) {
  if (!bytes.empty()) EVP_DigestUpdate(impl_->ctx, bytes.data(), bytes.size());
}

Digest Sha3Hasher::finish() {
  Digest out{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(impl_->ctx, out.data(), &len);
  return out;
}

Digest hash_object(ByteView bytes) {
  Sha3Hasher h;
  h.update(bytes);
  return h.finish();
}

}  // namespace dynostore::erasure
