#pragma once

#include "dynostore/domain/bytes.hpp"

namespace dynostore::erasure {

// SHA3-256 of the exact input bytes.
Digest hash_object(ByteView bytes);

// Incremental SHA3-256 for callers that see an object in pieces.
class Sha3Hasher {
 public:
  Sha3Hasher();
  ~Sha3Hasher();
  Sha3Hasher(const Sha3Hasher&) = delete;
  Sha3Hasher& operator=(const Sha3Hasher&) = delete;

  void update(ByteView bytes);
  Digest finish();

 private:
  struct Impl;
  Impl* impl_;
};

}  // namespace dynostore::erasure
