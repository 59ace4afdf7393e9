#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "dynostore/domain/bytes.hpp"

namespace dynostore::erasure {

// Systematic MDS code over GF(2^8). The generator stacks the k x k identity
// on top of an (n-k) x k Cauchy block, so every k x k row-submatrix is
// invertible and any k shards recover the data.
class ReedSolomon {
 public:
  // Throws Error(InvalidParams) unless 1 <= k <= n <= 255.
  ReedSolomon(unsigned n, unsigned k);

  unsigned n() const { return n_; }
  unsigned k() const { return k_; }

  // Coefficient of data shard `col` in shard `row`.
  std::uint8_t coefficient(unsigned row, unsigned col) const { return matrix_[row * k_ + col]; }

  // Computes the n-k parity shards from k equal-length data shards.
  std::vector<Bytes> encode_parity(const std::vector<ByteView>& data) const;

  // Recovers the k data shards from any k shards keyed by shard index.
  // Extra entries are ignored; throws Error(NotEnoughChunks) if fewer than k.
  std::vector<Bytes> reconstruct_data(const std::map<unsigned, ByteView>& shards) const;
  // Same, writing data shard d into out[d]; every out[d] has the shard length.
  void reconstruct_into(const std::map<unsigned, ByteView>& shards, std::span<const std::span<std::uint8_t>> out) const;

 private:
  unsigned n_;
  unsigned k_;
  std::vector<std::uint8_t> matrix_;  // n x k, row-major
};

// Gauss-Jordan inversion of a square matrix over GF(2^8). Throws
// Error(InvalidParams) if singular.
std::vector<std::uint8_t> invert_matrix(std::vector<std::uint8_t> m, unsigned size);

}  // namespace dynostore::erasure
