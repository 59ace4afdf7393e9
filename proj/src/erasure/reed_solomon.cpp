#include "dynostore/erasure/reed_solomon.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "dynostore/domain/error.hpp"
#include "dynostore/erasure/gf256.hpp"

namespace dynostore::erasure {

ReedSolomon::ReedSolomon(unsigned n, unsigned k) : n_(n), k_(k), matrix_(static_cast<std::size_t>(n) * k, 0) {
  if (k < 1 || k > n || n > 255) {
    throw Error(Errc::InvalidParams, "require 1 <= k <= n <= 255, got n=" + std::to_string(n) + " k=" + std::to_string(k));
  }
  for (unsigned r = 0; r < k; ++r) matrix_[r * k + r] = 1;
  // Cauchy block: x_i = k + i, y_j = j, all distinct elements of GF(2^8).
  for (unsigned i = 0; i < n - k; ++i) {
    for (unsigned j = 0; j < k; ++j) {
      auto x = static_cast<std::uint8_t>(k + i);
      auto y = static_cast<std::uint8_t>(j);
      matrix_[(k + i) * k + j] = gf256::inv(gf256::add(x, y));
    }
  }
}

std::vector<Bytes> ReedSolomon::encode_parity(const std::vector<ByteView>& data) const {
  if (data.size() != k_) throw Error(Errc::InvalidParams, "encode_parity needs exactly k data shards");
  const std::size_t len = data.empty() ? 0 : data.front().size();
  std::vector<Bytes> parity(n_ - k_, Bytes(len, 0));
  for (unsigned p = 0; p < n_ - k_; ++p) {
    for (unsigned j = 0; j < k_; ++j) {
      gf256::mul_add(coefficient(k_ + p, j), data[j], parity[p]);
    }
  }
  return parity;
}

std::vector<Bytes> ReedSolomon::reconstruct_data(const std::map<unsigned, ByteView>& shards) const {
  const std::size_t len = shards.empty() ? 0 : shards.begin()->second.size();
  std::vector<Bytes> out(k_, Bytes(len));
  std::vector<std::span<std::uint8_t>> views(out.begin(), out.end());
  reconstruct_into(shards, views);
  return out;
}

void ReedSolomon::reconstruct_into(const std::map<unsigned, ByteView>& shards,
                                   std::span<const std::span<std::uint8_t>> out) const {
  if (out.size() != k_) throw Error(Errc::InvalidParams, "reconstruct_into needs k output shards");
  std::vector<std::pair<unsigned, ByteView>> chosen;
  // Prefer data shards: each one present is a row of the identity.
  for (const auto& [idx, bytes] : shards) {
    if (idx < k_ && chosen.size() < k_) chosen.emplace_back(idx, bytes);
  }
  for (const auto& [idx, bytes] : shards) {
    if (idx >= k_ && idx < n_ && chosen.size() < k_) chosen.emplace_back(idx, bytes);
  }
  if (chosen.size() < k_) {
    throw Error(Errc::NotEnoughChunks, "have " + std::to_string(chosen.size()) + " shards, need " + std::to_string(k_));
  }

  std::vector<bool> have(k_, false);
  bool all_data = true;
  for (const auto& [idx, bytes] : chosen) {
    if (idx < k_) {
      std::copy(bytes.begin(), bytes.end(), out[idx].begin());
      have[idx] = true;
    } else {
      all_data = false;
    }
  }
  if (all_data) return;

  std::vector<std::uint8_t> sub(static_cast<std::size_t>(k_) * k_);
  for (unsigned r = 0; r < k_; ++r) {
    for (unsigned c = 0; c < k_; ++c) sub[r * k_ + c] = coefficient(chosen[r].first, c);
  }
  auto decode = invert_matrix(std::move(sub), k_);
  for (unsigned d = 0; d < k_; ++d) {
    if (have[d]) continue;
    std::fill(out[d].begin(), out[d].end(), std::uint8_t{0});
    for (unsigned r = 0; r < k_; ++r) {
      gf256::mul_add(decode[d * k_ + r], chosen[r].second, out[d]);
    }
  }
}

std::vector<std::uint8_t> invert_matrix(std::vector<std::uint8_t> m, unsigned size) {
  std::vector<std::uint8_t> inv(static_cast<std::size_t>(size) * size, 0);
  for (unsigned i = 0; i < size; ++i) inv[i * size + i] = 1;
  for (unsigned col = 0; col < size; ++col) {
    unsigned pivot = col;
    while (pivot < size && m[pivot * size + col] == 0) ++pivot;
    if (pivot == size) throw Error(Errc::InvalidParams, "singular matrix");
    if (pivot != col) {
      for (unsigned c = 0; c < size; ++c) {
        std::swap(m[pivot * size + c], m[col * size + c]);
        std::swap(inv[pivot * size + c], inv[col * size + c]);
      }
    }
    std::uint8_t scale = gf256::inv(m[col * size + col]);
    for (unsigned c = 0; c < size; ++c) {
      m[col * size + c] = gf256::mul(m[col * size + c], scale);
      inv[col * size + c] = gf256::mul(inv[col * size + c], scale);
    }
    for (unsigned r = 0; r < size; ++r) {
      if (r == col) continue;
      std::uint8_t f = m[r * size + col];
      if (f == 0) continue;
      for (unsigned c = 0; c < size; ++c) {
        m[r * size + c] ^= gf256::mul(f, m[col * size + c]);
        inv[r * size + c] ^= gf256::mul(f, inv[col * size + c]);
      }
    }
  }
  return inv;
}

}  // namespace dynostore::erasure
