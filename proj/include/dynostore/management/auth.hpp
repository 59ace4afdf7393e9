#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "dynostore/domain/bytes.hpp"
#include "dynostore/domain/clock.hpp"
#include "dynostore/domain/types.hpp"

namespace dynostore::management {

// Signed bearer token standing in for an OAuth access token. Wire form:
//   <hex(subject)>.<expiry_ms>.<scopes>.<hex(hmac)>
// where scopes is a subset of "rwa" and the HMAC-SHA256 covers everything
// before the last dot.
struct AuthToken {
  UserId subject;
  std::int64_t expiry = 0;
  std::vector<Mode> scopes;
  std::array<std::uint8_t, 32> signature{};

  bool has_scope(Mode mode) const;
  std::string signed_part() const;
  std::string encode() const;
};

// Issues and verifies tokens under one service secret. Every node that must
// check tokens (gateway, metadata, containers) holds an authority built from
// the same secret.
class TokenAuthority {
 public:
  TokenAuthority(Bytes secret, const Clock& clock);

  AuthToken issue(const UserId& subject, std::vector<Mode> scopes, std::chrono::milliseconds ttl) const;
  // Throws Error(Unauthorized) on malformed, tampered, or expired tokens.
  AuthToken verify(std::string_view encoded) const;
  // verify() plus a scope check.
  AuthToken require(std::string_view encoded, Mode scope) const;

  const Clock& clock() const { return clock_; }

 private:
  std::array<std::uint8_t, 32> sign(std::string_view data) const;

  Bytes secret_;
  const Clock& clock_;
};

// Local credential store in front of a TokenAuthority.
class AuthService {
 public:
  explicit AuthService(const TokenAuthority& authority,
                       std::chrono::milliseconds ttl = std::chrono::hours(1));

  void add_user(const UserId& user, std::string_view password, std::vector<Mode> scopes = {Mode::Read, Mode::Write});
  bool has_user(const UserId& user) const;
  // Throws Error(BadCredentials).
  AuthToken authenticate(const UserId& user, std::string_view credential) const;

  const TokenAuthority& authority() const { return authority_; }

 private:
  struct Credential {
    Bytes salt;
    Digest hash;
    std::vector<Mode> scopes;
  };

  const TokenAuthority& authority_;
  std::chrono::milliseconds ttl_;
  mutable std::mutex mu_;
  std::map<UserId, Credential> users_;
};

}  // namespace dynostore::management
