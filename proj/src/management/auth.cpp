#include "dynostore/management/auth.hpp"

#include <openssl/crypto.h>
#include <openssl/hmac.h>
#include <openssl/rand.h>

#include <algorithm>
#include <charconv>

#include "dynostore/domain/error.hpp"
#include "dynostore/erasure/digest.hpp"

namespace dynostore::management {

namespace {

char scope_char(Mode m) {
  switch (m) {
    case Mode::Read: return 'r';
    case Mode::Write: return 'w';
    case Mode::Admin: return 'a';
  }
  return 'r';
}

std::vector<std::string_view> split_dots(std::string_view s) {
  std::vector<std::string_view> parts;
  while (true) {
    auto dot = s.find('.');
    parts.push_back(s.substr(0, dot));
    if (dot == std::string_view::npos) break;
    s.remove_prefix(dot + 1);
  }
  return parts;
}

Digest salted_hash(ByteView salt, std::string_view password) {
  erasure::Sha3Hasher h;
  h.update(salt);
  h.update(as_bytes(password));
  return h.finish();
}

}  // namespace

bool AuthToken::has_scope(Mode mode) const {
  return std::find(scopes.begin(), scopes.end(), mode) != scopes.end();
}

std::string AuthToken::signed_part() const {
  std::string s = to_hex(as_bytes(subject)) + "." + std::to_string(expiry) + ".";
  for (auto m : scopes) s.push_back(scope_char(m));
  return s;
}

std::string AuthToken::encode() const { return signed_part() + "." + to_hex(signature); }

TokenAuthority::TokenAuthority(Bytes secret, const Clock& clock) : secret_(std::move(secret)), clock_(clock) {
  if (secret_.empty()) throw Error(Errc::InvalidParams, "token secret must not be empty");
}

std::array<std::uint8_t, 32> TokenAuthority::sign(std::string_view data) const {
  std::array<std::uint8_t, 32> mac{};
  unsigned int len = 0;
  HMAC(EVP_sha256(), secret_.data(), static_cast<int>(secret_.size()),
       reinterpret_cast<const unsigned char*>(data.data()), data.size(), mac.data(), &len);
  return mac;
}

AuthToken TokenAuthority::issue(const UserId& subject, std::vector<Mode> scopes, std::chrono::milliseconds ttl) const {
  AuthToken t;
  t.subject = subject;
  t.expiry = clock_.now_ms() + ttl.count();
  std::sort(scopes.begin(), scopes.end());
  scopes.erase(std::unique(scopes.begin(), scopes.end()), scopes.end());
  t.scopes = std::move(scopes);
  t.signature = sign(t.signed_part());
  return t;
}

AuthToken TokenAuthority::verify(std::string_view encoded) const {
  auto parts = split_dots(encoded);
  if (parts.size() != 4) throw Error(Errc::Unauthorized, "malformed token");
  AuthToken t;
  try {
    auto subject = from_hex(parts[0]);
    t.subject.assign(subject.begin(), subject.end());
    auto sig = from_hex(parts[3]);
    if (sig.size() != 32) throw Error(Errc::Unauthorized, "malformed token signature");
    std::copy(sig.begin(), sig.end(), t.signature.begin());
  } catch (const Error&) {
    throw Error(Errc::Unauthorized, "malformed token");
  }
  auto [ptr, ec] = std::from_chars(parts[1].data(), parts[1].data() + parts[1].size(), t.expiry);
  if (ec != std::errc{} || ptr != parts[1].data() + parts[1].size()) throw Error(Errc::Unauthorized, "malformed token");
  for (char c : parts[2]) {
    if (c == 'r') t.scopes.push_back(Mode::Read);
    else if (c == 'w') t.scopes.push_back(Mode::Write);
    else if (c == 'a') t.scopes.push_back(Mode::Admin);
    else throw Error(Errc::Unauthorized, "malformed token scopes");
  }
  auto expected = sign(encoded.substr(0, encoded.rfind('.')));
  if (CRYPTO_memcmp(expected.data(), t.signature.data(), expected.size()) != 0) {
    throw Error(Errc::Unauthorized, "token signature mismatch");
  }
  if (clock_.now_ms() >= t.expiry) throw Error(Errc::Unauthorized, "token expired");
  return t;
}

AuthToken TokenAuthority::require(std::string_view encoded, Mode scope) const {
  auto t = verify(encoded);
  if (!t.has_scope(scope)) {
    throw Error(Errc::Unauthorized, "token lacks " + std::string(mode_name(scope)) + " scope");
  }
  return t;
}

AuthService::AuthService(const TokenAuthority& authority, std::chrono::milliseconds ttl)
    : authority_(authority), ttl_(ttl) {}

void AuthService::add_user(const UserId& user, std::string_view password, std::vector<Mode> scopes) {
  Credential c;
  c.salt.resize(16);
  RAND_bytes(c.salt.data(), static_cast<int>(c.salt.size()));
  c.hash = salted_hash(c.salt, password);
  c.scopes = std::move(scopes);
  std::lock_guard lock(mu_);
  users_[user] = std::move(c);
}

bool AuthService::has_user(const UserId& user) const {
  std::lock_guard lock(mu_);
  return users_.count(user) != 0;
}

AuthToken AuthService::authenticate(const UserId& user, std::string_view credential) const {
  Credential c;
  {
    std::lock_guard lock(mu_);
    auto it = users_.find(user);
    if (it == users_.end()) throw Error(Errc::BadCredentials, "unknown user or wrong password");
    c = it->second;
  }
  auto h = salted_hash(c.salt, credential);
  if (CRYPTO_memcmp(h.data(), c.hash.data(), h.size()) != 0) {
    throw Error(Errc::BadCredentials, "unknown user or wrong password");
  }
  return authority_.issue(user, c.scopes, ttl_);
}

}  // namespace dynostore::management
