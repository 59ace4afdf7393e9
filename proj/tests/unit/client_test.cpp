#include <gtest/gtest.h>

#include <fstream>

#include "dynostore/client/client.hpp"
#include "dynostore/client/crypto.hpp"
#include "dynostore/client/handle.hpp"
#include "dynostore/domain/bytes.hpp"
#include "test_support.hpp"

namespace dynostore::client {
namespace {

using testing::random_payload;
using testing::TempDir;

template <std::size_t N>
std::array<std::uint8_t, N> array_from_hex(std::string_view hex) {
  const auto bytes = from_hex(hex);
  std::array<std::uint8_t, N> out{};
  std::copy(bytes.begin(), bytes.end(), out.begin());
  return out;
}

// AES-256 CTR known-answer vector, cross-checked with an independent
// implementation.
TEST(Crypto, CounterModeKnownAnswer) {
  const auto key = array_from_hex<32>("603deb1015ca71be2b73aef0857d77811f352c073b6108d72d9810a30914dff4");
  const auto iv = array_from_hex<16>("f0f1f2f3f4f5f6f7f8f9fafbfcfdfeff");
  const auto plain = from_hex("6bc1bee22e409f96e93d7e117393172aae2d8a571e03ac9c9eb76fac45af8e51");
  const auto sealed = encrypt(plain, key, iv);
  ASSERT_EQ(sealed.size(), 16 + plain.size());
  EXPECT_EQ(to_hex(ByteView(sealed).subspan(0, 16)), "f0f1f2f3f4f5f6f7f8f9fafbfcfdfeff");
  EXPECT_EQ(to_hex(ByteView(sealed).subspan(16)),
            "601ec313775789a5b7a7f504bbf3d228f443e3ca4d62b59aca84e990cacaf5c5");
  EXPECT_EQ(decrypt(sealed, key), plain);
}

TEST(Crypto, RoundTripAndFreshIv) {
  EncryptionKey key{};
  key[0] = 1;
  for (std::size_t size : {0u, 1u, 15u, 16u, 17u, 100000u}) {
    const auto plain = random_payload(size, size);
    const auto a = encrypt(plain, key);
    const auto b = encrypt(plain, key);
    EXPECT_EQ(decrypt(a, key), plain);
    if (size > 0) EXPECT_NE(a, b);
  }
  EXPECT_ERRC(decrypt(Bytes(15), key), Errc::Truncated);
}

TEST(Crypto, WrongKeyIsDetectedThroughTheTag) {
  EncryptionKey right{}, wrong{};
  wrong[31] = 1;
  const auto plain = random_payload(1000, 1);
  const auto tag = encrypted_tag(plain);
  EXPECT_TRUE(is_encrypted_tag(tag));
  EXPECT_FALSE(is_encrypted_tag("plain"));
  const auto sealed = encrypt(plain, right);
  EXPECT_NO_THROW(verify_plaintext(tag, decrypt(sealed, right)));
  EXPECT_ERRC(verify_plaintext(tag, decrypt(sealed, wrong)), Errc::WrongKey);
}

TEST(Crypto, ChecksumIsSha3Prefix) {
  // Frozen from an independent SHA3-256 implementation.
  const std::string hello = "hello world";
  EXPECT_EQ(plaintext_checksum(ByteView(reinterpret_cast<const std::uint8_t*>(hello.data()), hello.size())),
            "644bcc7e56437304");
  EXPECT_EQ(encrypted_tag({}).rfind(kEncryptedTagPrefix, 0), 0u);
}

TEST(Crypto, KeyFilesHoldExactly32Bytes) {
  TempDir dir;
  const auto good = dir.path() / "good", short_file = dir.path() / "short";
  std::ofstream(good, std::ios::binary) << std::string(32, 'k');
  std::ofstream(short_file, std::ios::binary) << std::string(31, 'k');
  EXPECT_EQ(load_key_file(good)[5], 'k');
  EXPECT_ERRC(load_key_file(short_file), Errc::InvalidParams);
  EXPECT_ERRC(load_key_file(dir.path() / "missing"), Errc::EncryptionKeyMissing);
}

TEST(Handle, FormatsAndParses) {
  const ReferenceHandle h{ObjectPath::parse("/alice/c/o"), 3, "3a985da7"};
  EXPECT_EQ(h.str(), "dyn:///alice/c/o@3#3a985da7");
  EXPECT_EQ(ReferenceHandle::parse(h.str()), h);
}

TEST(Handle, RejectsMalformedInput) {
  for (const char* bad : {"", "dyn://", "http:///a/b@1#3a985da7", "dyn:///a/b#3a985da7", "dyn:///a/b@x#3a985da7",
                          "dyn:///a/b@1#3a98", "dyn:///a/b@1#zzzzzzzz", "dyn:///a/b@#3a985da7"}) {
    EXPECT_ERRC(ReferenceHandle::parse(bad), Errc::BadRequest) << bad;
  }
}

TEST(Handle, ChecksumSourceFollowsEncryption) {
  ObjectDescriptor d;
  d.path = ObjectPath::parse("/a/b/c");
  d.version = 2;
  d.object_hash[0] = 0xab;
  d.object_hash[3] = 0x01;
  EXPECT_EQ(make_handle(d).hash_prefix, "ab000001");
  d.client_tag = std::string(kEncryptedTagPrefix) + "0123456789abcdef";
  EXPECT_EQ(make_handle(d).hash_prefix, "01234567");
  EXPECT_EQ(make_handle(d).str(), "dyn:///a/b/c@2#01234567");
}

TEST(ClientConfig, Validation) {
  ClientConfig c;
  c.gateway = "http://127.0.0.1:1";
  EXPECT_NO_THROW(c.validate());
  c.threads = 0;
  EXPECT_ERRC(c.validate(), Errc::InvalidParams);
  c.threads = 4;
  c.encrypt = true;
  EXPECT_ERRC(c.validate(), Errc::EncryptionKeyMissing);
  c.key = EncryptionKey{};
  EXPECT_NO_THROW(c.validate());
  c.encrypt = false;
  EXPECT_ERRC(c.validate(), Errc::InvalidParams);
  c.key.reset();
  c.gateway.clear();
  EXPECT_ERRC(c.validate(), Errc::InvalidParams);
}

TEST(ClientConfig, UnreachableGatewayIsAnAvailabilityError) {
  ClientConfig c;
  c.gateway = "http://127.0.0.1:1";
  c.token = "t";
  c.timeout = std::chrono::milliseconds(500);
  Client client(c);
  try {
    client.exists(ObjectPath::parse("/a/b/c"));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(exit_code_for(e.code()), 5) << e.what();
  }
}

TEST(ExitCodes, Categories) {
  EXPECT_EQ(exit_code_for(Errc::NotFound), 2);
  EXPECT_EQ(exit_code_for(Errc::VersionExpired), 2);
  EXPECT_EQ(exit_code_for(Errc::PermissionDenied), 3);
  EXPECT_EQ(exit_code_for(Errc::Unauthorized), 3);
  EXPECT_EQ(exit_code_for(Errc::HashMismatch), 4);
  EXPECT_EQ(exit_code_for(Errc::WrongKey), 4);
  EXPECT_EQ(exit_code_for(Errc::NotEnoughChunks), 5);
  EXPECT_EQ(exit_code_for(Errc::ConsensusFailed), 5);
  EXPECT_EQ(exit_code_for(Errc::InvalidParams), 1);
}

}  // namespace
}  // namespace dynostore::client
