#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dynostore/client/crypto.hpp"
#include "dynostore/client/handle.hpp"
#include "dynostore/domain/error.hpp"
#include "dynostore/management/gateway.hpp"

namespace dynostore::net {
class ClientPool;
}

namespace dynostore::client {

struct ClientConfig {
  std::string gateway;
  // Bearer token; when empty, user/password are exchanged for one.
  std::string token;
  std::string user;
  std::string password;
  management::UploadMode mode = management::UploadMode::Regular;
  std::optional<std::uint16_t> n;
  std::optional<std::uint16_t> k;
  std::optional<double> target_loss;
  unsigned threads = 1;
  bool encrypt = false;
  std::optional<EncryptionKey> key;
  std::chrono::milliseconds timeout{120000};

  // threads >= 1 (InvalidParams); key present iff encryption is on
  // (EncryptionKeyMissing / InvalidParams).
  void validate() const;
};

template <class T>
struct Outcome {
  std::optional<T> value;
  std::optional<Error> error;

  bool ok() const { return value.has_value(); }
};

struct PushItem {
  ObjectPath path;
  Bytes data;
};

// Gateway client. Safe for concurrent use; every concurrent call borrows its
// own connection.
class Client {
 public:
  explicit Client(ClientConfig config);
  ~Client();

  ObjectDescriptor push(const ObjectPath& path, ByteView data);
  ObjectDescriptor push_file(const ObjectPath& path, const std::filesystem::path& file);
  Bytes pull(const ObjectPath& path, std::optional<std::uint32_t> version = std::nullopt);
  bool exists(const ObjectPath& path);
  void evict(const ObjectPath& path);

  // Spreads items over `threads` channels (config default when 0). Results
  // follow input order; failures are reported per item.
  std::vector<Outcome<ObjectDescriptor>> push_many(const std::vector<PushItem>& items, unsigned threads = 0);
  std::vector<Outcome<Bytes>> pull_many(const std::vector<ObjectPath>& paths, unsigned threads = 0);

  // Both return the new collection's id.
  Uuid create_namespace(const UserId& user);
  Uuid create_collection(const ObjectPath& path);
  ObjectPath collection_path(const Uuid& id);
  void grant(const Permission& permission);
  std::vector<ContainerState> containers();
  Uuid register_container(const std::string& endpoint);
  void deregister_container(const Uuid& id);
  std::vector<ObjectDescriptor> garbage_collect();

  const std::string& token();
  const ClientConfig& config() const { return config_; }

 private:
  std::string query() const;

  ClientConfig config_;
  std::unique_ptr<net::ClientPool> pool_;
  std::mutex token_mu_;
};

// CLI exit status for an error: 2 not found, 3 permission, 4 integrity,
// 5 availability, 1 anything else.
int exit_code_for(Errc code) noexcept;

}  // namespace dynostore::client
