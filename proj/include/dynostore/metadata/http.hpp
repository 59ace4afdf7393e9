#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "dynostore/metadata/service.hpp"

namespace dynostore::net {
class HttpServer;
class ClientPool;
}  // namespace dynostore::net

namespace dynostore::metadata {

// One metadata node: a replica plus a coordinator over the whole replica set.
//
// Public routes (bearer user token):
//   POST   /namespaces           {"user"}            -> {"id"}
//   POST   /collections          {"path"}            -> {"id"}
//   GET    /collections?id=                          -> {"path"}
//   POST   /objects              {"path","descriptor"} -> descriptor
//   GET    /objects?path=&version=                    -> descriptor
//   GET    /objects/history?path=                     -> [version entries]
//   DELETE /objects?path=                             -> [descriptors]
//   POST   /permissions          Permission
//   GET    /permissions/check?path=&user=&mode=       -> {"allowed"}
//   POST   /retention            {"path","days"}
//   POST   /gc                   {"now"}              -> [descriptors]
//   GET    /list?prefix=                              -> [descriptors]
// Replica routes (admin token): POST /internal/{propose,commit,abort,read,
// scan,log,absorb}, GET /internal/log?since=.
class MetadataServer {
 public:
  MetadataServer(MetadataService& service, std::shared_ptr<Replica> replica,
                 const management::TokenAuthority& auth, std::string host = "127.0.0.1", int port = 0);
  ~MetadataServer();

  // Runs `anti_entropy` every `interval` on a background thread until stop().
  void enable_anti_entropy(std::shared_ptr<AntiEntropy> anti_entropy, std::chrono::milliseconds interval);

  void start();
  void stop();
  std::string endpoint() const;

 private:
  MetadataService& service_;
  std::shared_ptr<Replica> replica_;
  const management::TokenAuthority& auth_;
  std::unique_ptr<net::HttpServer> server_;

  std::shared_ptr<AntiEntropy> anti_entropy_;
  std::chrono::milliseconds interval_{1000};
  std::thread sync_thread_;
  std::mutex mu_;
  std::condition_variable cv_;
  bool stopping_ = false;
};

// MetadataApi over HTTP. Endpoints are tried in order; a node that cannot be
// reached is skipped.
class MetadataClient final : public MetadataApi {
 public:
  explicit MetadataClient(std::vector<std::string> endpoints);
  ~MetadataClient() override;

  Uuid create_namespace(const UserId& user, const std::string& token) override;
  Uuid create_collection(const ObjectPath& path, const std::string& token) override;
  ObjectPath collection_path(const Uuid& id, const std::string& token) override;
  ObjectDescriptor register_object(const ObjectPath& path, ObjectDescriptor descriptor,
                                   const std::string& token) override;
  ObjectDescriptor resolve(const ObjectPath& path, std::optional<std::uint32_t> version,
                           const std::string& token) override;
  std::vector<VersionEntry> history(const ObjectPath& path, const std::string& token) override;
  void grant(const Permission& permission, const std::string& token) override;
  bool check(const ObjectPath& path, const UserId& user, Mode mode, const std::string& token) override;
  std::vector<ObjectDescriptor> evict(const ObjectPath& path, const std::string& token) override;
  void set_retention(const ObjectPath& path, std::uint32_t days, const std::string& token) override;
  std::vector<ObjectDescriptor> garbage_collect(std::int64_t now_ms, const std::string& token) override;
  std::vector<ObjectDescriptor> list(const ObjectPath& prefix, const std::string& token) override;

 private:
  enum class Method { Get, Post, Delete };
  Json call(Method method, const std::string& route, const std::string& token, const Json& body = nullptr);

  std::vector<std::unique_ptr<net::ClientPool>> pools_;
  std::atomic<std::size_t> preferred_{0};
};

}  // namespace dynostore::metadata
