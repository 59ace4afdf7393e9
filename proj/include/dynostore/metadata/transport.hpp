#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "dynostore/metadata/replica.hpp"

namespace dynostore::net {
class ClientPool;
}

namespace dynostore::metadata {

// Coordinator-side handle on one replica. Every call throws
// Error(Unavailable) when the replica cannot be reached.
class ReplicaTransport {
 public:
  virtual ~ReplicaTransport() = default;

  virtual const std::string& name() const = 0;
  // False when calls complete without blocking on I/O.
  virtual bool remote() const = 0;

  virtual Vote propose(const Proposal& p) = 0;
  virtual CommitResult commit(const Proposal& p) = 0;
  virtual void abort(const Proposal& p) = 0;
  virtual std::map<std::string, KeyState> read(const std::vector<std::string>& keys) = 0;
  virtual std::map<std::string, KeyState> scan(const std::string& prefix) = 0;
  virtual std::vector<LogEntry> log_since(std::uint64_t after) = 0;
  virtual std::vector<LogEntry> log_for_key(const std::string& key) = 0;
  virtual std::size_t absorb(const std::vector<LogEntry>& entries) = 0;
};

// Direct calls into an in-process replica, with a switch that makes it
// unreachable.
class LocalTransport final : public ReplicaTransport {
 public:
  explicit LocalTransport(std::shared_ptr<Replica> replica) : replica_(std::move(replica)) {}

  void set_down(bool down) { down_ = down; }
  bool down() const { return down_; }
  Replica& replica() { return *replica_; }

  const std::string& name() const override { return replica_->name(); }
  bool remote() const override { return false; }
  Vote propose(const Proposal& p) override;
  CommitResult commit(const Proposal& p) override;
  void abort(const Proposal& p) override;
  std::map<std::string, KeyState> read(const std::vector<std::string>& keys) override;
  std::map<std::string, KeyState> scan(const std::string& prefix) override;
  std::vector<LogEntry> log_since(std::uint64_t after) override;
  std::vector<LogEntry> log_for_key(const std::string& key) override;
  std::size_t absorb(const std::vector<LogEntry>& entries) override;

 private:
  Replica& reachable();

  std::shared_ptr<Replica> replica_;
  std::atomic<bool> down_{false};
};

// Replica behind a metadata server's /internal routes.
class HttpReplicaTransport final : public ReplicaTransport {
 public:
  HttpReplicaTransport(std::string endpoint, std::string service_token);
  ~HttpReplicaTransport() override;

  const std::string& name() const override { return endpoint_; }
  bool remote() const override { return true; }
  Vote propose(const Proposal& p) override;
  CommitResult commit(const Proposal& p) override;
  void abort(const Proposal& p) override;
  std::map<std::string, KeyState> read(const std::vector<std::string>& keys) override;
  std::map<std::string, KeyState> scan(const std::string& prefix) override;
  std::vector<LogEntry> log_since(std::uint64_t after) override;
  std::vector<LogEntry> log_for_key(const std::string& key) override;
  std::size_t absorb(const std::vector<LogEntry>& entries) override;

 private:
  Json post(const std::string& route, const Json& body);
  Json get(const std::string& route);

  std::string endpoint_;
  std::string token_;
  std::unique_ptr<net::ClientPool> pool_;
};

// Pulls committed entries from peers into a local replica. Each peer log is
// complete for every key it holds, so absorbing it in order never gaps.
class AntiEntropy {
 public:
  AntiEntropy(std::shared_ptr<Replica> local, std::vector<std::shared_ptr<ReplicaTransport>> peers)
      : local_(std::move(local)), peers_(std::move(peers)), cursors_(peers_.size(), 0) {}

  // Returns the number of entries newly applied; unreachable peers are skipped.
  std::size_t run_once();

 private:
  std::shared_ptr<Replica> local_;
  std::vector<std::shared_ptr<ReplicaTransport>> peers_;
  std::vector<std::uint64_t> cursors_;
  std::mutex mu_;
};

}  // namespace dynostore::metadata
