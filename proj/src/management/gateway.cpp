#include "dynostore/management/gateway.hpp"

#include <algorithm>
#include <atomic>
#include <future>
#include <thread>

#include "dynostore/domain/error.hpp"
#include "dynostore/placement/planner.hpp"

namespace dynostore::management {

namespace {

constexpr auto kServiceTokenTtl = std::chrono::hours(1);
constexpr std::int64_t kServiceTokenSlackMs = 5 * 60 * 1000;

bool header_matches(const erasure::ChunkPackage& p, const ObjectDescriptor& d, std::uint16_t index) {
  return p.object_uuid == d.object_uuid && p.chunk_index == index && p.n == d.n && p.k == d.k &&
         p.object_hash == d.object_hash;
}

Gateway::PendingDelete chunk_record(const ObjectDescriptor& d, const ChunkLocation& loc) {
  const std::int64_t payload = static_cast<std::int64_t>((d.size_bytes + d.k - 1) / d.k);
  return {loc.container, ChunkKey{d.object_uuid, loc.index}, static_cast<std::int64_t>(erasure::kChunkHeaderSize) + payload};
}

}  // namespace

std::string_view upload_mode_name(UploadMode mode) noexcept {
  return mode == UploadMode::Regular ? "regular" : "resilient";
}

UploadMode parse_upload_mode(std::string_view text) {
  if (text == "regular") return UploadMode::Regular;
  if (text == "resilient") return UploadMode::Resilient;
  throw Error(Errc::InvalidParams, "unknown upload mode '" + std::string(text) + "'");
}

Gateway::Gateway(Registry& registry, metadata::MetadataApi& metadata, const TokenAuthority& authority,
                 const Clock& clock, Options options)
    : registry_(registry), metadata_(metadata), authority_(authority), clock_(clock), options_(options) {
  options_.weights.validate();
}

std::string Gateway::service_token() {
  std::lock_guard lock(token_mu_);
  if (!service_token_ || service_token_->expiry - clock_.now_ms() < kServiceTokenSlackMs) {
    service_token_ = authority_.issue("gateway", {Mode::Read, Mode::Write, Mode::Admin}, kServiceTokenTtl);
  }
  return service_token_->encode();
}

ObjectDescriptor Gateway::upload(const ObjectPath& path, ByteView object, const UploadOptions& options,
                                 const std::string& token) {
  const auto caller = authority_.verify(token);
  if (!caller.has_scope(Mode::Write)) throw Error(Errc::PermissionDenied, caller.subject + " has no write scope");
  if (!caller.has_scope(Mode::Admin) && !metadata_.check(path, caller.subject, Mode::Write, token)) {
    throw Error(Errc::PermissionDenied, caller.subject + " cannot write " + path.str());
  }

  const auto states = registry_.placeable();
  erasure::ResilienceParams params;
  std::vector<Uuid> targets;
  if (options.mode == UploadMode::Regular) {
    try {
      targets = {placement::select_container(states, object.size(), options_.weights)};
    } catch (const Error& e) {
      if (e.code() != Errc::NoFeasibleContainer) throw;
      throw Error(Errc::NotEnoughContainers, e.what());
    }
  } else if (options.n || options.k) {
    if (!options.n || !options.k) throw Error(Errc::InvalidParams, "resilient mode needs both n and k");
    params = {*options.n, *options.k};
    params.validate();
    targets = placement::select_n_containers(states, params.n, object.size(), options_.weights, params.k);
  } else {
    auto plan = placement::plan_resilience(states, object.size(),
                                           options.target_loss.value_or(options_.default_target_loss),
                                           options_.weights);
    params = plan.params;
    targets = std::move(plan.targets);
  }

  const auto object_uuid = Uuid::random();
  auto chunks = erasure::encode(object, object_uuid, params, targets);
  const auto svc = service_token();

  // Dispatch every chunk concurrently; remember which landed.
  std::vector<PendingDelete> written;
  std::vector<PendingDelete> failed;
  std::string first_error;
  std::mutex mu;
  std::vector<std::future<void>> puts;
  for (const auto& chunk : chunks) {
    puts.push_back(std::async(std::launch::async, [&, &chunk = chunk] {
      const auto bytes = erasure::pack(chunk.package);
      PendingDelete record{chunk.target, ChunkKey{object_uuid, chunk.package.chunk_index},
                           static_cast<std::int64_t>(bytes.size())};
      try {
        registry_.store(chunk.target)->put_chunk(record.key, bytes, svc);
        std::lock_guard lock(mu);
        written.push_back(record);
      } catch (const std::exception& e) {
        std::lock_guard lock(mu);
        failed.push_back(record);
        if (first_error.empty()) first_error = e.what();
      }
    }));
  }
  for (auto& f : puts) f.get();
  for (const auto& w : written) registry_.charge(w.container, w.bytes, w.bytes);

  if (!failed.empty()) {
    // A failed target may still have persisted the chunk; clean it up too.
    written.insert(written.end(), failed.begin(), failed.end());
    delete_chunks(written);
    throw Error(Errc::ContainerWriteFailed, "chunk write failed: " + first_error);
  }

  ObjectDescriptor d;
  d.object_uuid = object_uuid;
  d.path = path;
  d.size_bytes = object.size();
  d.object_hash = chunks.front().package.object_hash;
  d.n = params.n;
  d.k = params.k;
  for (const auto& c : chunks) d.chunk_locations.push_back(ChunkLocation{c.package.chunk_index, c.target});
  d.owner = caller.subject;
  d.created_at = clock_.now_ms();
  d.client_tag = options.client_tag;
  try {
    return metadata_.register_object(path, d, token);
  } catch (...) {
    delete_chunks(written);
    throw;
  }
}

std::vector<erasure::ChunkPackage> Gateway::fetch(const ObjectDescriptor& d, std::vector<ChunkLocation>& queue,
                                                  std::size_t want, DownloadStats& stats) {
  std::vector<erasure::ChunkPackage> good;
  if (queue.empty() || want == 0) return good;
  const auto svc = service_token();
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      {
        std::lock_guard lock(mu);
        if (good.size() >= want) return;
      }
      const std::size_t i = next++;
      if (i >= queue.size()) return;
      const auto loc = queue[i];
      try {
        auto bytes = registry_.store(loc.container)->get_chunk(ChunkKey{d.object_uuid, loc.index}, svc);
        std::optional<erasure::ChunkPackage> package;
        try {
          package = erasure::unpack(bytes);
        } catch (const Error&) {
        }
        std::lock_guard lock(mu);
        ++stats.fetched;
        if (package && header_matches(*package, d, loc.index)) {
          good.push_back(std::move(*package));
        } else {
          ++stats.integrity_failures;
        }
      } catch (const std::exception&) {
        std::lock_guard lock(mu);
        ++stats.fetch_failures;
      }
    }
  };
  const std::size_t width = std::min<std::size_t>(static_cast<std::size_t>(d.k) + 2, queue.size());
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < width; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  const std::size_t consumed = std::min(next.load(), queue.size());
  queue.erase(queue.begin(), queue.begin() + static_cast<std::ptrdiff_t>(consumed));
  return good;
}

ObjectDescriptor Gateway::describe(const ObjectPath& path, std::optional<std::uint32_t> version,
                                   const std::string& token) {
  authority_.verify(token);
  return metadata_.resolve(path, version, token);
}

Bytes Gateway::download(const ObjectPath& path, std::optional<std::uint32_t> version, const std::string& token,
                        DownloadStats* stats_out, ObjectDescriptor* resolved) {
  const auto d = describe(path, version, token);
  if (resolved) *resolved = d;
  DownloadStats stats;

  // Healthy containers first, data chunks before parity.
  std::vector<ChunkLocation> queue = d.chunk_locations;
  std::stable_sort(queue.begin(), queue.end(), [&](const ChunkLocation& a, const ChunkLocation& b) {
    const bool ha = registry_.healthy(a.container);
    const bool hb = registry_.healthy(b.container);
    if (ha != hb) return ha;
    return a.index < b.index;
  });

  auto chunks = fetch(d, queue, d.k, stats);
  std::optional<Error> last;
  while (chunks.size() >= d.k) {
    try {
      auto bytes = erasure::decode_any_subset(chunks, d.k);
      if (stats_out) *stats_out = stats;
      return bytes;
    } catch (const Error& e) {
      if (e.code() != Errc::HashMismatch && e.code() != Errc::InconsistentHeaders) throw;
      last = e;
    }
    if (queue.empty()) break;
    // Some fetched chunk is bad: widen the candidate set and retry.
    auto more = fetch(d, queue, queue.size(), stats);
    chunks.insert(chunks.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
  }
  if (stats_out) *stats_out = stats;
  if (last || stats.integrity_failures > 0) {
    throw Error(Errc::HashMismatch, "The hashes are different.");
  }
  throw Error(Errc::NotEnoughChunks, "Not enough chunks.");
}

bool Gateway::exists(const ObjectPath& path, const std::string& token) {
  try {
    describe(path, std::nullopt, token);
    return true;
  } catch (const Error& e) {
    if (e.code() == Errc::NotFound) return false;
    throw;
  }
}

void Gateway::evict(const ObjectPath& path, const std::string& token) {
  authority_.verify(token);
  std::vector<PendingDelete> chunks;
  for (const auto& d : metadata_.evict(path, token)) {
    for (const auto& loc : d.chunk_locations) chunks.push_back(chunk_record(d, loc));
  }
  delete_chunks(chunks);
}

std::vector<ObjectDescriptor> Gateway::garbage_collect(const std::string& token) {
  authority_.require(token, Mode::Admin);
  auto purged = metadata_.garbage_collect(clock_.now_ms(), token);
  std::vector<PendingDelete> chunks;
  for (const auto& d : purged) {
    for (const auto& loc : d.chunk_locations) chunks.push_back(chunk_record(d, loc));
  }
  delete_chunks(chunks);
  return purged;
}

void Gateway::delete_chunks(const std::vector<PendingDelete>& chunks) {
  if (chunks.empty()) return;
  const auto svc = service_token();
  std::vector<PendingDelete> unreachable;
  for (const auto& c : chunks) {
    try {
      registry_.store(c.container)->delete_chunk(c.key, svc);
      if (c.bytes > 0) registry_.charge(c.container, -c.bytes, -c.bytes);
    } catch (const std::exception&) {
      unreachable.push_back(c);
    }
  }
  std::lock_guard lock(pending_mu_);
  pending_.insert(pending_.end(), unreachable.begin(), unreachable.end());
}

std::size_t Gateway::flush_pending_deletes() {
  std::vector<PendingDelete> batch;
  {
    std::lock_guard lock(pending_mu_);
    batch.swap(pending_);
  }
  delete_chunks(batch);
  return pending_deletes();
}

std::size_t Gateway::pending_deletes() const {
  std::lock_guard lock(pending_mu_);
  return pending_.size();
}

Uuid Gateway::register_container(const ContainerState& state, std::shared_ptr<container::ChunkStore> store,
                                 const std::string& token) {
  authority_.require(token, Mode::Admin);
  registry_.add(state, std::move(store), clock_.now_ms());
  return state.container_id;
}

void Gateway::deregister_container(const Uuid& id, const std::string& token) {
  authority_.require(token, Mode::Admin);
  registry_.remove(id);
}

std::vector<ContainerState> Gateway::containers(const std::string& token) const {
  authority_.verify(token);
  return registry_.snapshot();
}

}  // namespace dynostore::management
