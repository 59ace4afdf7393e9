#include "dynostore/container/backend.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <random>

#include "dynostore/domain/error.hpp"

namespace dynostore::container {

namespace fs = std::filesystem;

namespace {

void check_id(const std::string& id) {
  if (id.empty() || id.front() == '.' || id.find('/') != std::string::npos || id.find('\0') != std::string::npos) {
    throw Error(Errc::BadRequest, "invalid chunk id '" + id + "'");
  }
}

void write_file(const fs::path& path, ByteView bytes, bool sync) {
  int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw Error(Errc::BackendFailure, "open " + path.string() + ": " + std::strerror(errno));
  std::size_t done = 0;
  while (done < bytes.size()) {
    ssize_t n = ::write(fd, bytes.data() + done, bytes.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      int err = errno;
      ::close(fd);
      throw Error(err == ENOSPC ? Errc::OutOfSpace : Errc::BackendFailure,
                  "write " + path.string() + ": " + std::strerror(err));
    }
    done += static_cast<std::size_t>(n);
  }
  if (sync && ::fsync(fd) != 0) {
    int err = errno;
    ::close(fd);
    throw Error(Errc::BackendFailure, "fsync " + path.string() + ": " + std::strerror(err));
  }
  ::close(fd);
}

}  // namespace

FileBackend::FileBackend(fs::path dir, std::uint64_t capacity_bytes, bool sync_writes)
    : dir_(std::move(dir)), capacity_(capacity_bytes), sync_(sync_writes) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw Error(Errc::BackendFailure, "cannot create " + dir_.string() + ": " + ec.message());
  std::uint64_t used = 0;
  for (const auto& entry : fs::directory_iterator(dir_)) {
    if (!entry.is_regular_file()) continue;
    auto name = entry.path().filename().string();
    if (name.front() == '.') {
      // Leftover temp file from an interrupted write.
      fs::remove(entry.path(), ec);
      continue;
    }
    auto size = entry.file_size();
    sizes_[name] = size;
    used += size;
  }
  used_ = used;
  count_ = sizes_.size();
}

fs::path FileBackend::file_for(const std::string& chunk_id) const { return dir_ / chunk_id; }

void FileBackend::write(const std::string& chunk_id, ByteView bytes) {
  check_id(chunk_id);
  std::uint64_t previous = 0;
  {
    std::lock_guard lock(mu_);
    auto it = sizes_.find(chunk_id);
    previous = it == sizes_.end() ? 0 : it->second;
    const std::uint64_t used = used_.load();
    if (used - previous + bytes.size() > capacity_) {
      throw Error(Errc::OutOfSpace, "chunk of " + std::to_string(bytes.size()) + " bytes exceeds free space");
    }
    // Reserve the space before the (unlocked) file write.
    used_ = used + bytes.size();
  }
  thread_local std::mt19937_64 rng{std::random_device{}()};
  fs::path tmp = dir_ / ("." + chunk_id + ".tmp" + std::to_string(rng()));
  try {
    write_file(tmp, bytes, sync_);
    std::error_code ec;
    fs::rename(tmp, file_for(chunk_id), ec);
    if (ec) throw Error(Errc::BackendFailure, "rename: " + ec.message());
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    used_ -= bytes.size();
    throw;
  }
  std::lock_guard lock(mu_);
  auto [it, inserted] = sizes_.insert_or_assign(chunk_id, bytes.size());
  (void)it;
  if (inserted) {
    ++count_;
  } else {
    used_ -= previous;
  }
}

std::optional<Bytes> FileBackend::read(const std::string& chunk_id) const {
  check_id(chunk_id);
  std::ifstream in(file_for(chunk_id), std::ios::binary);
  if (!in) return std::nullopt;
  Bytes out((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return out;
}

bool FileBackend::remove(const std::string& chunk_id) {
  check_id(chunk_id);
  std::lock_guard lock(mu_);
  auto it = sizes_.find(chunk_id);
  if (it == sizes_.end()) return false;
  std::error_code ec;
  fs::remove(file_for(chunk_id), ec);
  if (ec) throw Error(Errc::BackendFailure, "remove " + chunk_id + ": " + ec.message());
  used_ -= it->second;
  --count_;
  sizes_.erase(it);
  return true;
}

bool FileBackend::exists(const std::string& chunk_id) const {
  check_id(chunk_id);
  std::lock_guard lock(mu_);
  return sizes_.count(chunk_id) != 0;
}

BackendStats FileBackend::stats() const {
  const std::uint64_t used = used_.load();
  return {capacity_, used > capacity_ ? 0 : capacity_ - used, count_.load()};
}

std::vector<std::string> FileBackend::list() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  out.reserve(sizes_.size());
  for (const auto& [id, size] : sizes_) out.push_back(id);
  return out;
}

MemoryBackend::MemoryBackend(std::uint64_t capacity_bytes) : capacity_(capacity_bytes) {}

void MemoryBackend::write(const std::string& chunk_id, ByteView bytes) {
  check_id(chunk_id);
  std::lock_guard lock(mu_);
  auto it = chunks_.find(chunk_id);
  std::uint64_t previous = it == chunks_.end() ? 0 : it->second.size();
  if (used_ - previous + bytes.size() > capacity_) {
    throw Error(Errc::OutOfSpace, "chunk of " + std::to_string(bytes.size()) + " bytes exceeds free space");
  }
  used_ = used_ - previous + bytes.size();
  chunks_[chunk_id] = Bytes(bytes.begin(), bytes.end());
}

std::optional<Bytes> MemoryBackend::read(const std::string& chunk_id) const {
  std::lock_guard lock(mu_);
  auto it = chunks_.find(chunk_id);
  if (it == chunks_.end()) return std::nullopt;
  return it->second;
}

bool MemoryBackend::remove(const std::string& chunk_id) {
  std::lock_guard lock(mu_);
  auto it = chunks_.find(chunk_id);
  if (it == chunks_.end()) return false;
  used_ -= it->second.size();
  chunks_.erase(it);
  return true;
}

bool MemoryBackend::exists(const std::string& chunk_id) const {
  std::lock_guard lock(mu_);
  return chunks_.count(chunk_id) != 0;
}

BackendStats MemoryBackend::stats() const {
  std::lock_guard lock(mu_);
  return {capacity_, capacity_ - used_, chunks_.size()};
}

std::vector<std::string> MemoryBackend::list() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, bytes] : chunks_) out.push_back(id);
  return out;
}

}  // namespace dynostore::container
