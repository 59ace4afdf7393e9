#pragma once

#include <cstdint>
#include <filesystem>
#include <gtest/gtest.h>
#include <random>
#include <string>
#include <vector>

#include "dynostore/domain/bytes.hpp"
#include "dynostore/domain/error.hpp"
#include "dynostore/placement/scenario.hpp"

namespace dynostore::testing {

inline Bytes random_payload(std::size_t size, std::mt19937_64& rng) {
  Bytes out(size);
  for (auto& b : out) b = static_cast<std::uint8_t>(rng());
  return out;
}

inline Bytes random_payload(std::size_t size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return random_payload(size, rng);
}

template <class Fn>
::testing::AssertionResult throws_errc(Fn&& fn, Errc want, const char* text) {
  try {
    fn();
  } catch (const Error& e) {
    if (e.code() == want) return ::testing::AssertionSuccess();
    return ::testing::AssertionFailure() << text << " threw " << errc_name(e.code()) << " (" << e.what()
                                         << "), expected " << errc_name(want);
  }
  return ::testing::AssertionFailure() << text << " did not throw";
}

// Fresh directory removed on scope exit.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("dynostore-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::vector<placement::ContainerSpec> equal_specs(std::size_t count, std::uint64_t fs_total = 1ULL << 30,
                                                         std::uint64_t mem_total = 1ULL << 30) {
  std::vector<placement::ContainerSpec> out;
  for (std::size_t i = 0; i < count; ++i) {
    placement::ContainerSpec s;
    s.name = "dc" + std::to_string(i);
    s.fs_total = fs_total;
    s.mem_total = mem_total;
    out.push_back(s);
  }
  return out;
}

}  // namespace dynostore::testing

// Asserts that `stmt` throws dynostore::Error with code `errc`; accepts a
// streamed message.
#define EXPECT_ERRC(stmt, errc) EXPECT_TRUE(::dynostore::testing::throws_errc([&] { stmt; }, errc, #stmt))
