#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dynostore/domain/json.hpp"

namespace dynostore::harness {

// Aligned-column text table; numeric-looking cells are right-aligned.
class TextTable {
 public:
  explicit TextTable(std::vector<std::string> headers);

  void add_row(std::vector<std::string> cells);
  std::string render() const;

 private:
  std::vector<std::string> headers_;
  std::vector<std::vector<std::string>> rows_;
};

std::string fixed(double value, int precision);
std::string percent(double fraction, int precision = 2);

// Pretty-printed JSON with a trailing newline; byte-identical for equal input.
void write_json_report(const std::filesystem::path& file, const Json& report);

}  // namespace dynostore::harness
