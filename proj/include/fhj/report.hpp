#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace fhj {

// Shortest round-trip decimal representation (std::to_chars), so CSV output
// is lossless and byte-identical across reruns.
std::string format_double(double x);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  void add_row(const std::vector<std::string>& cells);
  void add_row_values(const std::vector<double>& cells);
  std::string str() const;
  void write(const std::filesystem::path& path) const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

struct RunReport {
  std::string subcommand;
  nlohmann::json config_echo;
  uint64_t seed = 0;
  double wall_clock_seconds = 0.0;
  std::vector<std::string> warnings;
  std::vector<std::string> outputs;  // paths of CSVs written by the run
  std::string version;

  nlohmann::json to_json() const;
  void write(const std::filesystem::path& path) const;
};

std::string build_version();

}  // namespace fhj
