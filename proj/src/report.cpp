#include "fhj/report.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

namespace fhj {

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::vector<std::string> header)
    : header_(std::move(header)) {}

void CsvWriter::add_row(const std::vector<std::string>& cells) {
  if (cells.size() != header_.size())
    throw std::invalid_argument("csv row width does not match header");
  rows_.push_back(cells);
}

void CsvWriter::add_row_values(const std::vector<double>& cells) {
  std::vector<std::string> out;
  out.reserve(cells.size());
  for (double c : cells) out.push_back(format_double(c));
  add_row(out);
}

std::string CsvWriter::str() const {
  std::string out;
  auto append_row = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += row[i];
    }
    out += '\n';
  };
  append_row(header_);
  for (const auto& r : rows_) append_row(r);
  return out;
}

void CsvWriter::write(const std::filesystem::path& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  f << str();
}

nlohmann::json RunReport::to_json() const {
  nlohmann::json j;
  j["subcommand"] = subcommand;
  j["config"] = config_echo;
  j["seed"] = seed;
  j["wall_clock_seconds"] = wall_clock_seconds;
  j["warnings"] = warnings;
  j["outputs"] = outputs;
  j["version"] = version;
  return j;
}

void RunReport::write(const std::filesystem::path& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  f << to_json().dump(2) << '\n';
}

std::string build_version() {
#ifdef FHJ_VERSION
  return FHJ_VERSION;
#else
  return "unknown";
#endif
}

}  // namespace fhj
