#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace selfbound {

/// Doubles formatted with 17 significant digits (lossless round trip).
std::string format_double(double v);

/// Minimal CSV writer with RFC-4180-style quoting and a mandatory header.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(&out) {}

  void header(const std::vector<std::string>& names);
  CsvWriter& field(std::string_view text);
  CsvWriter& field(double v);
  CsvWriter& field(long v);
  CsvWriter& empty_field();
  void end_row();

 private:
  void separator();
  std::ostream* out_;
  bool row_started_ = false;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
CsvTable read_csv(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, std::string_view content);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& value);
nlohmann::json read_json_file(const std::filesystem::path& path);

/// FNV-1a content hash used to fingerprint resolved run configurations.
std::uint64_t content_hash(std::string_view bytes);

}  // namespace selfbound
