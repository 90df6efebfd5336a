#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "qfilter/field.hpp"

namespace qfilter {

// Shortest representation that round-trips the exact double value.
std::string format_double(double value);

// RFC-4180-style CSV with '\n' line endings; numeric cells are written with
// format_double so files are byte-stable across runs.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::span<const std::string> cells);
  std::string to_csv() const;
  nlohmann::ordered_json to_json_rows() const;

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// {period, terms: [{omega, sine, cosine}]} with "omega" the integer harmonic
// index (angular frequency = 2*pi*omega/period), avoiding float drift.
nlohmann::ordered_json field_to_json(const FourierField& field);
FourierField field_from_json(const nlohmann::json& j);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace qfilter
