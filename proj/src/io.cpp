#include "qfilter/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace qfilter {

std::string format_double(double value) {
  char buffer[32];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) {
    throw std::runtime_error("failed to format double");
  }
  return std::string(buffer, ptr);
}

namespace {

std::string escape_csv(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string quoted = "\"";
  for (char c : cell) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

}  // namespace

CsvTable::CsvTable(std::vector<std::string> header)
    : header_(std::move(header)) {}

void CsvTable::add_row(std::span<const std::string> cells) {
  if (cells.size() != header_.size()) {
    throw std::invalid_argument("CSV row width does not match header");
  }
  rows_.emplace_back(cells.begin(), cells.end());
}

std::string CsvTable::to_csv() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (i > 0) out << ',';
    out << escape_csv(header_[i]);
  }
  out << '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out << ',';
      out << escape_csv(row[i]);
    }
    out << '\n';
  }
  return out.str();
}

nlohmann::ordered_json CsvTable::to_json_rows() const {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : rows_) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < header_.size(); ++i) {
      obj[header_[i]] = row[i];
    }
    rows.push_back(std::move(obj));
  }
  return rows;
}

nlohmann::ordered_json field_to_json(const FourierField& field) {
  nlohmann::ordered_json j;
  j["period"] = field.period();
  nlohmann::ordered_json terms = nlohmann::ordered_json::array();
  for (const FourierTerm& term : field.terms()) {
    nlohmann::ordered_json t;
    t["omega"] = term.harmonic;
    t["sine"] = {term.sine[0], term.sine[1], term.sine[2]};
    t["cosine"] = {term.cosine[0], term.cosine[1], term.cosine[2]};
    terms.push_back(std::move(t));
  }
  j["terms"] = std::move(terms);
  return j;
}

namespace {

Eigen::Vector3d vector3_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) {
    throw std::invalid_argument(std::string(what) +
                                " must be an array of three numbers");
  }
  Eigen::Vector3d v;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) {
      throw std::invalid_argument(std::string(what) + " entries must be numbers");
    }
    v[i] = j[i].get<double>();
  }
  return v;
}

int harmonic_from_json(const nlohmann::json& j) {
  if (j.is_number_integer()) return j.get<int>();
  if (j.is_number_float()) {
    const double value = j.get<double>();
    const double rounded = std::round(value);
    if (std::abs(value - rounded) > 1e-9) {
      throw std::invalid_argument(
          "term \"omega\" must be an integer harmonic index");
    }
    return static_cast<int>(rounded);
  }
  throw std::invalid_argument("term \"omega\" must be an integer harmonic index");
}

}  // namespace

FourierField field_from_json(const nlohmann::json& j) {
  if (!j.is_object()) {
    throw std::invalid_argument("field must be a JSON object");
  }
  for (const auto& [key, value] : j.items()) {
    if (key != "period" && key != "terms") {
      throw std::invalid_argument("unknown field key \"" + key + "\"");
    }
  }
  if (!j.contains("period") || !j["period"].is_number()) {
    throw std::invalid_argument("field needs a numeric \"period\"");
  }
  const double period = j["period"].get<double>();
  std::vector<FourierTerm> terms;
  if (j.contains("terms")) {
    if (!j["terms"].is_array()) {
      throw std::invalid_argument("field \"terms\" must be an array");
    }
    for (const auto& entry : j["terms"]) {
      if (!entry.is_object()) {
        throw std::invalid_argument("field term must be an object");
      }
      FourierTerm term;
      bool has_omega = false;
      for (const auto& [key, value] : entry.items()) {
        if (key == "omega") {
          term.harmonic = harmonic_from_json(value);
          has_omega = true;
        } else if (key == "sine") {
          term.sine = vector3_from_json(value, "sine");
        } else if (key == "cosine") {
          term.cosine = vector3_from_json(value, "cosine");
        } else {
          throw std::invalid_argument("unknown field term key \"" + key + "\"");
        }
      }
      if (!has_omega) {
        throw std::invalid_argument("field term needs an \"omega\" harmonic");
      }
      terms.push_back(term);
    }
  }
  return FourierField(period, std::move(terms));
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  out << content;
  if (!out) {
    throw std::runtime_error("failed writing '" + path + "'");
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace qfilter
