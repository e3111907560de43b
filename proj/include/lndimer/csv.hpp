#pragma once

// Small shared helpers for the CSV formats used across the library:
// whitespace trimming and comma splitting with trailing-field handling.
// Blank lines and lines starting with '#' are treated as comments by
// every parser built on these.

#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lndimer::csv {

struct parse_error : std::runtime_error {
  explicit parse_error(const std::string& what, std::vector<std::string> rows = {})
      : std::runtime_error(what), offending_rows(std::move(rows)) {}
  std::vector<std::string> offending_rows;  // "line N: reason"
};

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace lndimer::csv
