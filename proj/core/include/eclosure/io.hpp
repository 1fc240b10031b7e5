#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "eclosure/core.hpp"

namespace eclosure {

// Malformed input; `line` is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

// CSV with header `index,value` (kind taken from `kind_hint`), `index,p`,
// `index,e` or `index,w`; or JSON {"kind": ..., "values": [...]}. Indices must
// be exactly 1..m. Values are parsed as written; out-of-range entries are
// errors, never clamped.
ValueVector parse_csv_input(std::istream& in, std::optional<ValueKind> kind_hint,
                            const std::string& source = "<csv>");
ValueVector parse_json_input(const std::string& text, std::optional<ValueKind> kind_hint,
                             const std::string& source = "<json>");
ValueVector load_input(const std::string& path, std::optional<ValueKind> kind_hint = {});

std::string to_csv(const ValueVector& values);
std::string to_json(const ValueVector& values);

struct ResultRecord {
  std::string method;
  double alpha = 0.0;
  int m = 0;
  std::vector<int> rejected;  // 1-based, ascending
  std::vector<std::pair<std::string, double>> diagnostics;
  double runtime_ms = 0.0;

  bool operator==(const ResultRecord& other) const;
};

// One JSON object per line. Non-finite diagnostics are written as the strings
// "inf", "-inf" and "nan" so that parsing restores them.
std::string to_json_line(const ResultRecord& record);
ResultRecord parse_result_record(const std::string& line);

}  // namespace eclosure
