#include "eclosure/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace eclosure {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), ::tolower);
  return s;
}

std::optional<double> parse_decimal(const std::string& text) {
  const std::string t = lower(trim(text));
  if (t == "inf" || t == "+inf" || t == "infinity") return kInf;
  if (t == "-inf" || t == "-infinity") return -kInf;
  if (t.empty()) return std::nullopt;
  double v = 0.0;
  const char* begin = t.data();
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) return std::nullopt;
  return v;
}

bool in_range(ValueKind kind, double v) {
  switch (kind) {
    case ValueKind::pvalue: return v >= 0.0 && v <= 1.0;
    case ValueKind::evalue: return v >= 0.0;
    case ValueKind::knockoff_stat: return std::isfinite(v);
  }
  return false;
}

const char* range_text(ValueKind kind) {
  switch (kind) {
    case ValueKind::pvalue: return "p-values must lie in [0, 1]";
    case ValueKind::evalue: return "e-values must lie in [0, +inf]";
    case ValueKind::knockoff_stat: return "knockoff statistics must be finite";
  }
  return "";
}

// Places value v at 1-based index `index`, checking the 1..m layout.
void place(std::vector<std::optional<double>>& slots, long index, double v,
           const std::string& source, int line) {
  if (index < 1 || index > kMaxHypotheses)
    throw ParseError(source, line, "index must lie in 1..64");
  if (slots.size() < static_cast<std::size_t>(index)) slots.resize(index);
  if (slots[index - 1]) throw ParseError(source, line, "duplicate index " + std::to_string(index));
  slots[index - 1] = v;
}

std::vector<double> collect(const std::vector<std::optional<double>>& slots,
                            const std::string& source) {
  if (slots.empty()) throw ParseError(source, 0, "no values");
  std::vector<double> out;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!slots[i]) {
      throw ParseError(source, 0,
                       "indices must be contiguous 1..m; missing " + std::to_string(i + 1));
    }
    out.push_back(*slots[i]);
  }
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

template <class J = json>
J number_json(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

template <class J>
double number_from_json(const J& j) {
  if (j.is_number()) return j.template get<double>();
  if (j.is_string()) {
    const std::string s = lower(j.template get<std::string>());
    if (s == "nan") return std::nan("");
    if (auto v = parse_decimal(s)) return *v;
  }
  throw std::invalid_argument("expected a number");
}

bool same_bits(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

}  // namespace

ParseError::ParseError(const std::string& source, int line, const std::string& message)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " +
                         message),
      line_(line) {}

ValueVector parse_csv_input(std::istream& in, std::optional<ValueKind> kind_hint,
                            const std::string& source) {
  std::string raw;
  int line_no = 0;
  std::optional<ValueKind> kind;
  std::vector<std::optional<double>> slots;
  bool header_seen = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
      throw ParseError(source, line_no, "expected two comma-separated fields");
    const std::string first = trim(line.substr(0, comma));
    const std::string second = trim(line.substr(comma + 1));
    if (!header_seen) {
      header_seen = true;
      const std::string col = lower(second);
      if (lower(first) != "index")
        throw ParseError(source, line_no, "header must start with 'index'");
      if (col == "w") {
        kind = ValueKind::knockoff_stat;
      } else if (col == "p") {
        kind = ValueKind::pvalue;
      } else if (col == "e") {
        kind = ValueKind::evalue;
      } else if (col == "value") {
        if (!kind_hint) throw ParseError(source, line_no, "header 'index,value' needs a value kind");
        kind = *kind_hint;
      } else {
        throw ParseError(source, line_no, "unknown value column '" + second + "'");
      }
      if (kind_hint && *kind != *kind_hint) {
        throw KindMismatch(source + ":" + std::to_string(line_no) + ": file holds " +
                           to_string(*kind) + " but " + to_string(*kind_hint) + " is required");
      }
      continue;
    }
    long index = 0;
    auto [ptr, ec] = std::from_chars(first.data(), first.data() + first.size(), index);
    if (ec != std::errc() || ptr != first.data() + first.size())
      throw ParseError(source, line_no, "bad index '" + first + "'");
    const auto value = parse_decimal(second);
    if (!value || std::isnan(*value))
      throw ParseError(source, line_no, "bad value '" + second + "'");
    if (!in_range(*kind, *value)) throw ParseError(source, line_no, range_text(*kind));
    place(slots, index, *value, source, line_no);
  }
  if (!header_seen) throw ParseError(source, 0, "empty input");
  return ValueVector(*kind, collect(slots, source));
}

ValueVector parse_json_input(const std::string& text, std::optional<ValueKind> kind_hint,
                             const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& err) {
    const std::size_t pos = std::min<std::size_t>(err.byte, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + pos, '\n'));
    throw ParseError(source, line, "invalid JSON");
  }
  if (!doc.is_object() || !doc.contains("kind") || !doc.contains("values"))
    throw ParseError(source, 0, "expected an object with 'kind' and 'values'");
  if (!doc["kind"].is_string()) throw ParseError(source, 0, "'kind' must be a string");
  ValueKind kind;
  try {
    kind = parse_value_kind(doc["kind"].get<std::string>());
  } catch (const DomainError& err) {
    throw ParseError(source, 0, err.what());
  }
  if (kind_hint && kind != *kind_hint) {
    throw KindMismatch(source + ": file holds " + to_string(kind) + " but " +
                       to_string(*kind_hint) + " is required");
  }
  const json& arr = doc["values"];
  if (!arr.is_array() || arr.empty()) throw ParseError(source, 0, "'values' must be a nonempty array");
  std::vector<double> values;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    std::optional<double> v;
    if (arr[i].is_number()) {
      v = arr[i].get<double>();
    } else if (arr[i].is_string()) {
      v = parse_decimal(arr[i].get<std::string>());
    }
    const std::string where = "value " + std::to_string(i + 1);
    if (!v || std::isnan(*v)) throw ParseError(source, 0, where + " is not a number");
    if (!in_range(kind, *v)) throw ParseError(source, 0, where + ": " + range_text(kind));
    values.push_back(*v);
  }
  if (values.size() > static_cast<std::size_t>(kMaxHypotheses))
    throw ParseError(source, 0, "at most 64 hypotheses are supported");
  return ValueVector(kind, std::move(values));
}

ValueVector load_input(const std::string& path, std::optional<ValueKind> kind_hint) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return parse_json_input(text, kind_hint, path);
  std::istringstream stream(text);
  return parse_csv_input(stream, kind_hint, path);
}

std::string to_csv(const ValueVector& values) {
  std::ostringstream os;
  const char* col = values.kind() == ValueKind::knockoff_stat ? "w"
                    : values.kind() == ValueKind::pvalue      ? "p"
                                                              : "e";
  os << "index," << col << "\n";
  for (int i = 0; i < values.size(); ++i) os << i + 1 << "," << format_double(values[i]) << "\n";
  return os.str();
}

std::string to_json(const ValueVector& values) {
  json doc;
  doc["kind"] = to_string(values.kind());
  doc["values"] = json::array();
  for (double v : values.values()) doc["values"].push_back(number_json(v));
  return doc.dump();
}

bool ResultRecord::operator==(const ResultRecord& other) const {
  if (method != other.method || m != other.m || rejected != other.rejected) return false;
  if (!same_bits(alpha, other.alpha) || !same_bits(runtime_ms, other.runtime_ms)) return false;
  if (diagnostics.size() != other.diagnostics.size()) return false;
  for (std::size_t i = 0; i < diagnostics.size(); ++i) {
    if (diagnostics[i].first != other.diagnostics[i].first ||
        !same_bits(diagnostics[i].second, other.diagnostics[i].second))
      return false;
  }
  return true;
}

std::string to_json_line(const ResultRecord& record) {
  // ordered_json keeps the field order stable for byte-level comparisons.
  nlohmann::ordered_json j;
  j["method"] = record.method;
  j["alpha"] = number_json<nlohmann::ordered_json>(record.alpha);
  j["m"] = record.m;
  j["rejected"] = record.rejected;
  nlohmann::ordered_json diag = nlohmann::ordered_json::object();
  for (const auto& [name, value] : record.diagnostics) diag[name] = number_json<nlohmann::ordered_json>(value);
  j["diagnostics"] = diag;
  j["runtime_ms"] = number_json<nlohmann::ordered_json>(record.runtime_ms);
  return j.dump();
}

ResultRecord parse_result_record(const std::string& line) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(line);
    ResultRecord r;
    r.method = j.at("method").get<std::string>();
    r.alpha = number_from_json(j.at("alpha"));
    r.m = j.at("m").get<int>();
    r.rejected = j.at("rejected").get<std::vector<int>>();
    for (const auto& [name, value] : j.at("diagnostics").items())
      r.diagnostics.emplace_back(name, number_from_json(value));
    r.runtime_ms = number_from_json(j.at("runtime_ms"));
    return r;
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& err) {
    throw ParseError("<record>", 1, std::string("bad result record: ") + err.what());
  }
}

}  // namespace eclosure
