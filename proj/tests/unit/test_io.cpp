#include <gtest/gtest.h>

#include <sstream>

#include "eclosure/io.hpp"

using namespace eclosure;

namespace {

std::string fixture(const std::string& name) { return std::string(ECLOSURE_FIXTURE_DIR) + "/" + name; }

ValueVector parse(const std::string& text, std::optional<ValueKind> hint = {}) {
  std::istringstream in(text);
  return parse_csv_input(in, hint, "t.csv");
}

}  // namespace

TEST(CsvInput, HeadersSelectKind) {
  EXPECT_EQ(parse("index,p\n1,0.5\n").kind(), ValueKind::pvalue);
  EXPECT_EQ(parse("index,e\n1,3\n2,inf\n").kind(), ValueKind::evalue);
  EXPECT_EQ(parse("index,w\n1,-3\n").kind(), ValueKind::knockoff_stat);
  EXPECT_EQ(parse("index,value\n1,0.5\n", ValueKind::pvalue).kind(), ValueKind::pvalue);
  EXPECT_THROW(parse("index,value\n1,0.5\n"), ParseError);
  EXPECT_THROW(parse("index,p\n1,0.5\n", ValueKind::evalue), KindMismatch);
}

TEST(CsvInput, OrderAndComments) {
  auto v = parse("# comment\nindex,p\n2,0.25\n1,0.5\n\n");
  EXPECT_EQ(v.values(), (std::vector<double>{0.5, 0.25}));
}

TEST(CsvInput, ErrorsCarryLineNumbers) {
  try {
    parse("index,p\n1,0.2\n2,1.5\n");
    FAIL();
  } catch (const ParseError& err) {
    EXPECT_EQ(err.line(), 3);
    EXPECT_NE(std::string(err.what()).find("t.csv:3"), std::string::npos);
  }
  EXPECT_THROW(parse("index,p\n1,0.2\n3,0.5\n"), ParseError);
  EXPECT_THROW(parse("index,p\n1,0.2\n1,0.5\n"), ParseError);
  EXPECT_THROW(parse("index,p\n1,abc\n"), ParseError);
  EXPECT_THROW(parse("index,e\n1,-2\n"), ParseError);
  EXPECT_THROW(parse("index,w\n1,inf\n"), ParseError);
  EXPECT_THROW(parse(""), ParseError);
}

TEST(JsonInput, Parses) {
  auto v = parse_json_input(R"({"kind":"evalue","values":[1, "inf", 0]})", {});
  EXPECT_EQ(v.values(), (std::vector<double>{1, kInf, 0}));
  EXPECT_THROW(parse_json_input(R"({"kind":"pvalue","values":[2]})", {}), ParseError);
  EXPECT_THROW(parse_json_input(R"({"kind":"pvalue"})", {}), ParseError);
  EXPECT_THROW(parse_json_input("{\n\"kind\": oops}", {}), ParseError);
  EXPECT_THROW(parse_json_input(R"({"kind":"pvalue","values":[0.1]})", ValueKind::evalue),
               KindMismatch);
}

TEST(LoadInput, Fixtures) {
  EXPECT_EQ(load_input(fixture("fig2.csv")).size(), 11);
  EXPECT_EQ(load_input(fixture("values.json")).values()[2], kInf);
  EXPECT_EQ(load_input(fixture("knockoff6.csv")).kind(), ValueKind::knockoff_stat);
  EXPECT_THROW(load_input(fixture("bad_range.csv")), ParseError);
  EXPECT_THROW(load_input(fixture("missing.csv")), ParseError);
}

TEST(Serialization, RoundTripsBitExact) {
  const ValueVector v(ValueKind::pvalue, {0.1, 1.0 / 3, 0.0029016468987567, 1e-300});
  std::istringstream in(to_csv(v));
  EXPECT_EQ(parse_csv_input(in, {}).values(), v.values());
  EXPECT_EQ(parse_json_input(to_json(v), {}).values(), v.values());
  const ValueVector e(ValueKind::evalue, {kInf, 0.0, 7.25});
  EXPECT_EQ(parse_json_input(to_json(e), {}).values(), e.values());
}

TEST(ResultRecord, RoundTrip) {
  ResultRecord r{"closed-ebh", 0.05, 3, {1, 3}, {{"r", 2}, {"c_alpha", kInf}, {"ell", 1.0 / 3}}, 0.125};
  const std::string line = to_json_line(r);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  EXPECT_EQ(parse_result_record(line), r);
  EXPECT_EQ(to_json_line(parse_result_record(line)), line);
  EXPECT_THROW(parse_result_record("{}"), ParseError);
}
