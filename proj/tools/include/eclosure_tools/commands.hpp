#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eclosure/engine.hpp"
#include "eclosure/io.hpp"
#include "eclosure/procedures.hpp"

namespace eclosure::tools {

enum class Format { json, csv, text };
Format parse_format(const std::string& text);

ResultRecord cmd_run(Method method, const ValueVector& values, double alpha,
                     const ClosedOptions& options = {});
std::string render(const ResultRecord& record, Format format);

struct CompareRow {
  double alpha;
  Method classical;
  Method closed;
  int classical_count;
  int closed_count;
};

// Classical/closed pairs that apply to an input kind.
std::vector<std::pair<Method, Method>> default_pairs(ValueKind kind);
std::vector<CompareRow> cmd_compare(const ValueVector& values, const std::vector<double>& alphas,
                                    const std::vector<std::pair<Method, Method>>& pairs,
                                    double lambda = 0.5);
std::string render(const std::vector<CompareRow>& rows, Format format);

struct QueryResult {
  Method method;
  double alpha;
  Subset set;
  MembershipCertificate certificate;
  std::optional<int> true_discovery_bound;
  std::optional<double> critical_alpha;
  std::string note;  // why a field is missing
};

QueryResult cmd_query(Method method, const ValueVector& values, double alpha, Subset set,
                      double lambda = 0.5);
std::string render(const QueryResult& result, Format format);

// FDR certificate for a closed method's collection. Up to m = 16 it comes
// from exhaustive enumeration, so the witness is the first violating S in
// bitmask order (for a zero-evidence singleton, the singleton itself); above
// that the method's shortcut decides and reports its worst-case S.
inline constexpr int kCanonicalWitnessMaxM = 16;
MembershipCertificate certify_fdr(Method method, const ECollection& collection, double alpha,
                                  Subset r);

// Comma-separated 1-based indices; an empty string is the empty set.
Subset parse_set(const std::string& text, int m);

// Greedy Fig-1 style boundary as "rank,e" CSV rows.
std::string cmd_figure(const std::string& kind, int k, int m, double alpha);

struct SelfcheckOptions {
  int m = 8;
  int trials = 500;
  std::uint64_t seed = 1;
  double alpha = 0.1;
  // Makes the eBH-bar check treat a zero margin as a violation.
  bool inject_fault = false;
};

struct SelfcheckReport {
  bool ok = true;
  std::string text;
};

SelfcheckReport cmd_selfcheck(const SelfcheckOptions& options);

}  // namespace eclosure::tools
