#pragma once

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace eclosure {

inline constexpr int kMaxHypotheses = 64;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Parameter outside its mathematical domain (alpha, gamma, eta, p-value range, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Value vector of the wrong kind handed to a builder or procedure.
class KindMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Exhaustive enumeration requested above the configured m cap.
class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operation requires a collection capability flag that is not set.
class FlagError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Bitmask over hypotheses. Indices are 0-based internally; the text forms
// (to_string, from_one_based) use the 1-based numbering users see.
class Subset {
 public:
  constexpr Subset() = default;
  constexpr explicit Subset(std::uint64_t bits) : bits_(bits) {}

  static Subset full(int m);
  static Subset prefix(const std::vector<int>& order, int r);
  static Subset from_indices(const std::vector<int>& zero_based);
  static Subset from_one_based(const std::vector<int>& one_based);
  static Subset of(std::initializer_list<int> one_based);

  constexpr std::uint64_t bits() const { return bits_; }
  constexpr int size() const { return std::popcount(bits_); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool contains(int i) const { return (bits_ >> i) & 1u; }
  constexpr bool subset_of(Subset other) const { return (bits_ & ~other.bits_) == 0; }

  constexpr Subset with(int i) const { return Subset(bits_ | (std::uint64_t{1} << i)); }
  constexpr Subset without(int i) const { return Subset(bits_ & ~(std::uint64_t{1} << i)); }

  constexpr Subset operator&(Subset o) const { return Subset(bits_ & o.bits_); }
  constexpr Subset operator|(Subset o) const { return Subset(bits_ | o.bits_); }
  constexpr Subset operator-(Subset o) const { return Subset(bits_ & ~o.bits_); }
  constexpr bool operator==(const Subset&) const = default;
  constexpr auto operator<=>(const Subset&) const = default;

  std::vector<int> indices() const;
  std::vector<int> one_based() const;
  std::string to_string() const;

 private:
  std::uint64_t bits_ = 0;
};

enum class ValueKind { pvalue, evalue, knockoff_stat };

std::string to_string(ValueKind kind);
ValueKind parse_value_kind(const std::string& text);

// Per-hypothesis inputs. Construction enforces the kind-specific range.
class ValueVector {
 public:
  ValueVector(ValueKind kind, std::vector<double> values);

  ValueKind kind() const { return kind_; }
  const std::vector<double>& values() const { return values_; }
  int size() const { return static_cast<int>(values_.size()); }
  double operator[](int i) const { return values_[i]; }

  void require(ValueKind expected, const char* who) const;

 private:
  ValueKind kind_;
  std::vector<double> values_;
};

void validate_alpha(double alpha);

// Two-way comparison used for every e-value versus loss/alpha test.
struct ComparePolicy {
  enum class Mode { relative_epsilon, exact };

  Mode mode = Mode::relative_epsilon;
  double epsilon = 1e-12;

  static ComparePolicy relative(double eps = 1e-12);
  static ComparePolicy exact();

  bool geq(double lhs, double rhs) const;
  bool leq(double lhs, double rhs) const { return geq(rhs, lhs); }
  bool less(double lhs, double rhs) const { return !geq(lhs, rhs); }
};

// 0/0 = 0 and x/0 = +inf for x > 0.
double safe_ratio(double num, double den);

// Loss f_N(R) for null set N and discovery set R.
class Loss {
 public:
  enum class Kind {
    fdp,
    kfwer,
    pfer,
    fdx,
    aer,
    discovery_count,  // |R|, the denominator of mFDR-type ratios
    true_discovery_shortfall,  // 1{|R \ N| < d}
    ratio
  };

  static Loss fdp();
  static Loss fwer() { return kfwer(1); }
  static Loss kfwer(int k);
  static Loss pfer();
  static Loss fdx(double gamma);
  static Loss aer();
  static Loss discovery_count();
  static Loss true_discovery_shortfall(int d);

  // Parses "fdr", "fwer", "kfwer:K", "pfer", "fdx:G", "aer", "count", "td:D",
  // "mfdr:ETA" and "ratio:F/G:ETA". Ratio forms take alpha from the caller.
  static Loss parse(const std::string& text, double alpha);

  Kind kind() const { return kind_; }
  double operator()(Subset null_set, Subset rejected) const;
  // Upper bound of f_N(R) over all N for this R; lets enumeration skip S early.
  double upper_bound(Subset rejected) const;
  std::string spec() const;
  bool table_kind() const;

  int k() const { return k_; }
  double gamma() const { return gamma_; }

  friend Loss ratio_to_expectation_loss(const Loss& f, const Loss& g, double eta, double alpha);

 private:
  explicit Loss(Kind kind) : kind_(kind) {}

  Kind kind_;
  int k_ = 1;
  double gamma_ = 0.0;
  double eta_ = 1.0;
  double alpha_ = 1.0;
  std::shared_ptr<const Loss> f_;
  std::shared_ptr<const Loss> g_;
};

// (f_N(R) - alpha g_N(R)) / eta; controlling its expectation at alpha controls
// the ratio E[f]/E[g] at alpha.
Loss ratio_to_expectation_loss(const Loss& f, const Loss& g, double eta, double alpha);

inline double loss_eval(const Loss& loss, Subset null_set, Subset rejected) {
  return loss(null_set, rejected);
}

}  // namespace eclosure
