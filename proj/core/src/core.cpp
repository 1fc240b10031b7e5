#include "eclosure/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace eclosure {

Subset Subset::full(int m) {
  if (m < 0 || m > kMaxHypotheses) throw DomainError("m must lie in [0, 64]");
  return Subset(m == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << m) - 1);
}

Subset Subset::prefix(const std::vector<int>& order, int r) {
  Subset s;
  for (int i = 0; i < r; ++i) s = s.with(order[i]);
  return s;
}

Subset Subset::from_indices(const std::vector<int>& zero_based) {
  Subset s;
  for (int i : zero_based) {
    if (i < 0 || i >= kMaxHypotheses) throw DomainError("index out of range");
    s = s.with(i);
  }
  return s;
}

Subset Subset::from_one_based(const std::vector<int>& one_based) {
  Subset s;
  for (int i : one_based) {
    if (i < 1 || i > kMaxHypotheses) throw DomainError("index out of range");
    s = s.with(i - 1);
  }
  return s;
}

Subset Subset::of(std::initializer_list<int> one_based) {
  return from_one_based(std::vector<int>(one_based));
}

std::vector<int> Subset::indices() const {
  std::vector<int> out;
  for (std::uint64_t b = bits_; b; b &= b - 1) out.push_back(std::countr_zero(b));
  return out;
}

std::vector<int> Subset::one_based() const {
  auto out = indices();
  for (int& i : out) ++i;
  return out;
}

std::string Subset::to_string() const {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (int i : one_based()) {
    if (!first) os << ',';
    os << i;
    first = false;
  }
  os << '}';
  return os.str();
}

std::string to_string(ValueKind kind) {
  switch (kind) {
    case ValueKind::pvalue: return "pvalue";
    case ValueKind::evalue: return "evalue";
    case ValueKind::knockoff_stat: return "knockoff_stat";
  }
  return "unknown";
}

ValueKind parse_value_kind(const std::string& text) {
  if (text == "pvalue" || text == "p") return ValueKind::pvalue;
  if (text == "evalue" || text == "e") return ValueKind::evalue;
  if (text == "knockoff_stat" || text == "w") return ValueKind::knockoff_stat;
  throw DomainError("unknown value kind '" + text + "'");
}

ValueVector::ValueVector(ValueKind kind, std::vector<double> values)
    : kind_(kind), values_(std::move(values)) {
  if (values_.empty()) throw DomainError("value vector is empty");
  if (values_.size() > static_cast<std::size_t>(kMaxHypotheses))
    throw DomainError("at most 64 hypotheses are supported");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    double v = values_[i];
    bool ok = true;
    switch (kind_) {
      case ValueKind::pvalue: ok = v >= 0.0 && v <= 1.0; break;
      case ValueKind::evalue: ok = v >= 0.0; break;  // +inf allowed, NaN rejected
      case ValueKind::knockoff_stat: ok = std::isfinite(v); break;
    }
    if (!ok) {
      throw DomainError(to_string(kind_) + " entry " + std::to_string(i + 1) +
                        " out of range: " + std::to_string(v));
    }
  }
}

void ValueVector::require(ValueKind expected, const char* who) const {
  if (kind_ != expected) {
    throw KindMismatch(std::string(who) + " expects " + to_string(expected) +
                       " input, got " + to_string(kind_));
  }
}

void validate_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in (0, 1]");
}

ComparePolicy ComparePolicy::relative(double eps) {
  if (!(eps > 0.0)) throw DomainError("epsilon must be positive");
  return ComparePolicy{Mode::relative_epsilon, eps};
}

ComparePolicy ComparePolicy::exact() { return ComparePolicy{Mode::exact, 0.0}; }

bool ComparePolicy::geq(double lhs, double rhs) const {
  if (lhs >= rhs) return true;
  if (mode == Mode::exact) return false;
  if (!std::isfinite(lhs) || !std::isfinite(rhs)) return false;
  return rhs - lhs <= epsilon * std::max(std::fabs(lhs), std::fabs(rhs));
}

double safe_ratio(double num, double den) {
  if (num == 0.0) return 0.0;
  if (den == 0.0) return num > 0 ? kInf : -kInf;
  return num / den;
}

Loss Loss::fdp() { return Loss(Kind::fdp); }

Loss Loss::kfwer(int k) {
  if (k < 1) throw DomainError("kFWER requires k >= 1");
  Loss l(Kind::kfwer);
  l.k_ = k;
  return l;
}

Loss Loss::pfer() { return Loss(Kind::pfer); }

Loss Loss::fdx(double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw DomainError("FDX requires gamma in [0, 1)");
  Loss l(Kind::fdx);
  l.gamma_ = gamma;
  return l;
}

Loss Loss::aer() { return Loss(Kind::aer); }
Loss Loss::discovery_count() { return Loss(Kind::discovery_count); }

Loss Loss::true_discovery_shortfall(int d) {
  if (d < 0) throw DomainError("true discovery level must be >= 0");
  Loss l(Kind::true_discovery_shortfall);
  l.k_ = d;
  return l;
}

Loss ratio_to_expectation_loss(const Loss& f, const Loss& g, double eta, double alpha) {
  if (!(eta > 0.0)) throw DomainError("ratio transform requires eta > 0");
  validate_alpha(alpha);
  Loss l(Loss::Kind::ratio);
  l.eta_ = eta;
  l.alpha_ = alpha;
  l.f_ = std::make_shared<const Loss>(f);
  l.g_ = std::make_shared<const Loss>(g);
  return l;
}

double Loss::operator()(Subset null_set, Subset rejected) const {
  const int false_rej = (null_set & rejected).size();
  const int r = rejected.size();
  switch (kind_) {
    case Kind::fdp:
      return r == 0 ? 0.0 : static_cast<double>(false_rej) / r;
    case Kind::kfwer:
      return false_rej >= k_ ? 1.0 : 0.0;
    case Kind::pfer:
      return false_rej;
    case Kind::fdx: {
      double fdp = r == 0 ? 0.0 : static_cast<double>(false_rej) / r;
      return fdp > gamma_ ? 1.0 : 0.0;
    }
    case Kind::aer: {
      int n = null_set.size();
      return n == 0 ? 0.0 : static_cast<double>(false_rej) / n;
    }
    case Kind::discovery_count:
      return r;
    case Kind::true_discovery_shortfall:
      return (rejected - null_set).size() < k_ ? 1.0 : 0.0;
    case Kind::ratio:
      return ((*f_)(null_set, rejected) - alpha_ * (*g_)(null_set, rejected)) / eta_;
  }
  return 0.0;
}

double Loss::upper_bound(Subset rejected) const {
  const int r = rejected.size();
  switch (kind_) {
    case Kind::fdp:
    case Kind::kfwer:
    case Kind::fdx:
    case Kind::aer:
    case Kind::true_discovery_shortfall:
      return 1.0;
    case Kind::pfer:
    case Kind::discovery_count:
      return r;
    case Kind::ratio:
      // g is nonnegative for every kind here, so dropping it bounds from above.
      return std::max(0.0, f_->upper_bound(rejected)) / eta_;
  }
  return kInf;
}

bool Loss::table_kind() const {
  return kind_ == Kind::fdp || kind_ == Kind::kfwer || kind_ == Kind::pfer ||
         kind_ == Kind::fdx || kind_ == Kind::aer;
}

namespace {

std::string format_number(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

double parse_number(const std::string& text, const std::string& whole) {
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw DomainError("bad number in loss '" + whole + "'");
  }
}

int parse_int(const std::string& text, const std::string& whole) {
  double v = parse_number(text, whole);
  if (v != std::floor(v)) throw DomainError("expected an integer in loss '" + whole + "'");
  return static_cast<int>(v);
}

}  // namespace

std::string Loss::spec() const {
  switch (kind_) {
    case Kind::fdp: return "fdr";
    case Kind::kfwer: return k_ == 1 ? "fwer" : "kfwer:" + std::to_string(k_);
    case Kind::pfer: return "pfer";
    case Kind::fdx: return "fdx:" + format_number(gamma_);
    case Kind::aer: return "aer";
    case Kind::discovery_count: return "count";
    case Kind::true_discovery_shortfall: return "td:" + std::to_string(k_);
    case Kind::ratio:
      return "ratio:" + f_->spec() + "/" + g_->spec() + ":" + format_number(eta_) + ":" +
             format_number(alpha_);
  }
  return "";
}

Loss Loss::parse(const std::string& text, double alpha) {
  std::string name = text;
  std::string arg;
  if (auto pos = text.find(':'); pos != std::string::npos) {
    name = text.substr(0, pos);
    arg = text.substr(pos + 1);
  }
  std::transform(name.begin(), name.end(), name.begin(), ::tolower);
  auto need_arg = [&] {
    if (arg.empty()) throw DomainError("loss '" + text + "' needs a parameter");
  };
  if (name == "fdr" || name == "fdp") return fdp();
  if (name == "fwer") return fwer();
  if (name == "kfwer") { need_arg(); return kfwer(parse_int(arg, text)); }
  if (name == "pfer") return pfer();
  if (name == "fdx") { need_arg(); return fdx(parse_number(arg, text)); }
  if (name == "aer") return aer();
  if (name == "count") return discovery_count();
  if (name == "td") { need_arg(); return true_discovery_shortfall(parse_int(arg, text)); }
  if (name == "mfdr") {
    double eta = arg.empty() ? 1.0 : parse_number(arg, text);
    return ratio_to_expectation_loss(pfer(), discovery_count(), eta, alpha);
  }
  if (name == "ratio") {
    // ratio:F/G:ETA[:ALPHA]; F and G are parameter-free kinds.
    need_arg();
    auto slash = arg.find('/');
    if (slash == std::string::npos) throw DomainError("ratio loss needs F/G in '" + text + "'");
    std::string f = arg.substr(0, slash);
    std::string rest = arg.substr(slash + 1);
    std::string g = rest;
    double eta = 1.0;
    double a = alpha;
    if (auto c = rest.find(':'); c != std::string::npos) {
      g = rest.substr(0, c);
      std::string tail = rest.substr(c + 1);
      if (auto c2 = tail.find(':'); c2 != std::string::npos) {
        eta = parse_number(tail.substr(0, c2), text);
        a = parse_number(tail.substr(c2 + 1), text);
      } else {
        eta = parse_number(tail, text);
      }
    }
    return ratio_to_expectation_loss(parse(f, a), parse(g, a), eta, a);
  }
  throw DomainError("unknown loss '" + text + "'");
}

}  // namespace eclosure
