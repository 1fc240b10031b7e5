#include "eclosure/engine.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <string>

#include "eclosure/shortcuts.hpp"

namespace eclosure {

namespace {

int env_cap(int fallback) {
  if (const char* v = std::getenv("ECLOSURE_ENUM_CAP")) {
    try {
      int cap = std::stoi(v);
      if (cap >= 1 && cap <= kMaxHypotheses) return cap;
    } catch (const std::exception&) {
    }
  }
  return fallback;
}

void require_cap(int m, int cap, const char* what) {
  if (m > cap) {
    throw CapExceeded(std::string(what) + ": m = " + std::to_string(m) +
                      " exceeds the enumeration cap " + std::to_string(cap));
  }
}

// Subset sums of a nonnegative vector from two half-width tables: one add per
// S and no subtraction, so relative accuracy does not degrade over the walk.
class SplitSums {
 public:
  explicit SplitSums(const std::vector<double>& v) {
    const int m = static_cast<int>(v.size());
    low_bits_ = m / 2;
    lo_ = table(v, 0, low_bits_);
    hi_ = table(v, low_bits_, m);
    mask_ = (std::uint64_t{1} << low_bits_) - 1;
  }
  double operator()(std::uint64_t s) const { return lo_[s & mask_] + hi_[s >> low_bits_]; }

 private:
  static std::vector<double> table(const std::vector<double>& v, int from, int to) {
    std::vector<double> t(std::size_t{1} << (to - from), 0.0);
    for (std::size_t s = 1; s < t.size(); ++s) {
      int low = std::countr_zero(s);
      t[s] = t[s & (s - 1)] + v[from + low];
    }
    return t;
  }
  int low_bits_;
  std::uint64_t mask_;
  std::vector<double> lo_, hi_;
};

// Calls fn(S, e_S) for every nonempty feasible S in ascending bitmask order;
// stops early when fn returns false.
template <class Fn>
void for_each_subset(const ECollection& e, Fn&& fn) {
  const int m = e.m();
  const std::uint64_t end = std::uint64_t{1} << m;
  if (e.flags().mean_type && !e.restricted()) {
    SplitSums sums(e.base());
    for (std::uint64_t s = 1; s < end; ++s) {
      if (!fn(Subset(s), sums(s) / std::popcount(s))) return;
    }
    return;
  }
  for (std::uint64_t s = 1; s < end; ++s) {
    Subset sub(s);
    if (e.restricted() && !e.feasible(sub)) continue;
    if (!fn(sub, e.evaluate(sub))) return;
  }
}

std::vector<int> ordered(const std::vector<double>& v, bool descending) {
  std::vector<int> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return descending ? v[a] > v[b] : v[a] < v[b];
  });
  return order;
}

struct Table {
  std::vector<double> e;                       // e_S by bitmask, +inf if infeasible
  std::vector<std::pair<double, std::uint64_t>> by_value;  // feasible S, ascending e
};

Table build_table(const ECollection& e) {
  Table t;
  t.e.assign(std::size_t{1} << e.m(), kInf);
  for_each_subset(e, [&](Subset s, double v) {
    t.e[s.bits()] = v;
    t.by_value.emplace_back(v, s.bits());
    return true;
  });
  std::sort(t.by_value.begin(), t.by_value.end());
  return t;
}

bool member_from_table(const Table& t, const Loss& loss, double alpha, Subset r,
                       const ComparePolicy& policy) {
  const double ub = loss.upper_bound(r) / alpha;
  for (const auto& [value, bits] : t.by_value) {
    if (policy.geq(value, ub)) break;
    if (!policy.geq(value, loss(Subset(bits), r) / alpha)) return false;
  }
  return true;
}

}  // namespace

int member_cap() { return env_cap(24); }
int enumerate_cap() { return env_cap(20); }

std::vector<int> order_by_evalue_desc(const std::vector<double>& e) { return ordered(e, true); }
std::vector<int> order_by_pvalue_asc(const std::vector<double>& p) { return ordered(p, false); }
std::vector<int> order_by_w_desc(const std::vector<double>& w) { return ordered(w, true); }

std::vector<int> natural_order(const ECollection& e) {
  const auto& src = e.source();
  if (e.flags().mean_type && src.kind == ValueKind::evalue) return order_by_evalue_desc(e.base());
  switch (src.kind) {
    case ValueKind::pvalue: return order_by_pvalue_asc(src.values);
    case ValueKind::knockoff_stat: return order_by_w_desc(src.values);
    case ValueKind::evalue:
      if (static_cast<int>(src.values.size()) == e.m()) return order_by_evalue_desc(src.values);
      break;
  }
  std::vector<int> order(e.m());
  std::iota(order.begin(), order.end(), 0);
  return order;
}

MembershipCertificate member(const ECollection& e, const Loss& loss, double alpha, Subset r,
                             const ComparePolicy& policy) {
  validate_alpha(alpha);
  require_cap(e.m(), member_cap(), "member");
  if (!r.subset_of(Subset::full(e.m()))) throw DomainError("R exceeds [m]");
  MembershipCertificate cert;
  for_each_subset(e, [&](Subset s, double value) {
    const double need = loss(s, r) / alpha;
    cert.margin = std::min(cert.margin, value - need);
    if (cert.member && !policy.geq(value, need)) {
      cert.member = false;
      cert.witness = s;
      cert.witness_e = value;
      cert.witness_bound = need;
    }
    return true;
  });
  return cert;
}

SetCollection enumerate_collection(const ECollection& e, const Loss& loss, double alpha,
                                   const ComparePolicy& policy) {
  validate_alpha(alpha);
  require_cap(e.m(), enumerate_cap(), "enumerate_collection");
  const Table t = build_table(e);
  SetCollection out;
  const std::uint64_t end = std::uint64_t{1} << e.m();
  for (std::uint64_t r = 0; r < end; ++r)
    if (member_from_table(t, loss, alpha, Subset(r), policy)) out.push_back(Subset(r));
  return out;
}

Subset largest_member(const ECollection& e, const Loss& loss, double alpha,
                      const std::vector<int>& ordering, bool exhaustive,
                      const ComparePolicy& policy) {
  validate_alpha(alpha);
  const int m = e.m();
  if (!exhaustive) {
    if (static_cast<int>(ordering.size()) != m) throw DomainError("ordering must have length m");
    for (int r = m; r > 0; --r) {
      Subset cand = Subset::prefix(ordering, r);
      if (member(e, loss, alpha, cand, policy).member) return cand;
    }
    return Subset{};
  }
  require_cap(m, enumerate_cap(), "largest_member (exhaustive)");
  const Table t = build_table(e);
  const std::uint64_t end = std::uint64_t{1} << m;
  for (int size = m; size > 0; --size) {
    for (std::uint64_t r = 1; r < end; ++r) {
      if (std::popcount(r) != size) continue;
      if (member_from_table(t, loss, alpha, Subset(r), policy)) return Subset(r);
    }
  }
  return Subset{};
}

int true_discovery_bound(const ECollection& e, double alpha, Subset r,
                         const ComparePolicy& policy) {
  validate_alpha(alpha);
  require_cap(e.m(), member_cap(), "true_discovery_bound");
  int best = r.size();
  for_each_subset(e, [&](Subset s, double value) {
    if (policy.less(value, 1.0 / alpha)) best = std::min(best, (r - s).size());
    return best > 0;
  });
  return best;
}

double critical_alpha(const ECollection& e, const Loss& loss, Subset r) {
  if (!e.flags().alpha_independent) {
    throw FlagError(
        "critical alpha needs an alpha-independent collection; this one was built at a fixed "
        "alpha, so its e-values are not valid at other levels");
  }
  require_cap(e.m(), member_cap(), "critical_alpha");
  double best = 0.0;
  for_each_subset(e, [&](Subset s, double value) {
    best = std::max(best, safe_ratio(loss(s, r), value));
    return best != kInf;
  });
  return best;
}

Subset fwer_reject_set(const ECollection& e, double alpha, const ComparePolicy& policy) {
  validate_alpha(alpha);
  if (e.m() > member_cap()) {
    if (e.flags().mean_type && !e.restricted()) return eholm_fast(e.base(), alpha, policy);
    require_cap(e.m(), member_cap(), "fwer_reject_set");
  }
  Subset out;
  for (int i = 0; i < e.m(); ++i) {
    Subset single = Subset{}.with(i);
    if (member(e, Loss::fdp(), alpha, single, policy).member) out = out | single;
  }
  return out;
}

bool PostHocAudit::passed() const {
  return std::all_of(steps.begin(), steps.end(),
                     [](const AuditEntry& a) { return a.certificate.member; });
}

PostHocAudit audit_post_hoc(const ECollection& e, const std::vector<PostHocStep>& steps,
                            const ComparePolicy& policy) {
  for (std::size_t i = 1; i < steps.size(); ++i) {
    if (steps[i].alpha != steps[0].alpha && !e.flags().alpha_independent) {
      throw FlagError("post hoc steps at different alpha need an alpha-independent collection");
    }
  }
  PostHocAudit audit;
  audit.collection_fingerprint = e.fingerprint();
  for (const auto& step : steps)
    audit.steps.push_back({step, member(e, step.loss, step.alpha, step.rejected, policy)});
  return audit;
}

}  // namespace eclosure
