#include "eclosure/shortcuts.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "eclosure/calibrators.hpp"

namespace eclosure {

namespace {

std::vector<int> sorted_indices(Subset s, const std::vector<double>& v, bool descending) {
  std::vector<int> idx = s.indices();
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return descending ? v[a] > v[b] : v[a] < v[b];
  });
  return idx;
}

Subset take(const std::vector<int>& idx, int n) {
  Subset s;
  for (int i = 0; i < n; ++i) s = s.with(idx[i]);
  return s;
}

void check_range(int m, Subset r) {
  if (!r.subset_of(Subset::full(m))) throw DomainError("R exceeds [m]");
}

void fail(MembershipCertificate& cert, Subset s, double value, double need) {
  cert.member = false;
  cert.witness = s;
  cert.witness_e = value;
  cert.witness_bound = need;
}

#ifdef ECLOSURE_ORACLE_CHECKS
void cross_check(const char* rule, const MembershipCertificate& fast, const ECollection& e,
                 double alpha, Subset r, const ComparePolicy& policy) {
  if (e.m() > 16) return;
  const auto slow = member(e, Loss::fdp(), alpha, r, policy);
  if (slow.member != fast.member) {
    throw std::logic_error(std::string(rule) + " disagrees with exhaustive membership for R = " +
                           r.to_string());
  }
}
#endif

}  // namespace

PrefixSums PrefixSums::descending(const std::vector<double>& e) {
  PrefixSums ps;
  ps.order = order_by_evalue_desc(e);
  ps.s.assign(e.size() + 1, 0.0);
  for (std::size_t k = 0; k < e.size(); ++k) ps.s[k + 1] = ps.s[k] + e[ps.order[k]];
  return ps;
}

double g_value(const PrefixSums& ps, int a, int r, int b, double alpha) {
  const int m = static_cast<int>(ps.order.size());
  return ps.s[m] - ps.s[b] + ps.s[r] - ps.s[a] -
         static_cast<double>(m - b + r - a) * (r - a) / (r * alpha);
}

MembershipCertificate ebhbar_member_fast(const std::vector<double>& e, double alpha, Subset r,
                                         const ComparePolicy& policy) {
  validate_alpha(alpha);
  const int m = static_cast<int>(e.size());
  check_range(m, r);
  MembershipCertificate cert;
  const int size = r.size();
  if (size == 0) return cert;

  const auto inside = sorted_indices(r, e, false);
  const auto outside = sorted_indices(Subset::full(m) - r, e, false);
  std::vector<double> a_sum(inside.size() + 1, 0.0), b_sum(outside.size() + 1, 0.0);
  std::vector<double> b_val;
  for (std::size_t j = 0; j < inside.size(); ++j) a_sum[j + 1] = a_sum[j] + e[inside[j]];
  for (std::size_t k = 0; k < outside.size(); ++k) {
    b_sum[k + 1] = b_sum[k] + e[outside[k]];
    b_val.push_back(e[outside[k]]);
  }

  for (int j = 1; j <= size; ++j) {
    const double need = static_cast<double>(j) / (alpha * size);
    // Slack is convex in k with increments b_val[k] - need, so the minimum sits
    // where the outside values cross `need`. Values within a hair of `need`
    // form a plateau that is scanned in full.
    const auto lo = std::lower_bound(b_val.begin(), b_val.end(), need * (1.0 - 1e-9));
    const auto hi = std::upper_bound(b_val.begin(), b_val.end(), need * (1.0 + 1e-9));
    const int k_lo = static_cast<int>(lo - b_val.begin());
    const int k_hi = static_cast<int>(hi - b_val.begin());
    for (int k = k_lo; k <= k_hi; ++k) {
      const double mean = (a_sum[j] + b_sum[k]) / (j + k);
      cert.margin = std::min(cert.margin, mean - need);
      if (cert.member && !policy.geq(mean, need)) {
        fail(cert, take(inside, j) | take(outside, k), mean, need);
      }
    }
  }
  return cert;
}

Subset ebhbar_largest_fast(const std::vector<double>& e, double alpha,
                           const std::vector<int>& ordering, const ComparePolicy& policy) {
  validate_alpha(alpha);
  const int m = static_cast<int>(e.size());
  if (static_cast<int>(ordering.size()) != m) throw DomainError("ordering must have length m");
  for (int r = m; r > 0; --r) {
    Subset cand = Subset::prefix(ordering, r);
    if (ebhbar_member_fast(e, alpha, cand, policy).member) return cand;
  }
  return Subset{};
}

Subset ebhbar_largest_fast(const std::vector<double>& e, double alpha,
                           const ComparePolicy& policy) {
  return ebhbar_largest_fast(e, alpha, order_by_evalue_desc(e), policy);
}

MembershipCertificate monotone_member_fast(const ECollection& e, const std::vector<double>& p,
                                           double alpha, Subset r, const ComparePolicy& policy) {
  if (!e.flags().monotone_in_p) throw FlagError("monotone shortcut needs a monotone_in_p collection");
  validate_alpha(alpha);
  const int m = e.m();
  if (static_cast<int>(p.size()) != m) throw DomainError("p-values must have length m");
  check_range(m, r);
  MembershipCertificate cert;
  const int size = r.size();
  if (size == 0) return cert;
  const auto inside = sorted_indices(r, p, true);
  const auto outside = sorted_indices(Subset::full(m) - r, p, true);
  for (int a = 1; a <= size; ++a) {
    const double need = static_cast<double>(a) / (alpha * size);
    const Subset head = take(inside, a);
    for (int b = 0; b <= static_cast<int>(outside.size()); ++b) {
      const Subset s = head | take(outside, b);
      const double value = e.evaluate(s);
      cert.margin = std::min(cert.margin, value - need);
      if (cert.member && !policy.geq(value, need)) fail(cert, s, value, need);
    }
  }
  return cert;
}

Subset monotone_largest(const ECollection& e, const std::vector<double>& p, double alpha,
                        const ComparePolicy& policy) {
  if (!e.flags().monotone_in_p) throw FlagError("monotone shortcut needs a monotone_in_p collection");
  validate_alpha(alpha);
  const int m = e.m();
  if (static_cast<int>(p.size()) != m) throw DomainError("p-values must have length m");
  const auto order = order_by_pvalue_asc(p);

  if (e.source().builder != "by") {
    for (int r = m; r > 0; --r) {
      Subset cand = Subset::prefix(order, r);
      if (monotone_member_fast(e, p, alpha, cand, policy).member) return cand;
    }
    return Subset{};
  }

  // calib[s][i]: contribution of hypothesis i to e_S when |S| = s.
  const double build_alpha = e.source().param("alpha");
  const HarmonicTable h(m);
  std::vector<std::vector<double>> calib(m + 1, std::vector<double>(m, 0.0));
  for (int s = 1; s <= m; ++s) {
    for (int i = 0; i < m; ++i) {
      const double c = snapped_ceil(s * h[s] * p[i] / build_alpha);
      if (c <= s) calib[s][i] = 1.0 / (build_alpha * std::max(c, 1.0));
    }
  }
  std::vector<double> in_sum(m + 1), out_sum(m + 1);
  for (int r = m; r > 0; --r) {
    // Largest p first, inside the prefix and outside it.
    std::vector<int> inside(order.rbegin() + (m - r), order.rend());
    std::vector<int> outside(order.rbegin(), order.rbegin() + (m - r));
    bool ok = true;
    for (int s = 1; s <= m && ok; ++s) {
      in_sum[0] = out_sum[0] = 0.0;
      for (int a = 0; a < r; ++a) in_sum[a + 1] = in_sum[a] + calib[s][inside[a]];
      for (int b = 0; b < m - r; ++b) out_sum[b + 1] = out_sum[b] + calib[s][outside[b]];
      for (int a = std::max(1, s - (m - r)); a <= std::min(r, s) && ok; ++a) {
        const double value = in_sum[a] + out_sum[s - a];
        ok = policy.geq(value, static_cast<double>(a) / (alpha * r));
      }
    }
    if (ok) return Subset::prefix(order, r);
  }
  return Subset{};
}

MembershipCertificate closedbh_member_rule(const std::vector<double>& p, double alpha, Subset r,
                                           const ComparePolicy& policy) {
  validate_alpha(alpha);
  const int m = static_cast<int>(p.size());
  check_range(m, r);
  MembershipCertificate cert;
  if (!r.empty()) {
    const int bh = step_up_count(p, alpha / m);
    const double rr = std::max(bh, 1);
    const double value = m / (alpha * rr);
    Subset support;
    for (int i = 0; i < m; ++i)
      if (policy.leq(p[i], alpha * rr / m)) support = support.with(i);
    const int k = r.size();
    if (!r.subset_of(support)) {
      const int i = (r - support).indices().front();
      fail(cert, Subset{}.with(i), 0.0, 1.0 / (alpha * k));
      cert.margin = -1.0 / (alpha * k);
    } else {
      // Worst S: R together with every zero e-value.
      const int zeros = m - support.size();
      const double worst = k * value / (k + zeros);
      cert.margin = worst - 1.0 / alpha;
      if (static_cast<long>(m) * k < static_cast<long>(bh) * (k + zeros)) {
        fail(cert, r | (Subset::full(m) - support), worst, 1.0 / alpha);
      }
    }
  }
#ifdef ECLOSURE_ORACLE_CHECKS
  cross_check("closedbh_member_rule", cert, bh_collection(ValueVector(ValueKind::pvalue, p), alpha),
              alpha, r, policy);
#endif
  return cert;
}

MembershipCertificate closedknockoff_member_rule(const std::vector<double>& w, double alpha,
                                                 Subset r, const ComparePolicy& policy) {
  validate_alpha(alpha);
  const int m = static_cast<int>(w.size());
  check_range(m, r);
  MembershipCertificate cert;
  if (!r.empty()) {
    const auto stats = knockoff_threshold(w, alpha);
    const int k = r.size();
    if (!r.subset_of(stats.rejected)) {
      const int i = (r - stats.rejected).indices().front();
      fail(cert, Subset{}.with(i), 0.0, 1.0 / (alpha * k));
      cert.margin = -1.0 / (alpha * k);
    } else {
      Subset neg;
      for (int i = 0; i < m; ++i)
        if (w[i] <= -stats.c_alpha) neg = neg.with(i);
      // Worst S: R together with every negative statistic.
      const double worst = k / (1.0 + stats.f_neg);
      const double need = 1.0 / alpha;
      cert.margin = worst - need;
      if (!policy.geq(alpha * k, 1.0 + stats.f_neg)) fail(cert, r | neg, worst, need);
    }
  }
#ifdef ECLOSURE_ORACLE_CHECKS
  cross_check("closedknockoff_member_rule", cert,
              knockoff_collection(ValueVector(ValueKind::knockoff_stat, w), alpha), alpha, r,
              policy);
#endif
  return cert;
}

Subset eholm_fast(const std::vector<double>& e, double alpha, const ComparePolicy& policy) {
  validate_alpha(alpha);
  const double bar = 1.0 / alpha;
  std::vector<double> low;
  for (double v : e)
    if (policy.less(v, bar)) low.push_back(v);
  std::sort(low.begin(), low.end());
  double low_sum = 0.0;
  for (double v : low) low_sum += v;
  const double count = static_cast<double>(low.size());
  Subset out;
  for (int i = 0; i < static_cast<int>(e.size()); ++i) {
    if (!policy.geq(e[i], bar)) continue;
    if (policy.geq((e[i] + low_sum) / (1.0 + count), bar)) out = out.with(i);
  }
  return out;
}

ValueVector greedy_boundary_ebh(int k, int m, double alpha) {
  validate_alpha(alpha);
  if (m < 1 || m > kMaxHypotheses) throw DomainError("m must lie in [1, 64]");
  if (k < 1 || k > m) throw DomainError("k must lie in [1, m]");
  // v[i] is e_(i), 1-based; ranks beyond k stay 0.
  std::vector<double> v(m + 2, 0.0);
  for (int i = k; i >= 1; --i) {
    double best = i < k ? v[i + 1] : 0.0;
    double smallest = 0.0;
    for (int a = 0; a <= k - i; ++a) {
      if (a > 0) smallest += v[k - a + 1];
      // S = rank i, the a smallest chosen ranks above it, and all m - k zeros.
      const double need = static_cast<double>(1 + a + m - k) * (1 + a) / (alpha * k);
      best = std::max(best, need - smallest);
    }
    v[i] = best;
  }
  return ValueVector(ValueKind::evalue, std::vector<double>(v.begin() + 1, v.begin() + 1 + m));
}

}  // namespace eclosure
