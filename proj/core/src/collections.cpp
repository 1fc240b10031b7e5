#include "eclosure/collections.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <set>
#include <sstream>

#include "eclosure/calibrators.hpp"

namespace eclosure {

namespace {

class Fnv1a {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 1099511628211ull;
    }
  }
  void str(const std::string& s) {
    std::uint64_t n = s.size();
    bytes(&n, sizeof n);
    bytes(s.data(), s.size());
  }
  void num(double x) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, sizeof bits);
    bytes(&bits, sizeof bits);
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 14695981039346656037ull;
};

std::uint64_t fingerprint_of(int m, const CollectionFlags& f, const CollectionSource& src) {
  Fnv1a h;
  h.str(src.builder);
  h.str(to_string(src.kind));
  h.num(m);
  h.num(f.alpha_independent);
  h.num(f.monotone_in_p);
  h.num(f.mean_type);
  for (double v : src.values) h.num(v);
  for (const auto& [name, value] : src.params) {
    h.str(name);
    h.num(value);
  }
  h.str(src.note);
  return h.value();
}

double sum_over(const std::vector<double>& v, Subset s) {
  double total = 0.0;
  for (std::uint64_t b = s.bits(); b; b &= b - 1) total += v[std::countr_zero(b)];
  return total;
}

std::vector<int> ascending_order(const std::vector<double>& p) {
  std::vector<int> order(p.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return p[a] < p[b]; });
  return order;
}

ECollection mean_over(int m, std::vector<double> base, CollectionFlags flags,
                      CollectionSource source) {
  flags.mean_type = true;
  auto shared = std::make_shared<const std::vector<double>>(base);
  auto eval = [shared](Subset s) { return sum_over(*shared, s) / s.size(); };
  return ECollection(m, eval, flags, std::move(source), std::move(base));
}

}  // namespace

double CollectionSource::param(const std::string& name) const {
  for (const auto& [n, v] : params)
    if (n == name) return v;
  throw std::out_of_range("collection has no parameter '" + name + "'");
}

bool CollectionSource::has_param(const std::string& name) const {
  for (const auto& [n, v] : params)
    if (n == name) return true;
  return false;
}

ECollection::ECollection(int m, Evaluator evaluate, CollectionFlags flags, CollectionSource source,
                         std::vector<double> base, Feasibility feasible) {
  if (m < 1 || m > kMaxHypotheses) throw DomainError("m must lie in [1, 64]");
  if (flags.mean_type && static_cast<int>(base.size()) != m)
    throw std::logic_error("mean-type collection needs its base vector");
  auto fp = fingerprint_of(m, flags, source);
  impl_ = std::make_shared<const Impl>(Impl{m, std::move(evaluate), flags, std::move(source),
                                            std::move(base), std::move(feasible), fp});
}

double ECollection::evaluate(Subset s) const {
  if (s.empty()) throw DomainError("e_S is only defined for nonempty S");
  if (!s.subset_of(Subset::full(impl_->m))) throw DomainError("subset exceeds [m]");
  if (impl_->feasible && !impl_->feasible(s)) return kInf;
  return impl_->evaluate(s);
}

std::string ECollection::fingerprint_hex() const {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << impl_->fingerprint;
  return os.str();
}

KnockoffStats knockoff_threshold(const std::vector<double>& w, double alpha) {
  validate_alpha(alpha);
  std::set<double> candidates;
  for (double x : w)
    if (x != 0.0) candidates.insert(std::fabs(x));
  KnockoffStats out{w, kInf, 0, Subset{}};
  for (double c : candidates) {
    int neg = 0, pos = 0;
    for (double x : w) {
      if (x <= -c) ++neg;
      if (x >= c) ++pos;
    }
    if (pos > 0 && (1.0 + neg) / pos <= alpha) {
      out.c_alpha = c;
      break;
    }
  }
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] <= -out.c_alpha) ++out.f_neg;
    if (w[i] >= out.c_alpha) out.rejected = out.rejected.with(static_cast<int>(i));
  }
  return out;
}

int step_up_count(const std::vector<double>& p, double level) {
  const ComparePolicy policy;
  std::vector<double> sorted = p;
  std::sort(sorted.begin(), sorted.end());
  for (int i = static_cast<int>(sorted.size()); i >= 1; --i)
    if (policy.leq(sorted[i - 1], i * level)) return i;
  return 0;
}

Subset smallest_p(const std::vector<double>& p, int count) {
  return Subset::prefix(ascending_order(p), count);
}

double storey_pi0(const std::vector<double>& p, double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw DomainError("lambda must lie in (0, 1)");
  const double m = static_cast<double>(p.size());
  int above = 0;
  for (double x : p)
    if (x > lambda) ++above;
  double best = 0.0;
  for (double x : p) {
    // Setting p_i to 0 removes it from the count only when it exceeded lambda.
    int count = above - (x > lambda ? 1 : 0);
    best = std::max(best, (1.0 + count) / (m * (1.0 - lambda)));
  }
  return best;
}

ECollection mean_collection(const ValueVector& e_values) {
  e_values.require(ValueKind::evalue, "mean_collection");
  CollectionSource src{"mean", ValueKind::evalue, e_values.values(), {}, ""};
  return mean_over(e_values.size(), e_values.values(), {true, false, true}, std::move(src));
}

ECollection product_collection(const ValueVector& e_values) {
  e_values.require(ValueKind::evalue, "product_collection");
  auto logs = std::make_shared<std::vector<double>>();
  for (double e : e_values.values()) logs->push_back(std::log(e));  // log 0 = -inf
  auto eval = [logs](Subset s) {
    double total = 0.0;
    for (std::uint64_t b = s.bits(); b; b &= b - 1) {
      double l = (*logs)[std::countr_zero(b)];
      if (l == -kInf) return 0.0;  // a zero factor absorbs, even against +inf
      total += l;
    }
    return std::exp(total);
  };
  CollectionSource src{"product", ValueKind::evalue, e_values.values(), {}, ""};
  return ECollection(e_values.size(), eval, {true, false, false}, std::move(src));
}

ECollection by_collection(const ValueVector& p_values, double alpha) {
  p_values.require(ValueKind::pvalue, "by_collection");
  validate_alpha(alpha);
  const int m = p_values.size();
  auto p = std::make_shared<const std::vector<double>>(p_values.values());
  auto h = std::make_shared<const HarmonicTable>(m);
  auto eval = [p, h, alpha](Subset s) {
    const int k = s.size();
    const double hk = (*h)[k];
    double total = 0.0;
    for (std::uint64_t b = s.bits(); b; b &= b - 1) {
      const double c = snapped_ceil(k * hk * (*p)[std::countr_zero(b)] / alpha);
      if (c <= k) total += 1.0 / (alpha * std::max(c, 1.0));
    }
    return total;
  };
  CollectionSource src{"by", ValueKind::pvalue, p_values.values(), {{"alpha", alpha}}, ""};
  return ECollection(m, eval, {false, true, false}, std::move(src));
}

ECollection su_collection(const ValueVector& p_values, double alpha) {
  p_values.require(ValueKind::pvalue, "su_collection");
  const SuConstants su(alpha);
  const int m = p_values.size();
  auto p = std::make_shared<const std::vector<double>>(p_values.values());
  auto order = std::make_shared<const std::vector<int>>(ascending_order(p_values.values()));
  auto eval = [p, order, su](Subset s) {
    const double n = s.size();
    double simes = 1.0;
    int rank = 0;
    for (int i : *order) {
      if (!s.contains(i)) continue;
      ++rank;
      simes = std::min(simes, n * (*p)[i] / rank);
    }
    return 1.0 / std::max(su.ell * simes, su.alpha);
  };
  CollectionSource src{"su", ValueKind::pvalue, p_values.values(),
                       {{"alpha", alpha}, {"ell", su.ell}}, ""};
  return ECollection(m, eval, {false, true, false}, std::move(src));
}

ECollection bh_collection(const ValueVector& p_values, double alpha) {
  p_values.require(ValueKind::pvalue, "bh_collection");
  validate_alpha(alpha);
  const int m = p_values.size();
  const auto& p = p_values.values();
  const int r = step_up_count(p, alpha / m);
  const double rr = std::max(r, 1);
  const double value = m / (alpha * rr);
  const ComparePolicy policy;
  std::vector<double> base(m, 0.0);
  for (int i = 0; i < m; ++i)
    if (policy.leq(p[i], alpha * rr / m)) base[i] = value;
  CollectionSource src{"bh", ValueKind::pvalue, p, {{"alpha", alpha}, {"r", double(r)}}, ""};
  return mean_over(m, std::move(base), {false, false, true}, std::move(src));
}

ECollection storey_adabh_collection(const ValueVector& p_values, double alpha, double lambda) {
  p_values.require(ValueKind::pvalue, "storey_adabh_collection");
  validate_alpha(alpha);
  const int m = p_values.size();
  const auto& p = p_values.values();
  const double pi0 = storey_pi0(p, lambda);
  const int r = step_up_count(p, alpha / (pi0 * m));
  const double rr = std::max(r, 1);
  const double value = m / (alpha * rr);
  const ComparePolicy policy;
  std::vector<double> base(m, 0.0);
  for (int i = 0; i < m; ++i)
    if (policy.leq(p[i], alpha * rr / (m * pi0))) base[i] = value;
  CollectionSource src{"adabh",
                       ValueKind::pvalue,
                       p,
                       {{"alpha", alpha}, {"lambda", lambda}, {"pi0", pi0}, {"r", double(r)}},
                       ""};
  return mean_over(m, std::move(base), {false, false, true}, std::move(src));
}

ECollection knockoff_collection(const ValueVector& w, double alpha) {
  w.require(ValueKind::knockoff_stat, "knockoff_collection");
  const auto stats = knockoff_threshold(w.values(), alpha);
  std::uint64_t pos = 0, neg = 0;
  for (int i = 0; i < w.size(); ++i) {
    if (w[i] >= stats.c_alpha) pos |= std::uint64_t{1} << i;
    if (w[i] <= -stats.c_alpha) neg |= std::uint64_t{1} << i;
  }
  auto eval = [pos, neg](Subset s) {
    return static_cast<double>(std::popcount(s.bits() & pos)) /
           (1.0 + std::popcount(s.bits() & neg));
  };
  CollectionSource src{"knockoff",
                       ValueKind::knockoff_stat,
                       w.values(),
                       {{"alpha", alpha}, {"c_alpha", stats.c_alpha}, {"f_neg", double(stats.f_neg)}},
                       ""};
  return ECollection(w.size(), eval, {false, false, false}, std::move(src));
}

ECollection compound_to_collection(const ValueVector& compound_e) {
  compound_e.require(ValueKind::evalue, "compound_to_collection");
  const int m = compound_e.size();
  auto e = std::make_shared<const std::vector<double>>(compound_e.values());
  auto eval = [e, m](Subset s) { return sum_over(*e, s) / m; };
  CollectionSource src{"compound", ValueKind::evalue, compound_e.values(), {}, ""};
  return ECollection(m, eval, {true, false, false}, std::move(src));
}

ECollection from_procedure_collection(const SetCollection& family, const Loss& loss, double alpha,
                                      int m) {
  validate_alpha(alpha);
  if (family.empty()) throw DomainError("procedure family must be nonempty");
  const Subset all = Subset::full(m);
  CollectionSource src{"from_procedure", ValueKind::evalue, {}, {{"alpha", alpha}}, loss.spec()};
  for (Subset r : family) {
    if (!r.subset_of(all)) throw DomainError("family member exceeds [m]");
    src.values.push_back(static_cast<double>(r.bits()));
  }
  auto fam = std::make_shared<const SetCollection>(family);
  auto eval = [fam, loss, alpha](Subset s) {
    double best = 0.0;
    for (Subset r : *fam) best = std::max(best, loss(s, r) / alpha);
    return best;
  };
  return ECollection(m, eval, {false, false, false}, std::move(src));
}

ECollection restrict_feasible(const ECollection& base, ECollection::Feasibility feasible,
                              const std::string& label) {
  CollectionSource src = base.source();
  src.note += (src.note.empty() ? "" : ";") + std::string("restricted:") + label;
  src.params.push_back({"base_fingerprint", static_cast<double>(base.fingerprint())});
  // Infeasible sets evaluate to +inf, so the worst-case structure the mean and
  // monotone shortcuts rely on no longer holds.
  CollectionFlags flags{base.flags().alpha_independent, false, false};
  auto pred = feasible;
  if (base.restricted()) {
    pred = [base, feasible](Subset s) { return base.feasible(s) && feasible(s); };
  }
  auto eval = [base](Subset s) { return base.evaluate(s); };
  return ECollection(base.m(), eval, flags, std::move(src), {}, std::move(pred));
}

ECollection custom_collection(int m, ECollection::Evaluator evaluate, CollectionFlags flags,
                              const std::string& label) {
  CollectionSource src{"custom", ValueKind::evalue, {}, {}, label};
  if (flags.mean_type) throw std::logic_error("custom collections cannot claim mean_type");
  return ECollection(m, std::move(evaluate), flags, std::move(src));
}

ECollection::Feasibility pairwise_equality_feasibility(int parameters) {
  if (parameters < 2) throw DomainError("need at least two parameters");
  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < parameters; ++a)
    for (int b = a + 1; b < parameters; ++b) pairs.emplace_back(a, b);
  if (pairs.size() > static_cast<std::size_t>(kMaxHypotheses))
    throw DomainError("too many pairwise hypotheses");
  return [pairs, parameters](Subset s) {
    std::vector<int> parent(parameters);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (std::size_t h = 0; h < pairs.size(); ++h)
      if (s.contains(static_cast<int>(h))) parent[find(pairs[h].first)] = find(pairs[h].second);
    // S is attainable iff it contains every pair inside each equality block.
    for (std::size_t h = 0; h < pairs.size(); ++h)
      if (find(pairs[h].first) == find(pairs[h].second) && !s.contains(static_cast<int>(h)))
        return false;
    return true;
  };
}

}  // namespace eclosure
