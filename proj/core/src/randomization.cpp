#include "eclosure/randomization.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

namespace eclosure {

TruncationGrid::TruncationGrid(double alpha, int m, int cap) : alpha_(alpha), m_(m), cap_(cap) {
  validate_alpha(alpha);
  if (m < 1) throw DomainError("grid needs m >= 1");
  if (cap < 1) throw DomainError("grid needs cap >= 1");
  // Key by the reduced fraction r/k so equal rationals give one value.
  std::map<std::pair<int, int>, double> unique;
  for (int k = 1; k <= m; ++k) {
    for (int r = 1; r <= std::min(k, cap); ++r) {
      const int g = std::gcd(r, k);
      unique.emplace(std::make_pair(r / g, k / g), static_cast<double>(r) / (alpha * k));
    }
  }
  values_.push_back(0.0);
  for (const auto& [key, v] : unique) values_.push_back(v);
  std::sort(values_.begin(), values_.end());
}

double truncate(double x, const TruncationGrid& grid) {
  if (!(x >= 0.0)) throw DomainError("truncate requires x >= 0");
  const ComparePolicy policy;
  const auto& v = grid.values();
  // First element strictly above x, then step back; tolerance lets x that sits
  // on a grid value up to rounding keep that value.
  auto it = std::upper_bound(v.begin(), v.end(), x);
  if (it != v.end() && policy.geq(x, *it)) ++it;
  return *(it - 1);
}

double boost_factor(const std::function<double(double)>& oracle, double tol, double b_max) {
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
  if (!(b_max >= 1.0)) throw DomainError("b_max must be >= 1");
  if (oracle(1.0) > 1.0) {
    throw DomainError("expectation at b = 1 exceeds 1; the input is not an e-value");
  }
  if (oracle(b_max) <= 1.0) return b_max;
  double lo = 1.0, hi = b_max;
  while (hi - lo > tol * std::max(1.0, lo)) {
    const double mid = 0.5 * (lo + hi);
    if (oracle(mid) <= 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

ECollection boosted_collection(const ECollection& base, double alpha,
                               const std::function<double(int)>& factor_for_size) {
  const int m = base.m();
  auto grids = std::make_shared<std::vector<TruncationGrid>>();
  std::vector<double> factors(m + 1, 1.0);
  for (int s = 1; s <= m; ++s) {
    grids->emplace_back(alpha, m, s);
    factors[s] = factor_for_size(s);
    if (!(factors[s] >= 1.0)) throw DomainError("boost factors must be >= 1");
  }
  CollectionSource src = base.source();
  src.note += (src.note.empty() ? "" : ";") + std::string("boosted");
  src.params.push_back({"boost_alpha", alpha});
  for (int s = 1; s <= m; ++s) src.params.push_back({"b" + std::to_string(s), factors[s]});
  auto eval = [base, grids, factors](Subset s) {
    const double e = base.evaluate(s);
    if (e == kInf) return kInf;
    return truncate(factors[s.size()] * e, (*grids)[s.size() - 1]);
  };
  CollectionFlags flags{false, false, false};
  if (base.restricted()) {
    return ECollection(m, eval, flags, std::move(src), {},
                       [base](Subset s) { return base.feasible(s); });
  }
  return ECollection(m, eval, flags, std::move(src));
}

RoundingSource RoundingSource::fixed(double u) {
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("u must lie in [0, 1]");
  return RoundingSource{u, 0, false};
}

RoundingSource RoundingSource::from_seed(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  return RoundingSource{unif(rng), seed, true};
}

ECollection stochastic_round(const ECollection& base, const Loss& loss, double alpha,
                             const RoundingSource& rounding, const ComparePolicy& policy) {
  if (!(rounding.u >= 0.0 && rounding.u <= 1.0)) throw DomainError("u must lie in [0, 1]");
  const int m = base.m();
  const SetCollection closure = enumerate_collection(base, loss, alpha, policy);
  const std::uint64_t end = std::uint64_t{1} << m;

  auto table = std::make_shared<std::vector<double>>(end, kInf);
  std::vector<double> threshold(end, 0.0);
  double b_cap = 0.0;
  for (std::uint64_t s = 1; s < end; ++s) {
    if (!base.feasible(Subset(s))) continue;
    double t = 0.0;
    for (Subset r : closure) t = std::max(t, loss(Subset(s), r) / alpha);
    threshold[s] = t;
    b_cap = std::max(b_cap, t);
  }
  for (std::uint64_t s = 1; s < end; ++s) {
    if (!base.feasible(Subset(s))) continue;
    const double t = threshold[s];
    const double e = base.evaluate(Subset(s));
    const bool up = b_cap > 0.0 && rounding.u <= (e - t) / b_cap;
    (*table)[s] = up ? b_cap : t;
  }

  CollectionSource src = base.source();
  src.note += (src.note.empty() ? "" : ";") + std::string("rounded:") + loss.spec();
  src.params.push_back({"round_alpha", alpha});
  src.params.push_back({"u", rounding.u});
  src.params.push_back({"b_cap", b_cap});
  auto eval = [table](Subset s) { return (*table)[s.bits()]; };
  CollectionFlags flags{false, false, false};
  if (base.restricted()) {
    return ECollection(m, eval, flags, std::move(src), {},
                       [base](Subset s) { return base.feasible(s); });
  }
  return ECollection(m, eval, flags, std::move(src));
}

}  // namespace eclosure
