#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "eclosure/collections.hpp"
#include "eclosure/engine.hpp"

namespace eclosure {

// Attainable loss/alpha thresholds {r/(alpha k) : k in [m], r in [min(k, cap)]} and 0.
class TruncationGrid {
 public:
  TruncationGrid(double alpha, int m, int cap);

  double alpha() const { return alpha_; }
  int m() const { return m_; }
  int cap() const { return cap_; }
  const std::vector<double>& values() const { return values_; }

 private:
  double alpha_;
  int m_;
  int cap_;
  std::vector<double> values_;
};

// Largest grid element <= x (comparison under the default policy).
double truncate(double x, const TruncationGrid& grid);

// Largest b in [1, b_max] with oracle(b) <= 1, by bisection to `tol`, where
// oracle(b) = E[T(b e)] is nondecreasing. Throws DomainError if oracle(1) > 1.
double boost_factor(const std::function<double(double)>& expectation_oracle, double tol = 1e-9,
                    double b_max = 1e6);

// e'_S = T_S(b_{|S|} e_S) with T_S the grid capped at |S|.
ECollection boosted_collection(const ECollection& base, double alpha,
                               const std::function<double(int)>& factor_for_size);

struct RoundingSource {
  double u = 0.5;
  std::uint64_t seed = 0;
  bool seeded = false;

  static RoundingSource fixed(double u);
  static RoundingSource from_seed(std::uint64_t seed);
};

// Rounds every e_S to either t_S = max_{R in closure} f_S(R)/alpha or the
// largest such threshold b_cap, using one shared uniform u:
//   e'_S = t_S + (b_cap - t_S) 1{u <= (e_S - t_S)/b_cap}.
// For each S, E_u[e'_S] <= e_S and e'_S >= t_S, so the closure can only grow.
ECollection stochastic_round(const ECollection& base, const Loss& loss, double alpha,
                             const RoundingSource& rounding, const ComparePolicy& policy = {});

}  // namespace eclosure
