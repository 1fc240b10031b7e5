#pragma once

#include <vector>

#include "eclosure/collections.hpp"
#include "eclosure/engine.hpp"

namespace eclosure {

// Evidence sorted in descending order with s[k] the sum of the top k values.
struct PrefixSums {
  std::vector<int> order;
  std::vector<double> s;

  static PrefixSums descending(const std::vector<double>& e);
};

// g(a, r, b) = s_m - s_b + s_r - s_a - (m - b + r - a)(r - a)/(r alpha):
// |S| times the slack of the closure condition for R = top r and S made of
// ranks a+1..r and b+1..m.
double g_value(const PrefixSums& ps, int a, int r, int b, double alpha);

// FDR membership in the closed mean collection. For each count j taken from
// inside R the worst S adds the k smallest outside values; the slack is convex
// in k, so k is found by binary search. O(m log m).
MembershipCertificate ebhbar_member_fast(const std::vector<double>& e, double alpha, Subset r,
                                         const ComparePolicy& policy = {});

// Longest member prefix of the descending e order (or of `ordering`).
Subset ebhbar_largest_fast(const std::vector<double>& e, double alpha,
                           const ComparePolicy& policy = {});
Subset ebhbar_largest_fast(const std::vector<double>& e, double alpha,
                           const std::vector<int>& ordering, const ComparePolicy& policy = {});

// FDR membership for collections whose e_S decreases in every p_i and depends
// on S only through its p-values and size: checking S = (a largest p in R) +
// (b largest p outside R) for all a >= 1, b >= 0 suffices.
MembershipCertificate monotone_member_fast(const ECollection& e, const std::vector<double>& p,
                                           double alpha, Subset r,
                                           const ComparePolicy& policy = {});

// Longest member prefix of the ascending p order. BY collections use cached
// per-size calibrated values, O(m^3) overall.
Subset monotone_largest(const ECollection& e, const std::vector<double>& p, double alpha,
                        const ComparePolicy& policy = {});

// Closed BH collection: R is a member iff R is empty, or R is inside the BH set
// (size r) and m|R| >= r(|R| + m - r).
MembershipCertificate closedbh_member_rule(const std::vector<double>& p, double alpha, Subset r,
                                           const ComparePolicy& policy = {});

// Closed knockoff collection: R is a member iff R is empty, or R is inside the
// knockoff set and alpha|R| >= 1 + #{w <= -c}.
MembershipCertificate closedknockoff_member_rule(const std::vector<double>& w, double alpha,
                                                 Subset r, const ComparePolicy& policy = {});

// e-Holm: i is rejected iff every mean over {i} plus other hypotheses is at
// least 1/alpha. Only the others below 1/alpha can lower that mean. O(m log m).
Subset eholm_fast(const std::vector<double>& e, double alpha, const ComparePolicy& policy = {});

// Minimal descending e profile (zeros beyond rank k) for which the top k is
// mean-consistent, choosing e_(k), ..., e_(1) greedily in that order.
ValueVector greedy_boundary_ebh(int k, int m, double alpha);

}  // namespace eclosure
