#pragma once

#include <optional>
#include <vector>

#include "eclosure/collections.hpp"
#include "eclosure/core.hpp"

namespace eclosure {

struct MembershipCertificate {
  bool member = true;
  // First violating S in enumeration order when member is false.
  std::optional<Subset> witness;
  // min over checked S of e_S - f_S(R)/alpha (+inf when nothing was checked).
  double margin = kInf;
  double witness_e = 0.0;
  double witness_bound = 0.0;
};

// Largest m accepted by exhaustive membership (default 24) and by full
// enumeration of the closure (default 20). ECLOSURE_ENUM_CAP overrides both.
int member_cap();
int enumerate_cap();

// Orders hypotheses by evidence, ties broken by the smallest index.
std::vector<int> order_by_evalue_desc(const std::vector<double>& e);
std::vector<int> order_by_pvalue_asc(const std::vector<double>& p);
std::vector<int> order_by_w_desc(const std::vector<double>& w);
// Evidence order appropriate to the collection's input kind.
std::vector<int> natural_order(const ECollection& e);

// R is a member iff e_S >= f_S(R)/alpha for every nonempty feasible S.
MembershipCertificate member(const ECollection& e, const Loss& loss, double alpha, Subset r,
                             const ComparePolicy& policy = {});

// Every member R, ascending by bitmask; always contains the empty set.
SetCollection enumerate_collection(const ECollection& e, const Loss& loss, double alpha,
                                   const ComparePolicy& policy = {});

// Longest member prefix of `ordering`. With exhaustive=true, a member of
// maximal cardinality over all subsets (smallest bitmask among ties).
Subset largest_member(const ECollection& e, const Loss& loss, double alpha,
                      const std::vector<int>& ordering, bool exhaustive = false,
                      const ComparePolicy& policy = {});

// min{|R \ S| : S feasible, e_S < 1/alpha}, or |R| when no S qualifies.
int true_discovery_bound(const ECollection& e, double alpha, Subset r,
                         const ComparePolicy& policy = {});

// max_S f_S(R)/e_S with 0/0 = 0 and x/0 = +inf. Requires alpha independence.
double critical_alpha(const ECollection& e, const Loss& loss, Subset r);

// {i : {i} is an FDR member}; the FWER closure for mean-type collections.
Subset fwer_reject_set(const ECollection& e, double alpha, const ComparePolicy& policy = {});

struct PostHocStep {
  Loss loss;
  double alpha;
  Subset rejected;
};

struct AuditEntry {
  PostHocStep step;
  MembershipCertificate certificate;
};

struct PostHocAudit {
  std::vector<AuditEntry> steps;
  std::uint64_t collection_fingerprint = 0;

  bool passed() const;
};

PostHocAudit audit_post_hoc(const ECollection& e, const std::vector<PostHocStep>& steps,
                            const ComparePolicy& policy = {});

}  // namespace eclosure
