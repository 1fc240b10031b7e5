#include <gtest/gtest.h>

#include <random>

#include "eclosure/collections.hpp"
#include "eclosure/engine.hpp"
#include "support/helpers.hpp"
#include "support/oracle.hpp"

using namespace eclosure;
using namespace testing_helpers;

namespace {

SetCollection maximal(const SetCollection& members) {
  SetCollection out;
  for (Subset r : members) {
    bool dominated = false;
    for (Subset q : members) dominated = dominated || (r != q && r.subset_of(q));
    if (!dominated) out.push_back(r);
  }
  return out;
}

}  // namespace

TEST(Member, Examples) {
  auto e = mean_collection(evals({30, 10}));
  // Under FDP, S = {2} needs (1/2)/alpha = 10 and gets exactly 10.
  auto fdr = member(e, Loss::fdp(), 0.05, S({1, 2}));
  EXPECT_TRUE(fdr.member);
  EXPECT_DOUBLE_EQ(fdr.margin, 0.0);
  // Under FWER the same S needs 1/alpha = 20.
  auto cert = member(e, Loss::fwer(), 0.05, S({1, 2}));
  EXPECT_FALSE(cert.member);
  ASSERT_TRUE(cert.witness);
  EXPECT_EQ(*cert.witness, S({2}));
  EXPECT_DOUBLE_EQ(cert.witness_e, 10.0);
  EXPECT_DOUBLE_EQ(cert.witness_bound, 20.0);
  EXPECT_FALSE(member(e, Loss::fdp(), 0.04, S({1, 2})).member);

  const double a = 0.05;
  EXPECT_TRUE(member(mean_collection(evals({3 / (2 * a), 1 / (2 * a)})), Loss::fdp(), a,
                     S({1, 2}))
                  .member);
  EXPECT_TRUE(member(e, Loss::fdp(), 0.05, Subset{}).member);
  EXPECT_TRUE(member(mean_collection(evals({0, 0})), Loss::kfwer(1), 0.05, Subset{}).member);
}

TEST(Member, WitnessViolatesWhenReevaluated) {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 300; ++t) {
    const int m = 6;
    auto e = mean_collection(evals(oracle::random_evalues(rng, m, 0.1)));
    const Subset r(oracle::random_subset(rng, m));
    auto cert = member(e, Loss::fdp(), 0.1, r);
    if (cert.member) {
      EXPECT_FALSE(cert.witness);
    } else {
      ASSERT_TRUE(cert.witness);
      EXPECT_LT(e(*cert.witness), Loss::fdp()(*cert.witness, r) / 0.1);
    }
  }
}

TEST(Member, MatchesDirectOracle) {
  std::mt19937_64 rng(43);
  for (int t = 0; t < 300; ++t) {
    const int m = 7;
    const double alpha = 0.1;
    auto ev = oracle::random_evalues(rng, m, alpha);
    auto e = mean_collection(evals(ev));
    const std::uint64_t r = oracle::random_subset(rng, m);
    auto fn = [&](std::uint64_t s) { return oracle::mean_e(ev, s); };
    EXPECT_EQ(member(e, Loss::fdp(), alpha, Subset(r)).member, oracle::fdr_member(m, fn, alpha, r));
  }
}

TEST(Member, SubsetsOfMembersNeedNotBeMembers) {
  const double a = 0.05;
  auto e = mean_collection(evals({3 / (2 * a), 1 / (2 * a)}));
  EXPECT_TRUE(member(e, Loss::fdp(), a, S({1, 2})).member);
  EXPECT_FALSE(member(e, Loss::fdp(), a, S({2})).member);
}

TEST(Member, PermutationEquivariant) {
  std::mt19937_64 rng(47);
  const int m = 6;
  std::vector<int> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  for (int t = 0; t < 200; ++t) {
    auto ev = oracle::random_evalues(rng, m, 0.1);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> pe(m);
    Subset r(oracle::random_subset(rng, m)), pr;
    for (int i = 0; i < m; ++i) {
      pe[perm[i]] = ev[i];
      if (r.contains(i)) pr = pr.with(perm[i]);
    }
    EXPECT_EQ(member(mean_collection(evals(ev)), Loss::fdp(), 0.1, r).member,
              member(mean_collection(evals(pe)), Loss::fdp(), 0.1, pr).member);
  }
}

TEST(Enumerate, WorkedExamples) {
  const double a = 0.05;
  auto two = enumerate_collection(mean_collection(evals({2 / a, 1 / (2 * a), 1 / (2 * a)})),
                                  Loss::fdp(), a);
  EXPECT_EQ(maximal(two), (SetCollection{S({1, 2}), S({1, 3})}));
  EXPECT_EQ(std::find(two.begin(), two.end(), S({1, 2, 3})), two.end());

  auto lone = enumerate_collection(mean_collection(evals({9 / (5 * a), 0})), Loss::fdp(), a);
  EXPECT_EQ(lone, SetCollection{Subset{}});
  auto raised =
      enumerate_collection(mean_collection(evals({9 / (5 * a), 1 / (5 * a)})), Loss::fdp(), a);
  EXPECT_EQ(raised, (SetCollection{Subset{}, S({1})}));

  EXPECT_EQ(enumerate_collection(mean_collection(evals({0, 0, 0})), Loss::fdp(), a),
            SetCollection{Subset{}});
}

TEST(Enumerate, MatchesOracleClosure) {
  std::mt19937_64 rng(53);
  for (int t = 0; t < 60; ++t) {
    const int m = 6;
    const double alpha = 0.1;
    auto ev = oracle::random_evalues(rng, m, alpha);
    auto got = enumerate_collection(mean_collection(evals(ev)), Loss::fdp(), alpha);
    auto want = oracle::fdr_closure(m, [&](std::uint64_t s) { return oracle::mean_e(ev, s); },
                                    alpha);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_EQ(got[i].bits(), want[i]);
  }
}

TEST(Enumerate, CapIsEnforced) {
  auto e = mean_collection(evals(std::vector<double>(25, 1.0)));
  EXPECT_THROW(enumerate_collection(e, Loss::fdp(), 0.1), CapExceeded);
  EXPECT_THROW(member(e, Loss::fdp(), 0.1, S({1})), CapExceeded);
}

TEST(LargestMember, Examples) {
  const double a = 0.05;
  std::vector<double> fig1;
  for (int i = 1; i <= 20; ++i) fig1.push_back(41 - 2 * i);
  auto e = mean_collection(evals(fig1));
  EXPECT_EQ(largest_member(e, Loss::fdp(), a, natural_order(e)), Subset::full(20));

  std::vector<double> ev(6, 0.0);
  ev[0] = (6 - 0.5) / a;
  ev[1] = 1 / (2 * a);
  auto f = mean_collection(evals(ev));
  EXPECT_EQ(largest_member(f, Loss::fdp(), a, natural_order(f)), S({1}));
  auto z = mean_collection(evals({0, 0, 0}));
  EXPECT_EQ(largest_member(z, Loss::fdp(), a, natural_order(z)), Subset{});
}

TEST(LargestMember, ExhaustiveFindsMaximumCardinality) {
  std::mt19937_64 rng(59);
  for (int t = 0; t < 60; ++t) {
    const int m = 6;
    auto e = mean_collection(evals(oracle::random_evalues(rng, m, 0.1)));
    auto all = enumerate_collection(e, Loss::fdp(), 0.1);
    int best = 0;
    for (Subset r : all) best = std::max(best, r.size());
    auto got = largest_member(e, Loss::fdp(), 0.1, natural_order(e), true);
    EXPECT_EQ(got.size(), best);
    EXPECT_TRUE(member(e, Loss::fdp(), 0.1, got).member);
    EXPECT_LE(largest_member(e, Loss::fdp(), 0.1, natural_order(e)).size(), best);
  }
}

TEST(TrueDiscoveryBound, Examples) {
  auto e = mean_collection(evals({30, 10, 0}));
  EXPECT_EQ(true_discovery_bound(e, 0.1, S({1, 2})), 1);
  auto big = mean_collection(evals({100, 100}));
  EXPECT_EQ(true_discovery_bound(big, 0.1, S({1, 2})), 2);
}

TEST(TrueDiscoveryBound, LocalTestFamily) {
  std::mt19937_64 rng(61);
  const double alpha = 0.1;
  for (int t = 0; t < 30; ++t) {
    const int m = 6;
    std::vector<int> phi(1u << m);
    for (auto& x : phi) x = static_cast<int>(rng() % 2);
    auto e = custom_collection(
        m, [phi, alpha](Subset s) { return phi[s.bits()] / alpha; }, {true, false, false},
        "phi");
    const Subset r(oracle::random_subset(rng, m));
    int want = r.size();
    for (std::uint64_t s = 1; s < (1u << m); ++s)
      if (!phi[s]) want = std::min(want, (r - Subset(s)).size());
    EXPECT_EQ(true_discovery_bound(e, alpha, r), want);
  }
}

TEST(TrueDiscoveryBound, EquivalentToShortfallLossMembership) {
  std::mt19937_64 rng(67);
  for (int t = 0; t < 60; ++t) {
    const int m = 6;
    auto e = mean_collection(evals(oracle::random_evalues(rng, m, 0.1)));
    const Subset r(oracle::random_subset(rng, m));
    const int bound = true_discovery_bound(e, 0.1, r);
    // For d > |R| the loss is identically 1 and the bound is capped at |R|.
    for (int d = 0; d <= r.size(); ++d) {
      const bool ok = member(e, Loss::true_discovery_shortfall(d), 0.1, r).member;
      EXPECT_EQ(bound >= d, ok) << "d=" << d;
    }
  }
}

TEST(CriticalAlpha, Examples) {
  auto e = mean_collection(evals({30, 10, 0}));
  EXPECT_NEAR(critical_alpha(e, Loss::fdp(), S({1})), 0.075, 1e-15);
  EXPECT_EQ(critical_alpha(e, Loss::fdp(), Subset{}), 0.0);
  EXPECT_EQ(critical_alpha(e, Loss::fdp(), S({3})), kInf);
  EXPECT_THROW(critical_alpha(by_collection(pvals({0.1}), 0.05), Loss::fdp(), S({1})), FlagError);
}

TEST(CriticalAlpha, MembershipFrontier) {
  std::mt19937_64 rng(71);
  for (int t = 0; t < 100; ++t) {
    const int m = 6;
    auto e = mean_collection(evals(oracle::random_evalues(rng, m, 0.1)));
    const Subset r(oracle::random_subset(rng, m));
    const double crit = critical_alpha(e, Loss::fdp(), r);
    for (double alpha : {0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0})
      EXPECT_EQ(member(e, Loss::fdp(), alpha, r).member, alpha >= crit * (1 - 1e-12));
    if (crit > 0 && crit <= 1) {
      EXPECT_TRUE(member(e, Loss::fdp(), crit, r).member);
    }
  }
}

TEST(FwerRejectSet, Examples) {
  EXPECT_EQ(fwer_reject_set(mean_collection(evals({30, 10, 0})), 0.1), S({1}));
  EXPECT_EQ(fwer_reject_set(mean_collection(evals({30, 30, 30})), 0.1), S({1, 2, 3}));
  EXPECT_EQ(fwer_reject_set(mean_collection(evals({0, 0, 0})), 0.1), Subset{});
}

TEST(FwerRejectSet, EqualsFwerClosureUnion) {
  std::mt19937_64 rng(73);
  for (int t = 0; t < 60; ++t) {
    const int m = 6;
    auto e = mean_collection(evals(oracle::random_evalues(rng, m, 0.1)));
    Subset uni;
    for (Subset r : enumerate_collection(e, Loss::fwer(), 0.1)) uni = uni | r;
    EXPECT_EQ(fwer_reject_set(e, 0.1), uni);
  }
}

TEST(Audit, FdrThenFwer) {
  auto e = mean_collection(evals({60, 30, 25, 0, 5}));
  const Subset fdr_set = largest_member(e, Loss::fdp(), 0.05, natural_order(e));
  const Subset fwer_set = fwer_reject_set(e, 0.05);
  auto audit = audit_post_hoc(
      e, {{Loss::fdp(), 0.05, fdr_set}, {Loss::fwer(), 0.05, fwer_set}, {Loss::fdp(), 0.05, {}}});
  EXPECT_TRUE(audit.passed());
  EXPECT_EQ(audit.collection_fingerprint, e.fingerprint());
  EXPECT_EQ(audit.steps.size(), 3u);
}

TEST(Audit, LowerAlphaFailsWithWitness) {
  auto e = mean_collection(evals({30, 10, 0}));
  const Subset r = S({1});
  ASSERT_NEAR(critical_alpha(e, Loss::fdp(), r), 0.075, 1e-15);
  auto audit = audit_post_hoc(e, {{Loss::fdp(), 0.1, r}, {Loss::fdp(), 0.05, r}});
  EXPECT_FALSE(audit.passed());
  EXPECT_TRUE(audit.steps[0].certificate.member);
  EXPECT_FALSE(audit.steps[1].certificate.member);
  EXPECT_TRUE(audit.steps[1].certificate.witness.has_value());
}

TEST(Audit, MixedAlphaNeedsIndependence) {
  auto e = bh_collection(pvals({0.01, 0.02, 0.5}), 0.1);
  EXPECT_THROW(audit_post_hoc(e, {{Loss::fdp(), 0.1, S({1})}, {Loss::fdp(), 0.05, S({1})}}),
               FlagError);
  EXPECT_NO_THROW(audit_post_hoc(e, {{Loss::fdp(), 0.1, S({1})}, {Loss::fwer(), 0.1, S({1})}}));
}

TEST(Orderings, TiesBySmallestIndex) {
  EXPECT_EQ(order_by_evalue_desc({1, 3, 3, 0}), (std::vector<int>{1, 2, 0, 3}));
  EXPECT_EQ(order_by_pvalue_asc({0.5, 0.1, 0.1}), (std::vector<int>{1, 2, 0}));
  EXPECT_EQ(order_by_w_desc({-1, 2, 2}), (std::vector<int>{1, 2, 0}));
}
