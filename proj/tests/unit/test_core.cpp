#include <gtest/gtest.h>

#include <random>

#include "eclosure/core.hpp"
#include "support/helpers.hpp"

using namespace eclosure;
using testing_helpers::S;

TEST(Subset, BasicOperations) {
  Subset a = S({1, 3});
  EXPECT_EQ(a.size(), 2);
  EXPECT_TRUE(a.contains(0));
  EXPECT_FALSE(a.contains(1));
  EXPECT_EQ(a.to_string(), "{1,3}");
  EXPECT_EQ((a | S({2})).size(), 3);
  EXPECT_EQ(a - S({1}), S({3}));
  EXPECT_TRUE(S({3}).subset_of(a));
  EXPECT_EQ(Subset::full(4), S({1, 2, 3, 4}));
  EXPECT_EQ(Subset::full(64).size(), 64);
  EXPECT_EQ(Subset::prefix({2, 0, 1}, 2), S({1, 3}));
  EXPECT_THROW(Subset::full(65), DomainError);
  EXPECT_THROW(S({0}), DomainError);
}

TEST(ValueVector, RangeChecks) {
  EXPECT_NO_THROW(ValueVector(ValueKind::pvalue, {0.0, 1.0}));
  EXPECT_THROW(ValueVector(ValueKind::pvalue, {1.5}), DomainError);
  EXPECT_THROW(ValueVector(ValueKind::pvalue, {-0.1}), DomainError);
  EXPECT_NO_THROW(ValueVector(ValueKind::evalue, {0.0, kInf}));
  EXPECT_THROW(ValueVector(ValueKind::evalue, {-1.0}), DomainError);
  EXPECT_THROW(ValueVector(ValueKind::evalue, {std::nan("")}), DomainError);
  EXPECT_NO_THROW(ValueVector(ValueKind::knockoff_stat, {-3.0, 2.0}));
  EXPECT_THROW(ValueVector(ValueKind::knockoff_stat, {kInf}), DomainError);
  EXPECT_THROW(ValueVector(ValueKind::evalue, {}), DomainError);
  EXPECT_THROW(ValueVector(ValueKind::evalue, std::vector<double>(65, 1.0)), DomainError);
}

TEST(LossEval, Examples) {
  EXPECT_DOUBLE_EQ(Loss::fdp()(S({2, 3}), S({1, 2})), 0.5);
  EXPECT_DOUBLE_EQ(Loss::fdp()(S({1, 2, 3}), Subset{}), 0.0);
  EXPECT_DOUBLE_EQ(Loss::kfwer(2)(S({1, 2, 3}), S({1, 2})), 1.0);
  EXPECT_DOUBLE_EQ(Loss::kfwer(3)(S({1, 2, 3}), S({1, 2})), 0.0);
  EXPECT_DOUBLE_EQ(Loss::pfer()(S({1, 2, 3}), S({1, 2, 4})), 2.0);
  EXPECT_DOUBLE_EQ(Loss::fdx(0.5)(S({1}), S({1, 2})), 0.0);
  EXPECT_DOUBLE_EQ(Loss::fdx(0.4)(S({1}), S({1, 2})), 1.0);
  EXPECT_DOUBLE_EQ(Loss::aer()(S({1, 2, 3, 4}), S({1})), 0.25);
  EXPECT_DOUBLE_EQ(Loss::aer()(Subset{}, S({1})), 0.0);
  EXPECT_DOUBLE_EQ(Loss::true_discovery_shortfall(2)(S({1}), S({1, 2, 3})), 0.0);
  EXPECT_DOUBLE_EQ(Loss::true_discovery_shortfall(3)(S({1}), S({1, 2, 3})), 1.0);
}

TEST(LossEval, DomainErrors) {
  EXPECT_THROW(Loss::fdx(1.0), DomainError);
  EXPECT_THROW(Loss::fdx(-0.1), DomainError);
  EXPECT_THROW(Loss::kfwer(0), DomainError);
  EXPECT_THROW(ratio_to_expectation_loss(Loss::pfer(), Loss::discovery_count(), 0.0, 0.1),
               DomainError);
  EXPECT_THROW(ratio_to_expectation_loss(Loss::pfer(), Loss::discovery_count(), 1.0, 0.0),
               DomainError);
}

TEST(RatioLoss, MfdrExample) {
  Loss mfdr = ratio_to_expectation_loss(Loss::pfer(), Loss::discovery_count(), 1.0, 0.1);
  // (1 - 0.1 * 2) / 1
  EXPECT_NEAR(mfdr(S({1}), S({1, 2})), 0.8, 1e-15);
  EXPECT_DOUBLE_EQ(mfdr(S({1, 2}), Subset{}), 0.0);
  // Negative when most discoveries are true.
  EXPECT_LT(mfdr(Subset{}, S({1, 2})), 0.0);
  Loss same = ratio_to_expectation_loss(Loss::pfer(), Loss::pfer(), 2.0, 1.0);
  EXPECT_DOUBLE_EQ(same(S({1, 2}), S({2, 3})), 0.0);
}

TEST(LossEval, TableKindsVanishOnEmptyAndStayInRange) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::uint64_t> d(0, (1u << 8) - 1);
  const std::vector<Loss> losses = {Loss::fdp(), Loss::kfwer(2), Loss::pfer(), Loss::fdx(0.2),
                                    Loss::aer()};
  for (int t = 0; t < 500; ++t) {
    Subset n(d(rng)), r(d(rng));
    for (const auto& loss : losses) EXPECT_EQ(loss(n, Subset{}), 0.0);
    double fdp = Loss::fdp()(n, r);
    EXPECT_GE(fdp, 0.0);
    EXPECT_LE(fdp, 1.0);
    double k = Loss::kfwer(2)(n, r);
    EXPECT_TRUE(k == 0.0 || k == 1.0);
    double fdx = Loss::fdx(0.2)(n, r);
    EXPECT_TRUE(fdx == 0.0 || fdx == 1.0);
    double pfer = Loss::pfer()(n, r);
    EXPECT_EQ(pfer, std::floor(pfer));
    EXPECT_LE(pfer, 8.0);
    double aer = Loss::aer()(n, r);
    EXPECT_GE(aer, 0.0);
    EXPECT_LE(aer, 1.0);
  }
}

TEST(LossEval, PermutationEquivariant) {
  std::mt19937_64 rng(11);
  const int m = 7;
  std::uniform_int_distribution<std::uint64_t> d(0, (1u << m) - 1);
  std::vector<int> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  const std::vector<Loss> losses = {Loss::fdp(), Loss::kfwer(2), Loss::pfer(), Loss::fdx(0.3),
                                    Loss::aer()};
  for (int t = 0; t < 200; ++t) {
    std::shuffle(perm.begin(), perm.end(), rng);
    Subset n(d(rng)), r(d(rng)), pn, pr;
    for (int i = 0; i < m; ++i) {
      if (n.contains(i)) pn = pn.with(perm[i]);
      if (r.contains(i)) pr = pr.with(perm[i]);
    }
    for (const auto& loss : losses) EXPECT_EQ(loss(n, r), loss(pn, pr));
  }
}

TEST(LossSpec, RoundTrips) {
  for (const char* text : {"fdr", "fwer", "kfwer:3", "pfer", "fdx:0.25", "aer", "count", "td:2"}) {
    Loss l = Loss::parse(text, 0.1);
    EXPECT_EQ(Loss::parse(l.spec(), 0.1).spec(), l.spec());
  }
  Loss mfdr = Loss::parse("mfdr:2", 0.1);
  EXPECT_EQ(mfdr.kind(), Loss::Kind::ratio);
  EXPECT_NEAR(mfdr(S({1}), S({1, 2})), (1 - 0.2) / 2, 1e-15);
  Loss back = Loss::parse(mfdr.spec(), 0.5);
  EXPECT_NEAR(back(S({1}), S({1, 2})), (1 - 0.2) / 2, 1e-15);
  EXPECT_THROW(Loss::parse("bogus", 0.1), DomainError);
  EXPECT_THROW(Loss::parse("kfwer", 0.1), DomainError);
}

TEST(ComparePolicy, RelativeAndExact) {
  ComparePolicy rel;
  EXPECT_TRUE(rel.geq(1.0, 1.0));
  EXPECT_TRUE(rel.geq(1.0 - 1e-14, 1.0));
  EXPECT_FALSE(rel.geq(1.0 - 1e-9, 1.0));
  EXPECT_TRUE(rel.geq(kInf, kInf));
  EXPECT_TRUE(rel.geq(kInf, 5.0));
  EXPECT_FALSE(rel.geq(5.0, kInf));
  EXPECT_FALSE(rel.geq(0.0, 1e-300));
  // 0.1 * 3 lands just above 0.3 in binary; tolerance absorbs it.
  EXPECT_TRUE(rel.geq(0.3, 0.1 * 3));
  ComparePolicy exact = ComparePolicy::exact();
  EXPECT_FALSE(exact.geq(0.3, 0.1 * 3));
  EXPECT_TRUE(exact.geq(0.5, 0.25 * 2));
  EXPECT_THROW(ComparePolicy::relative(0.0), DomainError);
}

TEST(SafeRatio, Conventions) {
  EXPECT_EQ(safe_ratio(0.0, 0.0), 0.0);
  EXPECT_EQ(safe_ratio(1.0, 0.0), kInf);
  EXPECT_EQ(safe_ratio(1.0, kInf), 0.0);
  EXPECT_DOUBLE_EQ(safe_ratio(1.0, 4.0), 0.25);
}
