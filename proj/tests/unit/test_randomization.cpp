#include <gtest/gtest.h>

#include <random>

#include "eclosure/calibrators.hpp"
#include "eclosure/collections.hpp"
#include "eclosure/randomization.hpp"
#include "support/helpers.hpp"
#include "support/oracle.hpp"

using namespace eclosure;
using namespace testing_helpers;

namespace {

bool includes(const SetCollection& big, const SetCollection& small) {
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

}  // namespace

TEST(TruncationGrid, Values) {
  TruncationGrid grid(0.5, 3, 2);
  // 1/(0.5*3), 2/(0.5*3), 1/(0.5*2), 2/(0.5*2) = 1/(0.5*1)
  const std::vector<double> want = {0.0, 2.0 / 3, 1.0, 4.0 / 3, 2.0};
  ASSERT_EQ(grid.values().size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_DOUBLE_EQ(grid.values()[i], want[i]);
  EXPECT_THROW(TruncationGrid(0.0, 3, 2), DomainError);
}

TEST(Truncate, Examples) {
  TruncationGrid grid(0.5, 3, 2);
  EXPECT_DOUBLE_EQ(truncate(1.5, grid), 4.0 / 3);
  EXPECT_DOUBLE_EQ(truncate(0.5, grid), 0.0);
  EXPECT_DOUBLE_EQ(truncate(100.0, grid), 2.0);
  EXPECT_DOUBLE_EQ(truncate(kInf, grid), 2.0);
  // A value a rounding error below a grid point keeps that point.
  EXPECT_DOUBLE_EQ(truncate(4.0 / 3 * (1 - 1e-15), grid), 4.0 / 3);
  EXPECT_THROW(truncate(-1.0, grid), DomainError);
}

TEST(BoostFactor, ConstantEvalue) {
  // E == 1: the largest b with T(b) <= 1 sits just below the first grid
  // element above 1.
  TruncationGrid grid(0.5, 3, 2);
  auto oracle = [&](double b) { return truncate(b * 1.0, grid); };
  const double b = boost_factor(oracle, 1e-10);
  EXPECT_NEAR(b, 4.0 / 3, 1e-9);
  EXPECT_LE(oracle(b), 1.0);
  EXPECT_GT(oracle(b * (1 + 1e-8)), 1.0);
  EXPECT_THROW(boost_factor([](double) { return 2.0; }), DomainError);
  EXPECT_EQ(boost_factor([](double) { return 0.5; }, 1e-9, 10.0), 10.0);
}

TEST(BoostFactor, UniformCalibratedAnalyticOracle) {
  // e = 1/(2 sqrt(p)) with p uniform has mean 1. Truncation by the singleton
  // grid {0, 1/alpha} gives E[T(b e)] = (1/alpha) P(b e >= 1/alpha)
  // = (1/alpha) min(1, (alpha b / 2)^2).
  const double alpha = 0.2;
  auto oracle = [alpha](double b) {
    const double q = std::min(1.0, alpha * b / 2);
    return q * q / alpha;
  };
  const double b = boost_factor(oracle, 1e-12);
  EXPECT_NEAR(b, 2 * std::sqrt(alpha) / alpha, 1e-9);
}

TEST(BoostedCollection, ClosureDominatesBase) {
  std::mt19937_64 rng(137);
  const double alpha = 0.2;
  for (int t = 0; t < 200; ++t) {
    const int m = 3 + static_cast<int>(rng() % 4);
    auto pv = oracle::random_pvalues(rng, m, alpha);
    std::vector<double> ev;
    for (double p : pv) ev.push_back(su_calibrate(p, alpha));
    auto base = mean_collection(evals(ev));
    // Factor 1 makes boosting a pure truncation; closure must not shrink
    // because every threshold f_S(R)/alpha is a grid point.
    auto boosted = boosted_collection(base, alpha, [](int) { return 1.0; });
    EXPECT_TRUE(includes(enumerate_collection(boosted, Loss::fdp(), alpha),
                         enumerate_collection(base, Loss::fdp(), alpha)));
    auto pumped = boosted_collection(base, alpha, [](int s) { return 1.0 + 0.1 * s; });
    EXPECT_TRUE(includes(enumerate_collection(pumped, Loss::fdp(), alpha),
                         enumerate_collection(base, Loss::fdp(), alpha)));
  }
}

TEST(StochasticRound, ClosureOnlyGrows) {
  std::mt19937_64 rng(139);
  const double alpha = 0.1;
  for (int t = 0; t < 200; ++t) {
    const int m = 3 + static_cast<int>(rng() % 5);
    auto base = mean_collection(evals(oracle::random_evalues(rng, m, alpha)));
    const auto before = enumerate_collection(base, Loss::fdp(), alpha);
    for (double u : {0.0, 0.3, 0.7, 1.0}) {
      auto rounded = stochastic_round(base, Loss::fdp(), alpha, RoundingSource::fixed(u));
      EXPECT_TRUE(includes(enumerate_collection(rounded, Loss::fdp(), alpha), before))
          << "u=" << u;
    }
  }
}

TEST(StochasticRound, ExpectationDoesNotIncrease) {
  // E_u[e'_S] = t_S + (b_cap - t_S) * min(1, max(0, e_S - t_S)/b_cap) <= e_S
  // whenever e_S >= t_S; averaged here over a fine grid of u.
  std::mt19937_64 rng(149);
  const double alpha = 0.1;
  auto base = mean_collection(evals(oracle::random_evalues(rng, 5, alpha)));
  const int n = 2001;
  std::vector<double> mean(32, 0.0);
  for (int k = 0; k < n; ++k) {
    auto rounded = stochastic_round(base, Loss::fdp(), alpha,
                                    RoundingSource::fixed(static_cast<double>(k) / (n - 1)));
    for (std::uint64_t s = 1; s < 32; ++s) mean[s] += rounded(Subset(s)) / n;
  }
  const auto closure = enumerate_collection(base, Loss::fdp(), alpha);
  for (std::uint64_t s = 1; s < 32; ++s) {
    double t = 0.0;
    for (Subset r : closure) t = std::max(t, Loss::fdp()(Subset(s), r) / alpha);
    const double e = base(Subset(s));
    if (e >= t) {
      EXPECT_LE(mean[s], e + 0.05 * (1 + e)) << s;
    }
  }
}

TEST(StochasticRound, SeededSourceIsDeterministic) {
  EXPECT_EQ(RoundingSource::from_seed(7).u, RoundingSource::from_seed(7).u);
  EXPECT_NE(RoundingSource::from_seed(7).u, RoundingSource::from_seed(8).u);
  EXPECT_THROW(RoundingSource::fixed(1.5), DomainError);
}
