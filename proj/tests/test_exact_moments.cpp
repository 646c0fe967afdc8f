#include <gtest/gtest.h>

#include <functional>
#include <numeric>

#include "ranklq/exact_moments.hpp"
#include "test_util.hpp"

namespace ranklq {
namespace {

using testing::frac;

TEST(IntegerPartitions, CountsAndShape) {
  const std::vector<std::size_t> counts = {1, 2, 3, 5, 7, 11, 15, 22, 30, 42, 56, 77};
  for (int r = 1; r <= 12; ++r) {
    const auto parts = integer_partitions(r);
    EXPECT_EQ(parts.size(), counts[r - 1]) << r;
    for (const auto& lam : parts) {
      EXPECT_EQ(std::accumulate(lam.begin(), lam.end(), 0), r);
      EXPECT_TRUE(std::is_sorted(lam.rbegin(), lam.rend()));
    }
  }
}

// Direct sum over ordered tuples of pairwise distinct indices (small n only).
BigRational distinct_power_sum_oracle(const std::vector<int>& parts, long n) {
  const std::size_t l = parts.size();
  std::vector<long> idx(l, 0);
  BigRational total = 0;
  std::function<void(std::size_t)> rec = [&](std::size_t pos) {
    if (pos == l) {
      BigRational term = 1;
      for (std::size_t b = 0; b < l; ++b) term *= power(BigRational(2 * (idx[b] + 1) - n - 1, 2), parts[b]);
      total += term;
      return;
    }
    for (long i = 0; i < n; ++i) {
      bool used = false;
      for (std::size_t b = 0; b < pos; ++b) used = used || idx[b] == i;
      if (used) continue;
      idx[pos] = i;
      rec(pos + 1);
    }
  };
  rec(0);
  total.canonicalize();
  return total;
}

TEST(DistinctPowerSum, MethodsAgreeWithDirectSum) {
  for (long n : {3L, 5L, 6L}) {
    for (int r = 1; r <= 6; ++r) {
      for (const auto& lam : integer_partitions(r)) {
        if (static_cast<long>(lam.size()) > n) continue;
        const BigRational oracle = distinct_power_sum_oracle(lam, n);
        EXPECT_EQ(distinct_power_sum(lam, n, PowerSumMethod::Mobius), oracle);
        EXPECT_EQ(distinct_power_sum(lam, n, PowerSumMethod::Monomial), oracle);
      }
    }
  }
}

TEST(SpearmanMoment, FirstMomentVanishes) {
  for (long n = 2; n <= 30; ++n) EXPECT_EQ(spearman_moment_partition(1, n), 0);
}

TEST(SpearmanMoment, SecondMomentAtThree) {
  EXPECT_EQ(spearman_moment_partition(2, 3), frac(1, 2));
  EXPECT_EQ(bruteforce_moment(Kind::Spearman, 2, 3), frac(1, 2));
  for (long n = 2; n <= 40; ++n) EXPECT_EQ(spearman_moment_partition(2, n), frac(1, n - 1)) << n;
}

TEST(SpearmanMoment, FourthMomentAtFour) {
  EXPECT_EQ(spearman_moment_partition(4, 4), frac(77, 375));
  EXPECT_EQ(bruteforce_moment(Kind::Spearman, 4, 4), frac(77, 375));
  EXPECT_EQ(spearman_closed(4, MomentKind::Mean, 4), frac(77, 375));
}

TEST(SpearmanMoment, MobiusEqualsMonomial) {
  for (int r = 2; r <= 8; ++r)
    for (long n : {4L, 9L, 23L})
      EXPECT_EQ(spearman_moment_partition(r, n, PowerSumMethod::Mobius),
                spearman_moment_partition(r, n, PowerSumMethod::Monomial));
}

TEST(SpearmanMoment, OddMomentsVanish) {
  for (int r : {3, 5, 7})
    for (long n : {3L, 8L, 31L}) EXPECT_EQ(spearman_moment_partition(r, n), 0);
}

TEST(SpearmanMoment, MatchesBruteForce) {
  for (int n = 3; n <= 8; ++n) {
    const auto brute = bruteforce_moments(Kind::Spearman, {1, 2, 3, 4, 6}, n);
    EXPECT_EQ(spearman_moment_partition(1, n), brute[0]);
    EXPECT_EQ(spearman_moment_partition(2, n), brute[1]);
    EXPECT_EQ(spearman_moment_partition(3, n), brute[2]);
    EXPECT_EQ(spearman_moment_partition(4, n), brute[3]);
    EXPECT_EQ(spearman_moment_partition(6, n), brute[4]);
  }
}

TEST(SpearmanClosed, MeanMatchesPartitionIdentity) {
  for (long n = 3; n <= 30; ++n) {
    EXPECT_EQ(spearman_closed(4, MomentKind::Mean, n), spearman_moment_partition(4, n)) << n;
    EXPECT_EQ(spearman_closed(6, MomentKind::Mean, n), spearman_moment_partition(6, n)) << n;
  }
}

TEST(SpearmanClosed, VarianceMatchesPartitionIdentity) {
  for (long n = 5; n <= 40; n += 5) {
    const BigRational m4 = spearman_moment_partition(4, n);
    EXPECT_EQ(spearman_closed(4, MomentKind::Variance, n), spearman_moment_partition(8, n) - m4 * m4) << n;
  }
  for (long n = 5; n <= 25; n += 4) {
    const BigRational m6 = spearman_moment_partition(6, n);
    EXPECT_EQ(spearman_closed(6, MomentKind::Variance, n), spearman_moment_partition(12, n) - m6 * m6) << n;
  }
}

TEST(SpearmanClosed, VarianceVanishesAtTwo) {
  // rho_2 = +-1, so rho^4 is constant.
  EXPECT_EQ(spearman_closed(4, MomentKind::Variance, 2), 0);
  EXPECT_EQ(spearman_closed(6, MomentKind::Variance, 2), 0);
}

TEST(SpearmanClosed, RejectsOtherPowers) {
  EXPECT_RANKLQ_ERROR(spearman_closed(8, MomentKind::Mean, 10), ErrorCode::InvalidArgument);
}

TEST(Bernoulli, KnownValues) {
  const std::vector<BigRational> expected = {1,          frac(-1, 2), frac(1, 6),  0,           frac(-1, 30),
                                             0,          frac(1, 42), 0,           frac(-1, 30), 0,
                                             frac(5, 66), 0,          frac(-691, 2730)};
  for (int r = 0; r <= 12; ++r) EXPECT_EQ(bernoulli(r), expected[r]) << r;
}

TEST(KendallCumulant, OddOrdersVanish) {
  for (int r : {3, 5, 7, 9, 11})
    for (long n : {2L, 5L, 40L}) EXPECT_EQ(kendall_cumulant(r, n), 0);
}

TEST(KendallCumulant, SecondCumulant) {
  EXPECT_EQ(kendall_cumulant(2, 3), frac(11, 27));
  EXPECT_EQ(bruteforce_moment(Kind::Kendall, 2, 3), frac(11, 27));
  for (long n = 2; n <= 60; ++n) EXPECT_EQ(kendall_cumulant(2, n), frac(2 * (2 * n + 5), 9 * n * (n - 1))) << n;
}

TEST(KendallCumulant, FourthCumulantFromEnumeration) {
  for (int n = 4; n <= 7; ++n) {
    const auto m = bruteforce_moments(Kind::Kendall, {2, 4, 6}, n);
    EXPECT_EQ(kendall_cumulant(4, n), m[1] - 3 * m[0] * m[0]) << n;
    // kappa_6 = M6 - 15 M4 M2 + 30 M2^3 for a symmetric law.
    EXPECT_EQ(kendall_cumulant(6, n), m[2] - 15 * m[1] * m[0] + 30 * m[0] * m[0] * m[0]) << n;
  }
}

TEST(KendallMoment, FourthMomentMatchesClosedForm) {
  for (long n = 2; n <= 60; ++n) EXPECT_EQ(kendall_moment(4, n), kendall_closed(4, MomentKind::Mean, n)) << n;
}

TEST(KendallMoment, OddMomentsVanish) {
  for (long n : {2L, 9L, 50L}) {
    EXPECT_EQ(kendall_moment(3, n), 0);
    EXPECT_EQ(kendall_moment(5, n), 0);
  }
}

TEST(KendallMoment, MatchesBruteForce) {
  for (int n = 2; n <= 8; ++n) {
    const auto brute = bruteforce_moments(Kind::Kendall, {2, 4, 6}, n);
    EXPECT_EQ(kendall_moment(2, n), brute[0]);
    EXPECT_EQ(kendall_moment(4, n), brute[1]);
    EXPECT_EQ(kendall_moment(6, n), brute[2]);
  }
}

TEST(KendallClosed, VarianceIdentities) {
  for (long n = 3; n <= 40; ++n) {
    const BigRational m6 = kendall_moment(6, n);
    EXPECT_EQ(kendall_closed(6, MomentKind::Variance, n), kendall_moment(12, n) - m6 * m6) << n;
    const BigRational m4 = kendall_moment(4, n);
    EXPECT_EQ(kendall_closed(4, MomentKind::Variance, n), kendall_moment(8, n) - m4 * m4) << n;
  }
  EXPECT_EQ(kendall_closed(6, MomentKind::Mean, 17), kendall_moment(6, 17));
}

TEST(KendallClosed, VarianceVanishesAtTwo) { EXPECT_EQ(kendall_closed(4, MomentKind::Variance, 2), 0); }

TEST(MomentsFromCumulants, StandardNormal) {
  std::vector<BigRational> kappa(9, 0);
  kappa[2] = 1;
  const auto m = moments_from_cumulants(kappa, 8);
  const std::vector<BigRational> expected = {1, 0, 1, 0, 3, 0, 15, 0, 105};
  EXPECT_EQ(m, expected);
}

TEST(MomentsFromCumulants, Poisson) {
  // All cumulants equal one: raw moments are the Bell numbers.
  std::vector<BigRational> kappa(7, 1);
  const auto m = moments_from_cumulants(kappa, 6);
  const std::vector<BigRational> bell = {1, 1, 2, 5, 15, 52, 203};
  EXPECT_EQ(m, bell);
}

TEST(BruteForce, Examples) {
  EXPECT_EQ(bruteforce_moment(Kind::Kendall, 2, 3), frac(11, 27));
  EXPECT_EQ(bruteforce_moment(Kind::TauStar, 2, 4), frac(2, 9));
  for (int n = 2; n <= 7; ++n) EXPECT_EQ(bruteforce_moment(Kind::Spearman, 1, n), 0);
}

TEST(BruteForce, Limits) {
  EXPECT_RANKLQ_ERROR(bruteforce_moment(Kind::Kendall, 2, 10), ErrorCode::TooLarge);
  EXPECT_RANKLQ_ERROR(bruteforce_moment(Kind::Pearson, 2, 5), ErrorCode::UnsupportedKind);
}

}  // namespace
}  // namespace ranklq
