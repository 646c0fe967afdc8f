#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ranklq/rng.hpp"
#include "ranklq/simulation.hpp"
#include "ranklq/test_stats.hpp"
#include "test_util.hpp"

namespace ranklq {
namespace {

TEST(GenNull, UnitVarianceLaws) {
  const std::size_t N = 100000;
  for (MarginalLaw law : {MarginalLaw::StdNormal, MarginalLaw::ScaledT3, MarginalLaw::ScaledChiSq1}) {
    const auto d = gen_null(N, 1, law, 21);
    double s = 0, s2 = 0;
    for (double x : d.values()) {
      s += x;
      s2 += x * x;
    }
    const double mean = s / N, var = s2 / N - mean * mean;
    EXPECT_NEAR(mean, 0.0, 4 / std::sqrt(static_cast<double>(N))) << law_name(law);
    if (law == MarginalLaw::ScaledChiSq1) {
      // Fourth central moment of (chi2_1 - 1)/sqrt(2) is 15.
      EXPECT_NEAR(var, 1.0, 4 * std::sqrt(14.0 / N));
    } else if (law == MarginalLaw::StdNormal) {
      EXPECT_NEAR(var, 1.0, 4 * std::sqrt(2.0 / N));
    } else {
      // t3 has no fourth moment; a loose band only.
      EXPECT_NEAR(var, 1.0, 0.15);
    }
  }
}

TEST(GenNull, SeedDeterminism) {
  const auto a = gen_null(50, 4, MarginalLaw::ScaledT3, 8);
  const auto b = gen_null(50, 4, MarginalLaw::ScaledT3, 8);
  const auto c = gen_null(50, 4, MarginalLaw::ScaledT3, 9);
  EXPECT_EQ(a.values(), b.values());
  EXPECT_NE(a.values(), c.values());
}

TEST(GenNull, ColumnsAreKeyedByIndex) {
  // Column j depends only on (seed, j): a wider draw extends a narrower one, and no two columns coincide.
  const auto narrow = gen_null(40, 3, MarginalLaw::StdNormal, 5);
  const auto wide = gen_null(40, 6, MarginalLaw::StdNormal, 5);
  for (std::size_t j = 0; j < 3; ++j) {
    const auto a = narrow.column(j), b = wide.column(j);
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
  }
  for (std::size_t j = 0; j < 6; ++j)
    for (std::size_t k = j + 1; k < 6; ++k) EXPECT_NE(wide(0, j), wide(0, k));
}

TEST(GenAlternative, ZeroCorrelationIsNull) {
  AlternativeDesign d;
  d.kind = DesignKind::LinearNormal;
  d.k = 8;
  d.n = 30;
  d.p = 8;
  d.r_min = d.r_max = 0.0;
  EXPECT_EQ(gen_alternative(d, 12).values(), gen_null(30, 8, MarginalLaw::StdNormal, 12).values());
}

TEST(GenAlternative, LinearRangeFormula) {
  const auto [lo, hi] = default_r_range(DesignKind::LinearNormal, 2, 100, 200);
  EXPECT_NEAR(lo, std::sqrt(12 * std::log(200.0) / (2 * 100)), 1e-15);
  EXPECT_NEAR(lo, 0.5638, 5e-5);
  EXPECT_GT(hi, lo);
  EXPECT_LT(hi, 1.0);
  for (DesignKind dk : {DesignKind::LinearNormal, DesignKind::SineCubeRoot, DesignKind::SineCubic}) {
    for (std::size_t k = 2; k <= 16; ++k) {
      const auto [a, b] = default_r_range(dk, k, 100, 200);
      EXPECT_GT(a, 0) << design_name(dk) << " k=" << k;
      EXPECT_LT(a, b);
      EXPECT_LT(b, 1);
    }
  }
}

TEST(GenAlternative, Transforms) {
  EXPECT_EQ(design_transform(DesignKind::LinearNormal, 1.7), 1.7);
  EXPECT_NEAR(design_transform(DesignKind::SineCubic, 1.2), std::sin(std::numbers::pi * std::pow(1.2, 3) / 4), 1e-15);
  EXPECT_NEAR(design_transform(DesignKind::SineCubeRoot, -0.8),
              std::sin(2 * std::numbers::pi * -std::cbrt(0.8) / 3), 1e-15);
}

TEST(GenAlternative, OffBlockPairsUncorrelated) {
  const std::size_t n = 100, p = 40;
  AlternativeDesign d;
  d.k = 2;
  d.n = n;
  d.p = p;
  d.r_min = d.r_max = 0.8;
  const auto data = gen_alternative(d, 3);
  const auto sheet = pearson_sheet(data);
  const double bound = 4 / std::sqrt(static_cast<double>(n));
  std::size_t strong = 0, small = 0;
  for (double r : sheet.values) {
    small += std::fabs(r) < bound;
    strong += std::fabs(r) > 0.5;
  }
  // Exactly one pair lies in the active block.
  EXPECT_GE(small, static_cast<std::size_t>(0.95 * (sheet.values.size() - 1)));
  EXPECT_EQ(strong, 1u);
}

TEST(GenAlternative, NotPositiveDefinite) {
  AlternativeDesign d;
  d.k = 4;
  d.n = 20;
  d.p = 6;
  d.r_min = -0.9;
  d.r_max = -0.8;
  EXPECT_RANKLQ_ERROR(gen_alternative(d, 1), ErrorCode::NotPositiveDefinite);
}

TEST(GenAlternative, Errors) {
  AlternativeDesign d;
  d.k = 10;
  d.p = 5;
  EXPECT_RANKLQ_ERROR(gen_alternative(d, 1), ErrorCode::InvalidArgument);
  EXPECT_RANKLQ_ERROR(parse_law("cauchy"), ErrorCode::InvalidArgument);
  EXPECT_EQ(parse_design("sine_cubic"), DesignKind::SineCubic);
}

CalibrationProvider provider() {
  CalibrationOptions o;
  o.B = 100000;
  o.seed = kDefaultSeed;
  return memo_calibration_provider(o);
}

TEST(SizeTable, DeterministicAcrossThreadCounts) {
  ExperimentConfig c;
  c.kinds = {Kind::Spearman, Kind::HoeffdingD};
  c.laws = {MarginalLaw::StdNormal, MarginalLaw::ScaledT3};
  c.grid = {{30, 8}};
  c.reps = 40;
  c.seed = 3;
  CalibrationOptions o;
  o.B = 10000;
  auto cal = memo_calibration_provider(o);
  c.threads = 1;
  const std::string one = rows_to_csv(size_table(c, cal));
  c.threads = 4;
  const std::string four = rows_to_csv(size_table(c, cal));
  EXPECT_EQ(one, four);
  EXPECT_EQ(one.substr(0, one.find('\n')), "kind,setting,n,p,k,norm,reject_rate,reps,seed");
}

TEST(SizeTable, RowsAndLookup) {
  ExperimentConfig c;
  c.kinds = {Kind::Kendall};
  c.grid = {{25, 5}};
  c.reps = 20;
  const auto rows = size_table(c, provider());
  EXPECT_EQ(rows.size(), reported_norms().size());
  const auto& row = find_row(rows, Kind::Kendall, "normal", 0, "2,4,6,inf");
  EXPECT_EQ(row.reps, 20u);
  EXPECT_GE(row.reject_rate, 0.0);
  EXPECT_LE(row.reject_rate, 1.0);
  EXPECT_RANKLQ_ERROR(find_row(rows, Kind::Spearman, "normal", 0, "2"), ErrorCode::InvalidArgument);
  EXPECT_NE(rows_to_json(rows).find("\"reject_rate\""), std::string::npos);
}

TEST(SizeTable, SpearmanAndPearsonAtHundred) {
  ExperimentConfig c;
  c.kinds = {Kind::Spearman, Kind::Pearson};
  c.laws = {MarginalLaw::StdNormal, MarginalLaw::ScaledT3};
  c.grid = {{100, 100}};
  c.reps = 1000;
  c.seed = 1;
  const auto rows = size_table(c, provider());
  EXPECT_NEAR(100 * find_row(rows, Kind::Spearman, "normal", 0, "2").reject_rate, 4.6, 2.0);
  EXPECT_GT(100 * find_row(rows, Kind::Pearson, "t3", 0, "4").reject_rate, 70.0);
  // Combined Spearman test against the 4.2-5.5 band of the reference table, +-2 points.
  const double comb = 100 * find_row(rows, Kind::Spearman, "normal", 0, "2,4,6,inf").reject_rate;
  EXPECT_GE(comb, 2.2);
  EXPECT_LE(comb, 7.5);
}

TEST(SizeTable, KendallAtTwoHundred) {
  ExperimentConfig c;
  c.kinds = {Kind::Kendall};
  c.grid = {{200, 200}};
  c.reps = 1000;
  c.seed = 1;
  const auto rows = size_table(c, provider());
  EXPECT_NEAR(100 * find_row(rows, Kind::Kendall, "normal", 0, "2").reject_rate, 4.3, 2.0);
}

TEST(PowerCurve, HoeffdingLinearShape) {
  ExperimentConfig c;
  c.kinds = {Kind::HoeffdingD};
  c.grid = {{100, 200}};
  c.reps = 150;
  c.seed = 1;
  const auto rows = power_curve(c, DesignKind::LinearNormal, {2, 16}, provider());
  const auto rate = [&](std::size_t k, const char* norm) {
    return find_row(rows, Kind::HoeffdingD, "linear", k, norm).reject_rate;
  };
  EXPECT_GT(rate(2, "inf"), rate(16, "inf"));
  EXPECT_GT(rate(16, "2"), rate(2, "2"));
}

TEST(PowerCurve, PearsonMissesSineCubic) {
  ExperimentConfig c;
  c.kinds = {Kind::Pearson};
  c.grid = {{100, 200}};
  c.reps = 150;
  c.seed = 2;
  std::vector<std::size_t> ks;
  for (std::size_t k = 2; k <= 16; k += 2) ks.push_back(k);
  const auto rows = power_curve(c, DesignKind::SineCubic, ks, provider());
  double best = 0;
  for (std::size_t k : ks) best = std::max(best, find_row(rows, Kind::Pearson, "sine_cubic", k, "2").reject_rate);
  EXPECT_LE(best, 0.45);
}

// Rejection rate of the combined rank test over replicates of one design.
double design_rate(const AlternativeDesign& d, Kind kind, int norm, std::size_t reps, std::uint64_t seed) {
  const auto calib = build_calibration(kind, static_cast<long>(d.n));
  TestOptions o;
  o.norms = {norm};
  std::size_t hits = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    const auto data = gen_alternative(d, derive_seed(seed, r));
    hits += run_test(data, kind, calib, o).reject;
  }
  return static_cast<double>(hits) / reps;
}

TEST(PowerCurve, StrongerSignalDoesNotLosePower) {
  const std::size_t reps = 200;
  auto d = make_design(DesignKind::LinearNormal, 6, 60, 30);
  d.r_min *= 0.5;
  d.r_max *= 0.5;
  auto stronger = d;
  stronger.r_min *= 1.5;
  stronger.r_max *= 1.5;
  for (Kind k : {Kind::Spearman, Kind::Kendall}) {
    const double a = design_rate(d, k, 2, reps, 41), b = design_rate(stronger, k, 2, reps, 41);
    const double se = std::sqrt((a * (1 - a) + b * (1 - b)) / reps);
    EXPECT_GE(b, a - 2 * se) << kind_name(k);
  }
}

TEST(PowerCurve, VanishingSignalMatchesNull) {
  const std::size_t reps = 400, n = 60, p = 20;
  AlternativeDesign d;
  d.kind = DesignKind::LinearNormal;
  d.k = 6;
  d.n = n;
  d.p = p;
  d.r_min = 0.0;
  d.r_max = 1e-6;
  const double alt = design_rate(d, Kind::Spearman, 2, reps, 50);
  const auto calib = build_calibration(Kind::Spearman, n);
  TestOptions o;
  o.norms = {2};
  std::size_t hits = 0;
  for (std::size_t r = 0; r < reps; ++r) hits += run_test(gen_null(n, p, MarginalLaw::StdNormal, derive_seed(51, r)), Kind::Spearman, calib, o).reject;
  const double null = static_cast<double>(hits) / reps;
  const double se = std::sqrt(0.05 * 0.95 * 2 / reps);
  EXPECT_NEAR(alt, null, 3 * se);
}

}  // namespace
}  // namespace ranklq
