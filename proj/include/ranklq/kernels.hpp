#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ranklq/coefficient.hpp"
#include "ranklq/data.hpp"
#include "ranklq/rational.hpp"

namespace ranklq {

enum class Algorithm { Reference, Fast };

/// Largest n accepted by the reference (subset enumeration) path.
inline constexpr std::size_t kReferenceMaxN = 12;
inline constexpr std::size_t kReferenceMaxNBkr = 10;

/// Exact kernel value numerator/denominator as produced by the fast algorithms.
/// The fraction is not reduced.
struct KernelRatio {
  __int128 numerator = 0;
  __int128 denominator = 1;

  double value() const { return static_cast<double>(static_cast<long double>(numerator) / denominator); }
  BigRational exact() const;
};

/// psi_T over all patterns of S_m, indexed by lexicographic (Lehmer) rank of the pattern.
struct PatternTable {
  Kind kind;
  int order = 0;
  /// Common denominator: scaled[k] == values[k] * scale exactly.
  std::int64_t scale = 1;
  std::vector<BigRational> values;
  std::vector<std::int64_t> scaled;
};

/// Pattern table for a degenerate kind, computed once from the indicator-product kernels.
/// Throws UnsupportedKind for rho, tau and Pearson.
const PatternTable& pattern_table(Kind kind);

/// psi_T(sigma) for a permutation sigma of 1..m_T.
BigRational pattern_kernel(Kind kind, std::span<const int> sigma);

/// Lexicographic rank of the relative order pattern of distinct values.
std::size_t pattern_index(std::span<const int> values);

/// Permutation of 1..m with the given lexicographic rank.
std::vector<int> pattern_from_index(std::size_t index, int m);

// Fast kernels. `pi` is the joint-rank permutation: pi[u-1] is the y-rank of the observation with
// x-rank u (see relative_permutation).
std::int64_t inversion_count(std::span<const std::int32_t> pi);
KernelRatio spearman_fast(std::span<const std::int32_t> pi);
KernelRatio kendall_fast(std::span<const std::int32_t> pi);
KernelRatio hoeffding_fast(std::span<const std::int32_t> pi);
KernelRatio bkr_fast(std::span<const std::int32_t> pi);
KernelRatio taustar_fast(std::span<const std::int32_t> pi);
/// C_n: quadruples whose two x-smallest points are also the two y-smallest or the two y-largest.
std::int64_t concordant_quadruples(std::span<const std::int32_t> pi);

KernelRatio fast_kernel(Kind kind, std::span<const std::int32_t> pi);

/// Average of psi_T over all m_T-subsets (Spearman: centered-score product sum), exact.
BigRational reference_kernel(Kind kind, std::span<const std::int32_t> pi);

/// Reference sum scaled to an integer: value == result / reference_denominator(kind, n).
std::int64_t reference_scaled_sum(Kind kind, std::span<const std::int32_t> pi);
BigInt reference_denominator(Kind kind, std::size_t n);

BigRational pair_statistic_exact(Kind kind, std::span<const std::int32_t> xr, std::span<const std::int32_t> yr,
                                 Algorithm algo = Algorithm::Fast);
double pair_statistic(Kind kind, std::span<const std::int32_t> xr, std::span<const std::int32_t> yr,
                      Algorithm algo = Algorithm::Fast);

/// Sample correlation coefficient. Throws DegenerateColumn on zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

inline std::size_t pair_count(std::size_t p) { return p * (p - 1) / 2; }

/// Position of (s, t), s < t, in lexicographic order over all pairs of p coordinates.
inline std::size_t pair_index(std::size_t s, std::size_t t, std::size_t p) {
  return s * p - s * (s + 1) / 2 + (t - s - 1);
}

/// All pairwise values of one coefficient, lexicographic over s < t.
struct PairStatSheet {
  Kind kind = Kind::Spearman;
  std::size_t n = 0;
  std::size_t p = 0;
  std::vector<double> values;

  double at(std::size_t s, std::size_t t) const { return values[pair_index(s, t, p)]; }
};

/// Rank-based sheet; values are bit-identical for any thread count.
PairStatSheet pairwise_sheet(const RankMatrix& ranks, Kind kind, int threads = 1);
PairStatSheet pearson_sheet(const DataMatrix& data, int threads = 1);

}  // namespace ranklq
