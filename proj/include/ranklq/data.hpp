#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ranklq {

/// n observations (rows) of p coordinates (columns), stored column-major.
class DataMatrix {
 public:
  DataMatrix() = default;
  /// Throws InvalidArgument on non-finite entries or a size mismatch.
  DataMatrix(std::size_t n, std::size_t p, std::vector<double> column_major);

  static DataMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t n() const noexcept { return n_; }
  std::size_t p() const noexcept { return p_; }
  std::span<const double> column(std::size_t j) const { return {values_.data() + j * n_, n_}; }
  double operator()(std::size_t i, std::size_t j) const { return values_[j * n_ + i]; }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::size_t n_ = 0;
  std::size_t p_ = 0;
  std::vector<double> values_;
};

/// Per-column ranks 1..n, column-major. Every column is a permutation of 1..n.
class RankMatrix {
 public:
  RankMatrix() = default;
  /// Throws BadPermutation if some column is not a permutation of 1..n.
  RankMatrix(std::size_t n, std::size_t p, std::vector<std::int32_t> column_major);

  std::size_t n() const noexcept { return n_; }
  std::size_t p() const noexcept { return p_; }
  std::span<const std::int32_t> column(std::size_t j) const { return {ranks_.data() + j * n_, n_}; }

 private:
  std::size_t n_ = 0;
  std::size_t p_ = 0;
  std::vector<std::int32_t> ranks_;
};

struct TiePolicy {
  enum class Mode { Reject, RandomBreak };
  Mode mode = Mode::Reject;
  std::uint64_t seed = 0;

  static TiePolicy reject() { return {}; }
  static TiePolicy random_break(std::uint64_t seed) { return {Mode::RandomBreak, seed}; }
};

/// Ranks of one column. Ties throw TiesPresent under Reject; under RandomBreak tied values get a
/// uniformly random relative order drawn from the stream keyed by (seed, column_index).
std::vector<std::int32_t> rank_column(std::span<const double> values, const TiePolicy& ties = {},
                                      std::size_t column_index = 0);

RankMatrix compute_ranks(const DataMatrix& data, const TiePolicy& ties = {});

/// Validates that `ranks` is a permutation of 1..n; throws BadPermutation otherwise.
void check_permutation(std::span<const std::int32_t> ranks);

/// pi[u-1] = y-rank of the observation whose x-rank is u (the joint-rank permutation of a pair).
std::vector<std::int32_t> relative_permutation(std::span<const std::int32_t> xr, std::span<const std::int32_t> yr);

}  // namespace ranklq
