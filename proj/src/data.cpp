#include "ranklq/data.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ranklq/error.hpp"
#include "ranklq/rng.hpp"

namespace ranklq {

DataMatrix::DataMatrix(std::size_t n, std::size_t p, std::vector<double> column_major)
    : n_(n), p_(p), values_(std::move(column_major)) {
  if (values_.size() != n_ * p_) fail(ErrorCode::InvalidArgument, "data size does not match n*p");
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k])) {
      fail(ErrorCode::InvalidArgument,
           "non-finite entry at row " + std::to_string(k % n_) + ", column " + std::to_string(k / n_));
    }
  }
}

DataMatrix DataMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size();
  const std::size_t p = n == 0 ? 0 : rows.front().size();
  std::vector<double> values(n * p);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != p) fail(ErrorCode::InvalidArgument, "ragged rows");
    for (std::size_t j = 0; j < p; ++j) values[j * n + i] = rows[i][j];
  }
  return DataMatrix(n, p, std::move(values));
}

void check_permutation(std::span<const std::int32_t> ranks) {
  const auto n = static_cast<std::int32_t>(ranks.size());
  std::vector<char> seen(ranks.size() + 1, 0);
  for (auto r : ranks) {
    if (r < 1 || r > n || seen[static_cast<std::size_t>(r)]) {
      fail(ErrorCode::BadPermutation, "not a permutation of 1.." + std::to_string(n));
    }
    seen[static_cast<std::size_t>(r)] = 1;
  }
}

RankMatrix::RankMatrix(std::size_t n, std::size_t p, std::vector<std::int32_t> column_major)
    : n_(n), p_(p), ranks_(std::move(column_major)) {
  if (ranks_.size() != n_ * p_) fail(ErrorCode::InvalidArgument, "rank matrix size does not match n*p");
  for (std::size_t j = 0; j < p_; ++j) check_permutation(column(j));
}

std::vector<std::int32_t> rank_column(std::span<const double> values, const TiePolicy& ties,
                                      std::size_t column_index) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  Engine engine;
  bool engine_ready = false;
  for (std::size_t lo = 0; lo < n;) {
    std::size_t hi = lo + 1;
    while (hi < n && values[order[hi]] == values[order[lo]]) ++hi;
    if (hi - lo > 1) {
      if (ties.mode == TiePolicy::Mode::Reject) {
        fail(ErrorCode::TiesPresent, "tied values in column " + std::to_string(column_index));
      }
      if (!engine_ready) {
        engine = make_stream(ties.seed, 0x7469657300ULL, column_index);
        engine_ready = true;
      }
      std::shuffle(order.begin() + static_cast<std::ptrdiff_t>(lo), order.begin() + static_cast<std::ptrdiff_t>(hi),
                   engine);
    }
    lo = hi;
  }
  std::vector<std::int32_t> ranks(n);
  for (std::size_t k = 0; k < n; ++k) ranks[order[k]] = static_cast<std::int32_t>(k + 1);
  return ranks;
}

RankMatrix compute_ranks(const DataMatrix& data, const TiePolicy& ties) {
  std::vector<std::int32_t> all;
  all.reserve(data.n() * data.p());
  for (std::size_t j = 0; j < data.p(); ++j) {
    auto col = rank_column(data.column(j), ties, j);
    all.insert(all.end(), col.begin(), col.end());
  }
  return RankMatrix(data.n(), data.p(), std::move(all));
}

std::vector<std::int32_t> relative_permutation(std::span<const std::int32_t> xr, std::span<const std::int32_t> yr) {
  if (xr.size() != yr.size()) fail(ErrorCode::InvalidArgument, "rank columns differ in length");
  std::vector<std::int32_t> pi(xr.size());
  for (std::size_t i = 0; i < xr.size(); ++i) pi[static_cast<std::size_t>(xr[i] - 1)] = yr[i];
  return pi;
}

}  // namespace ranklq
