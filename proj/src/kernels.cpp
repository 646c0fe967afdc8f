#include "ranklq/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <numeric>
#include <string>

#include "ranklq/error.hpp"
#include "ranklq/parallel.hpp"

namespace ranklq {

BigRational KernelRatio::exact() const {
  BigRational q(big_from_int128(numerator), big_from_int128(denominator));
  q.canonicalize();
  return q;
}

namespace {

int ind(bool b) { return b ? 1 : 0; }

// Hoeffding-type factor: {1(u1<=ua) - 1(u2<=ua)} {1(u3<=ua) - 1(u4<=ua)} with positions from omega.
int a_factor(std::span<const int> u, std::span<const int> omega, int anchor) {
  const int ua = u[omega[anchor - 1] - 1];
  auto le = [&](int k) { return ind(u[omega[k - 1] - 1] <= ua); };
  return (le(1) - le(2)) * (le(3) - le(4));
}

// 1(a,b < c,d)
int both_below(int a, int b, int c, int d) { return ind(a < c) * ind(a < d) * ind(b < c) * ind(b < d); }

int b4_factor(std::span<const int> u, std::span<const int> omega) {
  auto v = [&](int k) { return u[omega[k - 1] - 1]; };
  return both_below(v(1), v(3), v(2), v(4)) + both_below(v(2), v(4), v(1), v(3)) -
         both_below(v(1), v(4), v(2), v(3)) - both_below(v(2), v(3), v(1), v(4));
}

std::vector<std::vector<int>> all_permutations(int m) {
  std::vector<int> perm(static_cast<std::size_t>(m));
  std::iota(perm.begin(), perm.end(), 1);
  std::vector<std::vector<int>> out;
  do {
    out.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

PatternTable build_table(Kind kind) {
  PatternTable table;
  table.kind = kind;
  table.order = kernel_order(kind);
  const int m = table.order;
  const auto perms = all_permutations(m);
  std::vector<int> identity(static_cast<std::size_t>(m));
  std::iota(identity.begin(), identity.end(), 1);

  long divisor = 1;
  switch (kind) {
    case Kind::HoeffdingD: divisor = 16; break;
    case Kind::BkrR: divisor = 32; break;
    case Kind::TauStar: divisor = 24; break;
    default: fail(ErrorCode::UnsupportedKind, "no pattern kernel for " + std::string(kind_name(kind)));
  }
  table.values.reserve(perms.size());
  for (const auto& sigma : perms) {
    long total = 0;
    for (const auto& omega : perms) {
      switch (kind) {
        case Kind::HoeffdingD: total += a_factor(identity, omega, 5) * a_factor(sigma, omega, 5); break;
        case Kind::BkrR: total += a_factor(identity, omega, 5) * a_factor(sigma, omega, 6); break;
        case Kind::TauStar: total += b4_factor(identity, omega) * b4_factor(sigma, omega); break;
        default: break;
      }
    }
    table.values.emplace_back(total, divisor);
    table.values.back().canonicalize();
  }
  BigInt lcm = 1;
  for (const auto& v : table.values) mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), v.get_den_mpz_t());
  table.scale = lcm.get_si();
  for (const auto& v : table.values) {
    BigRational s = v * lcm;
    table.scaled.push_back(s.get_num().get_si());
  }
  return table;
}

void require_rank_kind(Kind kind) {
  if (kind == Kind::Pearson) fail(ErrorCode::UnsupportedKind, "Pearson is not a rank statistic");
}

__int128 choose128(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return 0;
  __int128 r = 1;
  for (std::int64_t j = 1; j <= k; ++j) r = r * (n - k + j) / j;
  return r;
}

std::int64_t choose2(std::int64_t x) { return x * (x - 1) / 2; }

// Counts before position u of values smaller than pi[u] (south-west points), via a Fenwick tree.
std::vector<std::int32_t> south_west_counts(std::span<const std::int32_t> pi) {
  const std::size_t n = pi.size();
  std::vector<std::int32_t> tree(n + 1, 0);
  std::vector<std::int32_t> sw(n);
  for (std::size_t u = 0; u < n; ++u) {
    std::int32_t c = 0;
    for (auto k = static_cast<std::size_t>(pi[u] - 1); k > 0; k -= k & (~k + 1)) c += tree[k];
    sw[u] = c;
    for (auto k = static_cast<std::size_t>(pi[u]); k <= n; k += k & (~k + 1)) ++tree[k];
  }
  return sw;
}

// Four-cell count term shared by the D and R fast paths: for a split of the remaining points into
// cells n11, n10, n01, n00, the sum over distinct (i1..i4) of f(i1,i2) f(i3,i4), divided by 4.
inline std::int64_t split_term(std::int64_t n11, std::int64_t n10, std::int64_t n01, std::int64_t n00) {
  const std::int64_t a = n11 * n00;
  const std::int64_t b = n10 * n01;
  const std::int64_t d = a - b;
  return d * d - a * (n11 + n00 - 1) - b * (n10 + n01 - 1);
}

// Quadruples {L, U} with both points of L strictly south-west of both points of U.
std::int64_t sw_ne_quadruples(std::span<const std::int32_t> pi) {
  const auto n = static_cast<std::int64_t>(pi.size());
  const auto sw = south_west_counts(pi);
  std::int64_t total = 0;
  for (std::int64_t u = 1; u <= n; ++u) {
    const std::int64_t y = pi[static_cast<std::size_t>(u - 1)];
    const std::int64_t s = sw[static_cast<std::size_t>(u - 1)];
    const std::int64_t ne = n - u - (y - 1 - s);
    total += s * choose2(ne);
  }
  // L discordant: corner (x of the right point, y of the upper point); row[v] = #{w <= u : pi(w) <= v}
  std::vector<std::int32_t> row(static_cast<std::size_t>(n) + 1, 0);
  for (std::int64_t u = 1; u <= n; ++u) {
    const std::int32_t y1 = pi[static_cast<std::size_t>(u - 1)];
    for (std::int64_t v = y1; v <= n; ++v) ++row[static_cast<std::size_t>(v)];
    for (std::int64_t w = 1; w < u; ++w) {
      const std::int32_t y2 = pi[static_cast<std::size_t>(w - 1)];
      if (y2 <= y1) continue;
      const std::int64_t ne = n - u - y2 + row[static_cast<std::size_t>(y2)];
      total += choose2(ne);
    }
  }
  return total;
}

void require_order(Kind kind, std::size_t n) {
  if (n < static_cast<std::size_t>(kernel_order(kind))) {
    fail(ErrorCode::InvalidArgument, "n = " + std::to_string(n) + " is below the kernel order of " +
                                         std::string(kind_name(kind)));
  }
}

}  // namespace

const PatternTable& pattern_table(Kind kind) {
  static std::once_flag flags[3];
  static PatternTable tables[3];
  int slot = -1;
  switch (kind) {
    case Kind::HoeffdingD: slot = 0; break;
    case Kind::BkrR: slot = 1; break;
    case Kind::TauStar: slot = 2; break;
    default: fail(ErrorCode::UnsupportedKind, "no pattern kernel for " + std::string(kind_name(kind)));
  }
  std::call_once(flags[slot], [&] { tables[slot] = build_table(kind); });
  return tables[slot];
}

std::size_t pattern_index(std::span<const int> values) {
  const std::size_t m = values.size();
  std::size_t index = 0;
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t smaller = 0;
    for (std::size_t j = i + 1; j < m; ++j) smaller += values[j] < values[i] ? 1 : 0;
    index = index * (m - i) + smaller;
  }
  return index;
}

std::vector<int> pattern_from_index(std::size_t index, int m) {
  std::vector<std::size_t> digits(static_cast<std::size_t>(m));
  for (int i = m - 1; i >= 0; --i) {
    const auto base = static_cast<std::size_t>(m - i);
    digits[static_cast<std::size_t>(i)] = index % base;
    index /= base;
  }
  std::vector<int> pool(static_cast<std::size_t>(m));
  std::iota(pool.begin(), pool.end(), 1);
  std::vector<int> out;
  for (auto d : digits) {
    out.push_back(pool[d]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(d));
  }
  return out;
}

BigRational pattern_kernel(Kind kind, std::span<const int> sigma) {
  const auto& table = pattern_table(kind);
  if (static_cast<int>(sigma.size()) != table.order) {
    fail(ErrorCode::BadPermutation, "pattern length must equal the kernel order");
  }
  std::vector<std::int32_t> copy(sigma.begin(), sigma.end());
  check_permutation(copy);
  return table.values[pattern_index(sigma)];
}

std::int64_t inversion_count(std::span<const std::int32_t> pi) {
  std::vector<std::int32_t> a(pi.begin(), pi.end());
  std::vector<std::int32_t> buf(a.size());
  std::int64_t inversions = 0;
  for (std::size_t width = 1; width < a.size(); width *= 2) {
    for (std::size_t lo = 0; lo < a.size(); lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, a.size());
      const std::size_t hi = std::min(lo + 2 * width, a.size());
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (a[i] <= a[j]) {
          buf[k++] = a[i++];
        } else {
          inversions += static_cast<std::int64_t>(mid - i);
          buf[k++] = a[j++];
        }
      }
      while (i < mid) buf[k++] = a[i++];
      while (j < hi) buf[k++] = a[j++];
    }
    std::swap(a, buf);
  }
  return inversions;
}

KernelRatio spearman_fast(std::span<const std::int32_t> pi) {
  const auto n = static_cast<__int128>(pi.size());
  __int128 d2 = 0;
  for (std::size_t u = 0; u < pi.size(); ++u) {
    const __int128 d = static_cast<__int128>(u + 1) - pi[u];
    d2 += d * d;
  }
  const __int128 den = n * (n * n - 1);
  return {den - 6 * d2, den};
}

KernelRatio kendall_fast(std::span<const std::int32_t> pi) {
  const auto n = static_cast<__int128>(pi.size());
  const __int128 den = n * (n - 1);
  return {den - 4 * static_cast<__int128>(inversion_count(pi)), den};
}

KernelRatio hoeffding_fast(std::span<const std::int32_t> pi) {
  const auto n = static_cast<std::int64_t>(pi.size());
  require_order(Kind::HoeffdingD, pi.size());
  const auto sw = south_west_counts(pi);
  __int128 total = 0;
  for (std::int64_t u = 1; u <= n; ++u) {
    const std::int64_t n11 = sw[static_cast<std::size_t>(u - 1)];
    const std::int64_t n10 = (u - 1) - n11;
    const std::int64_t n01 = (pi[static_cast<std::size_t>(u - 1)] - 1) - n11;
    const std::int64_t n00 = (n - 1) - n11 - n10 - n01;
    total += split_term(n11, n10, n01, n00);
  }
  return {total, 4 * choose128(n, 5)};
}

KernelRatio bkr_fast(std::span<const std::int32_t> pi) {
  const auto n = static_cast<std::int64_t>(pi.size());
  require_order(Kind::BkrR, pi.size());
  // row[v] = #{w <= u : pi(w) <= v}; placed[v] = point with y-rank v has x-rank <= u
  std::vector<std::int32_t> row(static_cast<std::size_t>(n) + 1, 0);
  std::vector<std::int32_t> placed(static_cast<std::size_t>(n) + 1, 0);
  __int128 total = 0;
  for (std::int64_t u = 1; u <= n; ++u) {
    const std::int32_t ya = pi[static_cast<std::size_t>(u - 1)];
    for (std::int64_t v = ya; v <= n; ++v) ++row[static_cast<std::size_t>(v)];
    placed[static_cast<std::size_t>(ya)] = 1;
    std::int64_t acc = 0;
    for (std::int64_t v = 1; v <= n; ++v) {
      if (v == ya) continue;
      const std::int64_t p = row[static_cast<std::size_t>(v)];
      std::int64_t n11 = p, n10 = u - p, n01 = v - p, n00 = n - u - v + p;
      // drop the anchor points a (x-rank u) and b (y-rank v)
      if (ya <= v) --n11; else --n10;
      if (placed[static_cast<std::size_t>(v)]) --n11; else --n01;
      acc += split_term(n11, n10, n01, n00);
    }
    total += acc;
  }
  return {total, 8 * choose128(n, 6)};
}

std::int64_t concordant_quadruples(std::span<const std::int32_t> pi) {
  std::vector<std::int32_t> flipped(pi.size());
  const auto n = static_cast<std::int32_t>(pi.size());
  for (std::size_t u = 0; u < pi.size(); ++u) flipped[u] = n + 1 - pi[u];
  return sw_ne_quadruples(pi) + sw_ne_quadruples(flipped);
}

KernelRatio taustar_fast(std::span<const std::int32_t> pi) {
  require_order(Kind::TauStar, pi.size());
  const auto n = static_cast<std::int64_t>(pi.size());
  const __int128 quads = choose128(n, 4);
  const __int128 k = 3 * static_cast<__int128>(concordant_quadruples(pi)) - quads;
  return {k, 3 * quads};
}

KernelRatio fast_kernel(Kind kind, std::span<const std::int32_t> pi) {
  switch (kind) {
    case Kind::Spearman: return spearman_fast(pi);
    case Kind::Kendall: return kendall_fast(pi);
    case Kind::HoeffdingD: return hoeffding_fast(pi);
    case Kind::BkrR: return bkr_fast(pi);
    case Kind::TauStar: return taustar_fast(pi);
    case Kind::Pearson: break;
  }
  fail(ErrorCode::UnsupportedKind, "Pearson is not a rank statistic");
}

std::int64_t reference_scaled_sum(Kind kind, std::span<const std::int32_t> pi) {
  require_rank_kind(kind);
  const std::size_t n = pi.size();
  const std::size_t limit = kind == Kind::BkrR ? kReferenceMaxNBkr : kReferenceMaxN;
  if (n > limit) {
    fail(ErrorCode::TooLargeForReference,
         "reference enumeration supports n <= " + std::to_string(limit) + ", got " + std::to_string(n));
  }
  require_order(kind, n);
  const auto ni = static_cast<std::int64_t>(n);
  if (kind == Kind::Spearman) {
    // 3 * sum (2u - n - 1)(2 pi(u) - n - 1) == n(n^2-1) * rho
    std::int64_t s = 0;
    for (std::size_t u = 0; u < n; ++u) s += (2 * static_cast<std::int64_t>(u + 1) - ni - 1) * (2 * pi[u] - ni - 1);
    return 3 * s;
  }
  if (kind == Kind::Kendall) {
    std::int64_t s = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += pi[j] > pi[i] ? 1 : -1;
    return s;
  }
  const auto& table = pattern_table(kind);
  const auto m = static_cast<std::size_t>(table.order);
  std::vector<std::size_t> idx(m);
  std::iota(idx.begin(), idx.end(), 0);
  std::array<int, 16> pattern{};
  std::int64_t s = 0;
  while (true) {
    for (std::size_t k = 0; k < m; ++k) pattern[k] = pi[idx[k]];
    s += table.scaled[pattern_index(std::span<const int>(pattern.data(), m))];
    // next m-subset in lexicographic order
    std::size_t k = m;
    while (k > 0 && idx[k - 1] == n - m + (k - 1)) --k;
    if (k == 0) break;
    ++idx[k - 1];
    for (std::size_t j = k; j < m; ++j) idx[j] = idx[j - 1] + 1;
  }
  return s;
}

BigInt reference_denominator(Kind kind, std::size_t n) {
  require_rank_kind(kind);
  const auto ni = static_cast<long>(n);
  switch (kind) {
    case Kind::Spearman: return BigInt(ni) * (ni * ni - 1);
    case Kind::Kendall: return binomial(ni, 2);
    default: return binomial(ni, kernel_order(kind)) * pattern_table(kind).scale;
  }
}

BigRational reference_kernel(Kind kind, std::span<const std::int32_t> pi) {
  BigRational q(BigInt(static_cast<long>(reference_scaled_sum(kind, pi))), reference_denominator(kind, pi.size()));
  q.canonicalize();
  return q;
}

BigRational pair_statistic_exact(Kind kind, std::span<const std::int32_t> xr, std::span<const std::int32_t> yr,
                                 Algorithm algo) {
  require_rank_kind(kind);
  check_permutation(xr);
  check_permutation(yr);
  const auto pi = relative_permutation(xr, yr);
  return algo == Algorithm::Reference ? reference_kernel(kind, pi) : fast_kernel(kind, pi).exact();
}

double pair_statistic(Kind kind, std::span<const std::int32_t> xr, std::span<const std::int32_t> yr, Algorithm algo) {
  if (algo == Algorithm::Reference) return to_double(pair_statistic_exact(kind, xr, yr, algo));
  require_rank_kind(kind);
  check_permutation(xr);
  check_permutation(yr);
  return fast_kernel(kind, relative_permutation(xr, yr)).value();
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) fail(ErrorCode::InvalidArgument, "pearson needs equal columns, n >= 2");
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0) || !(syy > 0)) fail(ErrorCode::DegenerateColumn, "zero sample variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

PairStatSheet pairwise_sheet(const RankMatrix& ranks, Kind kind, int threads) {
  require_rank_kind(kind);
  require_order(kind, ranks.n());
  PairStatSheet sheet{kind, ranks.n(), ranks.p(), std::vector<double>(pair_count(ranks.p()))};
  const std::size_t p = ranks.p();
  // one task per first coordinate s; each task writes only its own slots
  parallel_for(p, threads, [&](std::size_t s) {
    for (std::size_t t = s + 1; t < p; ++t) {
      const auto pi = relative_permutation(ranks.column(s), ranks.column(t));
      sheet.values[pair_index(s, t, p)] = fast_kernel(kind, pi).value();
    }
  });
  return sheet;
}

PairStatSheet pearson_sheet(const DataMatrix& data, int threads) {
  PairStatSheet sheet{Kind::Pearson, data.n(), data.p(), std::vector<double>(pair_count(data.p()))};
  const std::size_t p = data.p();
  parallel_for(p, threads, [&](std::size_t s) {
    for (std::size_t t = s + 1; t < p; ++t) sheet.values[pair_index(s, t, p)] = pearson(data.column(s), data.column(t));
  });
  return sheet;
}

}  // namespace ranklq
