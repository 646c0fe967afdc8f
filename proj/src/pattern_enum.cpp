#include "ranklq/pattern_enum.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <tuple>

#include "ranklq/error.hpp"
#include "ranklq/exact_moments.hpp"
#include "ranklq/kernels.hpp"
#include "ranklq/parallel.hpp"
#include "ranklq/rng.hpp"

namespace ranklq {

namespace {

// Second-order constants, indexed from b = m_T.
const std::vector<const char*> kOmegaD2 = {"1/10", "41/45", "49/30", "28/45", "0", "0"};
const std::vector<const char*> kOmegaR2 = {"41/180", "287/60", "952/45", "154/5", "14", "0", "0"};
const std::vector<const char*> kOmegaTau2 = {"2/9", "32/45", "2/5", "0", "0"};

// a_{4,b}, b = 4..12
const std::vector<const char*> kTauA4 = {"6",          "3984/5",        "86562/5",        "955356/7",      "35817807/70",
                                         "71271603/70", "193676346/175", "108817236/175", "24762672/175"};

// a_{8,b}, b = 4..24
const std::vector<const char*> kTauA8 = {"86",
                                         "33679664/5",
                                         "45496828962/5",
                                         "2122691100468",
                                         "1646180207747391/10",
                                         "58827843848226249/10",
                                         "2909587818455523588/25",
                                         "392391897688632740043/275",
                                         "3209024638270591317216/275",
                                         "47841695172441710032608/715",
                                         "1393300388395409948078292/5005",
                                         "1655608772922828585830064/1925",
                                         "28632270526546652173175859/14300",
                                         "50601484615962860792463843/14300",
                                         "2020522303337817247422479631/425425",
                                         "4089733503008671502965210851/850850",
                                         "30687508392318266320595051829/8508500",
                                         "2364007315483141042586664069/1215500",
                                         "19681985307484680384868128/27625",
                                         "51591815442807446448342/325",
                                         "448521135302439977278464/27625"};

constexpr int kMaxEnumerationB = 12;
constexpr int kMaxOrder = 12;
constexpr int kLongThreshold = 9;

void require_degenerate(Kind kind) {
  if (!is_degenerate(kind)) {
    fail(ErrorCode::UnsupportedKind, std::string(kind_name(kind)) + " has no pattern-overlap expansion");
  }
}

double factorial_d(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

double binomial_d(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)));
}

std::vector<std::uint32_t> subsets_of_size(int b, int m) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t mask = 0; mask < (1u << b); ++mask) {
    if (std::popcount(mask) == m) out.push_back(mask);
  }
  return out;
}

// Lehmer rank of the relative order of pi restricted to the positions in `mask`.
class SubsetPatterns {
 public:
  SubsetPatterns(int b, int m) : m_(m), masks_(subsets_of_size(b, m)) {
    positions_.reserve(masks_.size() * static_cast<std::size_t>(m));
    for (std::uint32_t mask : masks_) {
      for (int i = 0; i < b; ++i) {
        if (mask & (1u << i)) positions_.push_back(i);
      }
    }
    weights_.assign(static_cast<std::size_t>(m), 1);
    for (int i = m - 2; i >= 0; --i) weights_[static_cast<std::size_t>(i)] = weights_[static_cast<std::size_t>(i) + 1] * (m - 1 - i);
  }

  const std::vector<std::uint32_t>& masks() const { return masks_; }

  std::size_t index(std::size_t subset, const std::vector<int>& pi) const {
    const int* pos = positions_.data() + subset * static_cast<std::size_t>(m_);
    std::size_t idx = 0;
    for (int i = 0; i < m_; ++i) {
      const int vi = pi[static_cast<std::size_t>(pos[i])];
      std::size_t smaller = 0;
      for (int j = i + 1; j < m_; ++j) smaller += pi[static_cast<std::size_t>(pos[j])] < vi;
      idx += smaller * weights_[static_cast<std::size_t>(i)];
    }
    return idx;
  }

 private:
  int m_;
  std::vector<std::uint32_t> masks_;
  std::vector<int> positions_;
  std::vector<std::size_t> weights_;
};

// Calls visit(pi) for every permutation of 0..b-1, split into fixed chunks; chunk sums are
// reduced in chunk order.
template <class PerChunk>
BigInt sum_over_permutations(int b, int threads, PerChunk&& per_chunk) {
  const auto total = static_cast<std::size_t>(factorial_d(b));
  const std::size_t chunks = std::min<std::size_t>(total, 256);
  std::vector<BigInt> partial(chunks);
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t begin = total * c / chunks;
    const std::size_t end = total * (c + 1) / chunks;
    std::vector<int> pi = pattern_from_index(begin, b);
    for (int& v : pi) --v;
    partial[c] = per_chunk(pi, end - begin);
  });
  BigInt sum = 0;
  for (const auto& s : partial) sum += s;
  return sum;
}

BigInt covers_sum(Kind kind, int b, int threads) {
  const PatternTable& table = pattern_table(kind);
  const int m = table.order;
  const SubsetPatterns patterns(b, m);
  const auto& masks = patterns.masks();
  const std::uint32_t full = (1u << b) - 1;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> covers;
  for (std::uint32_t i = 0; i < masks.size(); ++i) {
    for (std::uint32_t j = 0; j < masks.size(); ++j) {
      if ((masks[i] | masks[j]) == full) covers.emplace_back(i, j);
    }
  }
  return sum_over_permutations(b, threads, [&](std::vector<int>& pi, std::size_t count) {
    std::vector<std::int64_t> psi(masks.size());
    BigInt acc = 0;
    __int128 local = 0;
    for (std::size_t step = 0; step < count; ++step) {
      for (std::size_t s = 0; s < masks.size(); ++s) psi[s] = table.scaled[patterns.index(s, pi)];
      std::int64_t sum = 0;
      for (auto [i, j] : covers) sum += psi[i] * psi[j];
      local += sum;
      std::next_permutation(pi.begin(), pi.end());
    }
    acc += big_from_int128(local);
    return acc;
  });
}

// Sum over tuples whose union is exactly [b]: inclusion-exclusion over the union mask U of
// (sum of psi over m-subsets of U)^r.
BigInt union_mask_sum(Kind kind, int r, int b, int threads) {
  const PatternTable& table = pattern_table(kind);
  const int m = table.order;
  const SubsetPatterns patterns(b, m);
  const auto& masks = patterns.masks();
  const std::uint32_t size = 1u << b;
  std::int64_t max_abs = 0;
  for (auto v : table.scaled) max_abs = std::max<std::int64_t>(max_abs, std::llabs(v));
  const double bits = r * std::log2(static_cast<double>(masks.size() * static_cast<std::size_t>(max_abs)) + 1.0) + b + 2;
  const bool narrow = bits < 120.0;

  return sum_over_permutations(b, threads, [&](std::vector<int>& pi, std::size_t count) {
    std::vector<std::int64_t> s(size);
    BigInt acc = 0;
    for (std::size_t step = 0; step < count; ++step) {
      std::fill(s.begin(), s.end(), 0);
      for (std::size_t k = 0; k < masks.size(); ++k) s[masks[k]] = table.scaled[patterns.index(k, pi)];
      for (int bit = 0; bit < b; ++bit) {
        const std::uint32_t flag = 1u << bit;
        for (std::uint32_t u = 0; u < size; ++u) {
          if (u & flag) s[u] += s[u ^ flag];
        }
      }
      if (narrow) {
        __int128 local = 0;
        for (std::uint32_t u = 0; u < size; ++u) {
          if (s[u] == 0) continue;
          __int128 p = 1;
          for (int e = 0; e < r; ++e) p *= s[u];
          local += ((b - std::popcount(u)) % 2 == 0) ? p : -p;
        }
        acc += big_from_int128(local);
      } else {
        for (std::uint32_t u = 0; u < size; ++u) {
          if (s[u] == 0) continue;
          BigInt p;
          const BigInt base = static_cast<long>(s[u]);
          mpz_pow_ui(p.get_mpz_t(), base.get_mpz_t(), static_cast<unsigned long>(r));
          if ((b - std::popcount(u)) % 2 == 0) acc += p;
          else acc -= p;
        }
      }
      std::next_permutation(pi.begin(), pi.end());
    }
    return acc;
  });
}

std::mutex& cache_mutex() {
  static std::mutex mu;
  return mu;
}

std::map<std::tuple<int, int, int, int>, BigRational>& cache() {
  static std::map<std::tuple<int, int, int, int>, BigRational> c;
  return c;
}

}  // namespace

std::optional<BigRational> omega_embedded(Kind kind, int r, int b) {
  require_degenerate(kind);
  const int m = kernel_order(kind);
  const int offset = b - m;
  if (offset < 0) return std::nullopt;
  auto lookup = [&](const std::vector<const char*>& table) -> std::optional<BigRational> {
    if (offset >= static_cast<int>(table.size())) return std::nullopt;
    return rational_from_string(table[static_cast<std::size_t>(offset)]);
  };
  if (r == 2) {
    switch (kind) {
      case Kind::HoeffdingD: return lookup(kOmegaD2);
      case Kind::BkrR: return lookup(kOmegaR2);
      default: return lookup(kOmegaTau2);
    }
  }
  if (kind == Kind::TauStar && (r == 4 || r == 8)) {
    if (b > 3 * r) return std::nullopt;
    return taustar_coefficient(r, b) / BigRational(power(BigRational(3), static_cast<unsigned long>(r)));
  }
  return std::nullopt;
}

BigRational taustar_coefficient(int s, int b) {
  const auto& table = s == 4 ? kTauA4 : kTauA8;
  if ((s != 4 && s != 8) || b < 4 || b > 3 * s) {
    fail(ErrorCode::InvalidArgument, "a_{s,b} is tabulated for s in {4, 8}, 4 <= b <= 3s");
  }
  return rational_from_string(table[static_cast<std::size_t>(b - 4)]);
}

double omega_work_estimate(Kind kind, int r, int b, OmegaRoute route) {
  require_degenerate(kind);
  const int m = kernel_order(kind);
  const double perms = factorial_d(b);
  if (route == OmegaRoute::Covers) return perms * binomial_d(b, m) * binomial_d(m, 2 * m - b);
  (void)r;
  return perms * std::ldexp(1.0, b) * b;
}

BigRational omega(Kind kind, int r, int b, const OmegaOptions& options) {
  require_degenerate(kind);
  const int m = kernel_order(kind);
  if (r < 1 || r > kMaxOrder) fail(ErrorCode::InvalidArgument, "omega order r must be in 1..12");
  if (b < m || b > r * m) {
    fail(ErrorCode::InvalidArgument, "union size b must satisfy m_T <= b <= r m_T");
  }

  OmegaRoute route = options.route;
  if (route == OmegaRoute::Auto || route == OmegaRoute::Embedded) {
    if (auto printed = omega_embedded(kind, r, b)) return *printed;
    if (route == OmegaRoute::Embedded) fail(ErrorCode::MissingOmega, "no printed value for this (kind, r, b)");
    // Overlap below two leaves a factor with vanishing conditional mean.
    if (r == 2 && b > 2 * m - 2) return 0;
    if (r == 1) return 0;
    route = r == 2 ? OmegaRoute::Covers : OmegaRoute::UnionMask;
  }
  if (route == OmegaRoute::Covers && r != 2) fail(ErrorCode::InvalidArgument, "cover route implemented for r = 2");

  const double work = omega_work_estimate(kind, r, b, route);
  if (b > kMaxEnumerationB || (b >= kLongThreshold && !options.allow_long)) {
    std::ostringstream msg;
    msg << "enumeration over S_" << b << " needs about " << work << " pattern evaluations";
    if (b <= kMaxEnumerationB) msg << "; pass allow_long to run it";
    fail(ErrorCode::Infeasible, msg.str());
  }

  const auto key = std::make_tuple(static_cast<int>(kind), r, b, static_cast<int>(route));
  {
    std::lock_guard<std::mutex> lock(cache_mutex());
    if (auto it = cache().find(key); it != cache().end()) return it->second;
  }
  const BigInt total = route == OmegaRoute::Covers ? covers_sum(kind, b, options.threads)
                                                   : union_mask_sum(kind, r, b, options.threads);
  const PatternTable& table = pattern_table(kind);
  BigInt den = factorial(b);
  for (int e = 0; e < r; ++e) den *= table.scale;
  BigRational value(total, den);
  value.canonicalize();
  {
    std::lock_guard<std::mutex> lock(cache_mutex());
    cache()[key] = value;
  }
  return value;
}

BigRational moment_from_omega(Kind kind, int r, long n, const OmegaOptions& options) {
  require_degenerate(kind);
  const int m = kernel_order(kind);
  if (n < m) fail(ErrorCode::InvalidArgument, "n must be at least the kernel order");
  if (r == 0) return 1;
  BigRational sum = 0;
  const long top = std::min<long>(n, static_cast<long>(r) * m);
  for (int b = m; b <= top; ++b) {
    BigRational w;
    try {
      w = omega(kind, r, b, options);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Infeasible && e.code() != ErrorCode::MissingOmega) throw;
      fail(ErrorCode::MissingOmega, "Omega(" + std::string(kind_name(kind)) + ", " + std::to_string(r) + ", " +
                                        std::to_string(b) + ") unavailable: " + e.what());
    }
    sum += BigRational(binomial(n, b)) * w;
  }
  BigRational out = sum / BigRational(power(BigRational(binomial(n, m)), static_cast<unsigned long>(r)));
  out.canonicalize();
  return out;
}

TaustarL4 taustar_l4_exact(long n) {
  if (n < 4) fail(ErrorCode::InvalidArgument, "tau* needs n >= 4");
  const BigRational c4(binomial(n, 4));
  BigRational fourth = 0, eighth = 0;
  for (int b = 4; b <= std::min<long>(12, n); ++b) fourth += BigRational(binomial(n, b)) * taustar_coefficient(4, b);
  for (int b = 4; b <= std::min<long>(24, n); ++b) eighth += BigRational(binomial(n, b)) * taustar_coefficient(8, b);
  fourth /= BigRational(81) * power(c4, 4);
  eighth /= BigRational(6561) * power(c4, 8);
  TaustarL4 out{fourth, eighth - fourth * fourth};
  out.mu.canonicalize();
  out.v.canonicalize();
  return out;
}

BasisCheck binomial_basis_check(Kind kind, int r, int n, const OmegaOptions& options) {
  if (n > 8) fail(ErrorCode::TooLarge, "binomial basis check enumerates S_n, n <= 8");
  BasisCheck out;
  out.from_omega = moment_from_omega(kind, r, n, options);
  out.brute_force = bruteforce_moment(kind, r, n);
  out.ok = out.from_omega == out.brute_force;
  return out;
}

OmegaEstimate omega_monte_carlo(Kind kind, int b, std::uint64_t samples, std::uint64_t seed, int threads) {
  require_degenerate(kind);
  const PatternTable& table = pattern_table(kind);
  const int m = table.order;
  const int overlap = 2 * m - b;
  if (b < m || overlap < 0) fail(ErrorCode::InvalidArgument, "need m_T <= b <= 2 m_T");
  if (samples == 0) fail(ErrorCode::InvalidArgument, "at least one sample");

  constexpr std::uint64_t kBlock = 1u << 16;
  const std::uint64_t blocks = (samples + kBlock - 1) / kBlock;
  std::vector<std::pair<std::int64_t, std::int64_t>> partial(blocks, {0, 0});
  parallel_for(static_cast<std::size_t>(blocks), threads, [&](std::size_t blk) {
    Engine rng = make_stream(seed, 0x6f6d656761ULL, blk);
    const std::uint64_t begin = blk * kBlock;
    const std::uint64_t end = std::min(samples, begin + kBlock);
    std::vector<int> pi(static_cast<std::size_t>(b)), order(static_cast<std::size_t>(b));
    std::vector<int> first(static_cast<std::size_t>(m)), second, pattern(static_cast<std::size_t>(m));
    std::int64_t sum = 0, sumsq = 0;
    for (std::uint64_t s = begin; s < end; ++s) {
      std::iota(pi.begin(), pi.end(), 1);
      std::shuffle(pi.begin(), pi.end(), rng);
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      // I1 = order[0..m), complement = order[m..b), shared part drawn from I1
      std::copy(order.begin(), order.begin() + m, first.begin());
      std::shuffle(first.begin(), first.end(), rng);
      second.assign(order.begin() + m, order.end());
      second.insert(second.end(), first.begin(), first.begin() + overlap);
      auto psi_of = [&](std::vector<int> idx) {
        std::sort(idx.begin(), idx.end());
        for (int k = 0; k < m; ++k) pattern[static_cast<std::size_t>(k)] = pi[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])];
        return table.scaled[pattern_index(pattern)];
      };
      const std::int64_t prod = psi_of(first) * psi_of(second);
      sum += prod;
      sumsq += prod * prod;
    }
    partial[blk] = {sum, sumsq};
  });
  long double sum = 0, sumsq = 0;
  for (auto [s, q] : partial) {
    sum += s;
    sumsq += q;
  }
  const long double count = static_cast<long double>(samples);
  const long double mean = sum / count;
  const long double var = std::max<long double>(0, sumsq / count - mean * mean);
  const double covers = binomial_d(b, m) * binomial_d(m, overlap);
  const double scale2 = static_cast<double>(table.scale) * static_cast<double>(table.scale);
  OmegaEstimate out;
  out.samples = samples;
  out.estimate = covers * static_cast<double>(mean) / scale2;
  out.standard_error = covers * static_cast<double>(std::sqrt(var * count / std::max<long double>(1, count - 1)) /
                                                    std::sqrt(count)) / scale2;
  return out;
}

}  // namespace ranklq
