#include "ranklq/exact_moments.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <string>

#include "ranklq/error.hpp"
#include "ranklq/kernels.hpp"

namespace ranklq {

namespace {

// Polynomial with integer coefficients, highest degree first.
BigInt horner(const std::vector<const char*>& coefficients, long n) {
  BigInt acc = 0;
  for (const char* c : coefficients) acc = acc * n + BigInt(c);
  return acc;
}

BigInt ipow(long base, unsigned long e) {
  BigInt z;
  mpz_ui_pow_ui(z.get_mpz_t(), static_cast<unsigned long>(std::labs(base)), e);
  return (base < 0 && (e % 2 == 1)) ? BigInt(-z) : z;
}

// Closed-form numerator polynomials.
const std::vector<const char*> kRhoP4 = {"25", "-38", "-35", "72"};
const std::vector<const char*> kRhoP6 = {"1225", "-4361", "-178", "23818", "-22783", "-50081", "54280", "44160", "-28800"};
const std::vector<const char*> kRhoQ4 = {"17500",    "-99575",    "93952",    "857943",    "-2236650",
                                         "-3105081", "12836468",  "8558537",  "-32726710", "-20519664",
                                         "28279440", "9858240",   "-12700800"};
const std::vector<const char*> kRhoQ6 = {"1576158959375",
                                         "-26956502698125",
                                         "204016193881500",
                                         "-656132617822682",
                                         "-1171932384888603",
                                         "16913917053629829",
                                         "-33663135573263722",
                                         "-143066811467638476",
                                         "610987613264235129",
                                         "596842447834386253",
                                         "-5189139972464602944",
                                         "-1409441833203864570",
                                         "27750786105920376371",
                                         "4444828679768649627",
                                         "-95698023681505100946",
                                         "-19996738740525207104",
                                         "206938856876542180608",
                                         "34634552355461373696",
                                         "-313861911687028044288",
                                         "-56314087053512122368",
                                         "270499002102369976320",
                                         "37528151745373470720",
                                         "-101439305560276992000"};
const std::vector<const char*> kTauP4 = {"100", "328", "-127", "-997", "-372"};
const std::vector<const char*> kTauP6 = {"9800", "32732", "-42010", "-230695", "-72460", "400733", "391500", "118080"};
const std::vector<const char*> kTauQ4 = {"140000",  "617400",   "-160764",  "-4827762", "-7764663",
                                         "3028185", "23170684", "31403277", "20222343", "5273100"};
const std::vector<const char*> kTauQ6 = {"100874173400000",     "106587400920000",     "-1350735059674000",
                                         "-2750236703502288",   "705156071105876",     "18114848707300164",
                                         "74210935173807565",   "32519698879088181",   "-379954037364238322",
                                         "-639273543932846298", "136412983449767425",  "1193679769717739457",
                                         "1569782012721160896", "1559385642899802384", "1047269150681247360",
                                         "285343922116915200"};

BigRational ratio(const BigInt& num, const BigInt& den) {
  if (den == 0) fail(ErrorCode::InvalidArgument, "closed form undefined at this n");
  BigRational q(num, den);
  q.canonicalize();
  return q;
}

// Plain power sums of the doubled centered scores b_i = 2i - n - 1, k = 0..max_k.
std::vector<BigInt> doubled_power_sums(long n, int max_k) {
  std::vector<BigInt> p(static_cast<std::size_t>(max_k) + 1, 0);
  for (long i = 1; i <= n; ++i) {
    const long b = 2 * i - n - 1;
    BigInt term = 1;
    for (int k = 0; k <= max_k; ++k) {
      p[static_cast<std::size_t>(k)] += term;
      term *= b;
    }
  }
  return p;
}

// Distinct-index power sum over b_i via Mobius inversion on the lattice of set partitions.
BigInt mobius_distinct_sum(const std::vector<int>& parts, const std::vector<BigInt>& psum) {
  const std::size_t l = parts.size();
  if (l == 0) return 1;
  std::vector<int> block(l, 0);  // restricted growth string
  BigInt total = 0;
  while (true) {
    const int blocks = *std::max_element(block.begin(), block.end()) + 1;
    std::vector<int> exponent(static_cast<std::size_t>(blocks), 0);
    std::vector<int> size(static_cast<std::size_t>(blocks), 0);
    for (std::size_t b = 0; b < l; ++b) {
      exponent[static_cast<std::size_t>(block[b])] += parts[b];
      ++size[static_cast<std::size_t>(block[b])];
    }
    BigInt term = 1;
    for (int k = 0; k < blocks && term != 0; ++k) {
      const int s = size[static_cast<std::size_t>(k)];
      // mu = (-1)^(s-1) (s-1)!
      BigInt mu = factorial(s - 1);
      if ((s - 1) % 2 == 1) mu = -mu;
      term *= mu * psum[static_cast<std::size_t>(exponent[static_cast<std::size_t>(k)])];
    }
    total += term;
    // next restricted growth string
    std::size_t i = l;
    bool advanced = false;
    while (i > 1) {
      --i;
      const int prefix_max = *std::max_element(block.begin(), block.begin() + static_cast<std::ptrdiff_t>(i));
      if (block[i] <= prefix_max) {
        ++block[i];
        std::fill(block.begin() + static_cast<std::ptrdiff_t>(i) + 1, block.end(), 0);
        advanced = true;
        break;
      }
    }
    if (!advanced) break;
  }
  return total;
}

// Same quantity via the monomial symmetric function: D = prod_j m_j! * m_lambda(b_1..b_n).
BigInt monomial_distinct_sum(const std::vector<int>& parts, long n) {
  std::map<int, int> mult;
  for (int part : parts) ++mult[part];
  std::vector<int> sizes, counts;
  for (auto [size, count] : mult) {
    sizes.push_back(size);
    counts.push_back(count);
  }
  // mixed-radix state: remaining parts of each size
  std::vector<long> stride(sizes.size(), 1);
  long states = 1;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    stride[k] = states;
    states *= counts[k] + 1;
  }
  std::vector<BigInt> dp(static_cast<std::size_t>(states), 0), next;
  long start = 0;
  for (std::size_t k = 0; k < sizes.size(); ++k) start += counts[k] * stride[k];
  dp[static_cast<std::size_t>(start)] = 1;
  for (long i = 1; i <= n; ++i) {
    const long b = 2 * i - n - 1;
    next = dp;
    for (long s = 0; s < states; ++s) {
      if (dp[static_cast<std::size_t>(s)] == 0) continue;
      for (std::size_t k = 0; k < sizes.size(); ++k) {
        const long remaining = (s / stride[k]) % (counts[k] + 1);
        if (remaining == 0) continue;
        next[static_cast<std::size_t>(s - stride[k])] +=
            dp[static_cast<std::size_t>(s)] * ipow(b, static_cast<unsigned long>(sizes[k]));
      }
    }
    dp.swap(next);
  }
  BigInt out = dp[0];
  for (int c : counts) out *= factorial(c);
  return out;
}

BigInt doubled_distinct_sum(const std::vector<int>& parts, long n, PowerSumMethod method) {
  if (static_cast<long>(parts.size()) > n) return 0;
  if (method == PowerSumMethod::Auto) method = parts.size() <= 8 ? PowerSumMethod::Mobius : PowerSumMethod::Monomial;
  if (method == PowerSumMethod::Monomial) return monomial_distinct_sum(parts, n);
  const int r = std::accumulate(parts.begin(), parts.end(), 0);
  return mobius_distinct_sum(parts, doubled_power_sums(n, r));
}

void require_closed_q(int q) {
  if (q != 4 && q != 6) fail(ErrorCode::InvalidArgument, "closed forms exist for q = 4 and q = 6 only");
}

}  // namespace

std::vector<std::vector<int>> integer_partitions(int r) {
  std::vector<std::vector<int>> out;
  std::vector<int> current;
  std::function<void(int, int)> rec = [&](int remaining, int max_part) {
    if (remaining == 0) {
      out.push_back(current);
      return;
    }
    for (int part = std::min(remaining, max_part); part >= 1; --part) {
      current.push_back(part);
      rec(remaining - part, part);
      current.pop_back();
    }
  };
  if (r >= 0) rec(r, r);
  return out;
}

BigRational distinct_power_sum(const std::vector<int>& parts, long n, PowerSumMethod method) {
  const int r = std::accumulate(parts.begin(), parts.end(), 0);
  BigRational q(doubled_distinct_sum(parts, n, method), ipow(2, static_cast<unsigned long>(r)));
  q.canonicalize();
  return q;
}

BigRational spearman_moment_partition(int r, long n, PowerSumMethod method) {
  if (n < 2 || r < 0) fail(ErrorCode::InvalidArgument, "spearman moments need n >= 2, r >= 0");
  if (r == 0) return 1;
  BigRational sum = 0;
  for (const auto& lambda : integer_partitions(r)) {
    const auto l = static_cast<long>(lambda.size());
    if (l > n) continue;  // no distinct index tuple of that length
    BigInt denom = falling_factorial(n, l);
    std::map<int, int> mult;
    for (int part : lambda) {
      denom *= factorial(part);
      ++mult[part];
    }
    for (auto [part, count] : mult) denom *= factorial(count);
    const BigInt d = doubled_distinct_sum(lambda, n, method);
    sum += BigRational(factorial(r) * d * d, denom);
  }
  // D_lambda over a_i equals the doubled sum over 2^r; c_rho = 12 / (n (n^2 - 1))
  BigRational c(12, BigInt(n) * (n * n - 1));
  c.canonicalize();
  BigRational scale = power(c, static_cast<unsigned long>(r)) / BigRational(ipow(4, static_cast<unsigned long>(r)));
  BigRational out = sum * scale;
  out.canonicalize();
  return out;
}

BigRational spearman_closed(int q, MomentKind which, long n) {
  require_closed_q(q);
  if (n < 2) fail(ErrorCode::InvalidArgument, "spearman closed forms need n >= 2");
  const BigInt N = n;
  const BigInt nm1 = n - 1, np1 = n + 1;
  auto pw = [](const BigInt& b, unsigned long e) {
    BigInt z;
    mpz_pow_ui(z.get_mpz_t(), b.get_mpz_t(), e);
    return z;
  };
  if (which == MomentKind::Mean) {
    if (q == 4) return ratio(3 * horner(kRhoP4, n), 25 * N * pw(nm1, 3) * np1);
    return ratio(3 * horner(kRhoP6, n), 245 * pw(N, 3) * pw(nm1, 5) * pw(np1, 3));
  }
  if (q == 4) return ratio(24 * (N - 2) * horner(kRhoQ4, n), 4375 * pw(N, 5) * pw(nm1, 7) * pw(np1, 5));
  return ratio(18 * (N - 2) * horner(kRhoQ6, n), BigInt("2789661875") * pw(N, 9) * pw(nm1, 11) * pw(np1, 9));
}

BigRational bernoulli(int r) {
  if (r < 0) fail(ErrorCode::InvalidArgument, "negative Bernoulli index");
  static std::vector<BigRational> cache = {BigRational(1)};
  static std::mutex cache_mutex;
  std::lock_guard<std::mutex> lock(cache_mutex);
  while (static_cast<int>(cache.size()) <= r) {
    const int m = static_cast<int>(cache.size());
    BigRational s = 0;
    for (int k = 0; k < m; ++k) s += BigRational(binomial(m + 1, k)) * cache[static_cast<std::size_t>(k)];
    BigRational b = -s / BigRational(m + 1);
    b.canonicalize();
    cache.push_back(b);
  }
  return cache[static_cast<std::size_t>(r)];
}

BigRational kendall_cumulant(int r, long n) {
  if (n < 2 || r < 1) fail(ErrorCode::InvalidArgument, "kendall cumulants need n >= 2, r >= 1");
  if (r == 1) return 0;
  // inversion count: kappa_r(I) = (B_r / r) sum_j (j^r - 1); scaled by (-4 / (n(n-1)))^r
  BigInt s = 0;
  for (long j = 1; j <= n; ++j) s += ipow(j, static_cast<unsigned long>(r)) - 1;
  BigRational kappa_i = bernoulli(r) * BigRational(s) / BigRational(r);
  BigRational scale(-4, BigInt(n) * (n - 1));
  scale.canonicalize();
  BigRational out = power(scale, static_cast<unsigned long>(r)) * kappa_i;
  out.canonicalize();
  return out;
}

std::vector<BigRational> moments_from_cumulants(const std::vector<BigRational>& kappa, int max_order) {
  std::vector<BigRational> m(static_cast<std::size_t>(max_order) + 1, 0);
  m[0] = 1;
  for (int l = 1; l <= max_order; ++l) {
    BigRational acc = 0;
    for (int j = 1; j <= l; ++j) {
      if (j >= static_cast<int>(kappa.size())) break;
      acc += BigRational(binomial(l - 1, j - 1)) * kappa[static_cast<std::size_t>(j)] * m[static_cast<std::size_t>(l - j)];
    }
    m[static_cast<std::size_t>(l)] = acc;
  }
  return m;
}

BigRational kendall_moment(int r, long n) {
  if (n < 2 || r < 0) fail(ErrorCode::InvalidArgument, "kendall moments need n >= 2, r >= 0");
  std::vector<BigRational> kappa(static_cast<std::size_t>(r) + 1, 0);
  for (int j = 1; j <= r; ++j) kappa[static_cast<std::size_t>(j)] = kendall_cumulant(j, n);
  return moments_from_cumulants(kappa, r)[static_cast<std::size_t>(r)];
}

BigRational kendall_closed(int q, MomentKind which, long n) {
  require_closed_q(q);
  if (n < 2) fail(ErrorCode::InvalidArgument, "kendall closed forms need n >= 2");
  const BigInt N = n;
  const BigInt nm1 = n - 1;
  auto pw = [](const BigInt& b, unsigned long e) {
    BigInt z;
    mpz_pow_ui(z.get_mpz_t(), b.get_mpz_t(), e);
    return z;
  };
  if (which == MomentKind::Mean) {
    if (q == 4) return ratio(4 * horner(kTauP4, n), 675 * pw(N, 3) * pw(nm1, 3));
    return ratio(8 * horner(kTauP6, n), 59535 * pw(N, 5) * pw(nm1, 5));
  }
  if (q == 4) return ratio(256 * (N - 2) * horner(kTauQ4, n), 9568125 * pw(N, 7) * pw(nm1, 7));
  return ratio(128 * (N - 2) * horner(kTauQ6, n), BigInt("164726744056875") * pw(N, 11) * pw(nm1, 11));
}

std::vector<BigRational> bruteforce_moments(Kind kind, const std::vector<int>& orders, int n) {
  if (kind == Kind::Pearson) fail(ErrorCode::UnsupportedKind, "Pearson has no distribution-free null law");
  if (n > kBruteforceMaxN) {
    fail(ErrorCode::TooLarge, "brute force enumerates n! permutations; n <= " + std::to_string(kBruteforceMaxN));
  }
  if (n < kernel_order(kind)) fail(ErrorCode::InvalidArgument, "n below kernel order");
  std::vector<std::int32_t> pi(static_cast<std::size_t>(n));
  std::iota(pi.begin(), pi.end(), 1);
  std::map<std::int64_t, std::int64_t> histogram;
  do {
    ++histogram[reference_scaled_sum(kind, pi)];
  } while (std::next_permutation(pi.begin(), pi.end()));

  const BigInt den = reference_denominator(kind, static_cast<std::size_t>(n));
  const BigInt perms = factorial(n);
  std::vector<BigRational> out;
  for (int r : orders) {
    if (r < 0) fail(ErrorCode::InvalidArgument, "negative moment order");
    BigInt acc = 0;
    for (auto [value, count] : histogram) acc += ipow(value, static_cast<unsigned long>(r)) * count;
    BigInt den_r;
    mpz_pow_ui(den_r.get_mpz_t(), den.get_mpz_t(), static_cast<unsigned long>(r));
    out.push_back(ratio(acc, den_r * perms));
  }
  return out;
}

BigRational bruteforce_moment(Kind kind, int r, int n) { return bruteforce_moments(kind, {r}, n).front(); }

}  // namespace ranklq
