#include "ranklq/rational.hpp"

#include <cmath>
#include <cstdlib>

#include "ranklq/error.hpp"

namespace ranklq {

BigInt big_from_int128(__int128 v) {
  const bool negative = v < 0;
  unsigned __int128 u = negative ? -static_cast<unsigned __int128>(v) : static_cast<unsigned __int128>(v);
  const auto hi = static_cast<std::uint64_t>(u >> 64);
  const auto lo = static_cast<std::uint64_t>(u);
  BigInt z = hi;
  z <<= 64;
  // mpz_class has no uint64 constructor on every platform; go through two 32-bit halves.
  BigInt low = static_cast<unsigned long>(lo >> 32);
  low <<= 32;
  low += static_cast<unsigned long>(lo & 0xffffffffULL);
  z += low;
  return negative ? BigInt(-z) : z;
}

BigRational rational_from_string(const std::string& text) {
  BigRational q;
  if (q.set_str(text, 10) != 0) fail(ErrorCode::InvalidArgument, "not a rational literal: '" + text + "'");
  if (q.get_den() == 0) fail(ErrorCode::InvalidArgument, "zero denominator: '" + text + "'");
  q.canonicalize();
  return q;
}

std::string to_string(const BigRational& q) { return q.get_str(10); }
std::string to_string(const BigInt& z) { return z.get_str(10); }

double to_double(const BigRational& q) {
  const double d = q.get_d();  // truncates toward zero
  if (!std::isfinite(d)) return d;
  const double up = std::nextafter(d, q >= 0 ? INFINITY : -INFINITY);
  if (!std::isfinite(up)) return d;
  const BigRational err_d = abs(q - BigRational(d));
  const BigRational err_up = abs(q - BigRational(up));
  return err_up < err_d ? up : d;
}

std::string to_decimal(const BigRational& q, int digits) {
  if (digits < 1) digits = 1;
  if (q == 0) return "0";
  BigRational a = abs(q);
  // decimal exponent of the leading digit
  long e = static_cast<long>(std::floor(std::log10(to_double(a))));
  auto scaled_int = [&](long exp10) {
    BigRational s = a;
    BigInt ten_pow;
    mpz_ui_pow_ui(ten_pow.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(exp10)));
    if (exp10 >= 0) s *= ten_pow; else s /= ten_pow;
    // round half up
    BigInt num = s.get_num() * 2 + s.get_den();
    BigInt den = s.get_den() * 2;
    BigInt out;
    mpz_fdiv_q(out.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    return out;
  };
  BigInt mant = scaled_int(digits - 1 - e);
  std::string s = mant.get_str();
  if (static_cast<int>(s.size()) > digits) {  // rounding carried into a new digit, or log10 estimate was low
    ++e;
    mant = scaled_int(digits - 1 - e);
    s = mant.get_str();
  } else if (static_cast<int>(s.size()) < digits) {
    --e;
    mant = scaled_int(digits - 1 - e);
    s = mant.get_str();
  }
  std::string out = q < 0 ? "-" : "";
  if (e >= -5 && e < digits) {
    if (e >= 0) {
      out += s.substr(0, static_cast<size_t>(e) + 1);
      if (static_cast<int>(s.size()) > e + 1) out += "." + s.substr(static_cast<size_t>(e) + 1);
    } else {
      out += "0." + std::string(static_cast<size_t>(-e - 1), '0') + s;
    }
  } else {
    out += s.substr(0, 1);
    if (s.size() > 1) out += "." + s.substr(1);
    out += "e" + std::to_string(e);
  }
  return out;
}

BigInt binomial(long n, long k) {
  if (k < 0 || n < 0 || k > n) return 0;
  BigInt z;
  mpz_bin_uiui(z.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
  return z;
}

BigInt factorial(long n) {
  BigInt z;
  mpz_fac_ui(z.get_mpz_t(), static_cast<unsigned long>(n));
  return z;
}

BigInt falling_factorial(long n, long k) {
  BigInt z = 1;
  for (long j = 0; j < k; ++j) z *= (n - j);
  return z;
}

BigRational power(const BigRational& base, unsigned long exponent) {
  BigRational out;
  mpz_pow_ui(out.get_num_mpz_t(), base.get_num_mpz_t(), exponent);
  mpz_pow_ui(out.get_den_mpz_t(), base.get_den_mpz_t(), exponent);
  out.canonicalize();
  return out;
}

}  // namespace ranklq
