#pragma once

#include <cstdint>
#include <string>

#include <gmpxx.h>

namespace ranklq {

/// Exact rational; canonical form is maintained by GMP after every operation.
using BigRational = mpq_class;
using BigInt = mpz_class;

BigInt big_from_int128(__int128 v);
BigRational rational_from_string(const std::string& text);  // "a/b" or "a"

/// "num/den", or "num" when the denominator is one.
std::string to_string(const BigRational& q);
std::string to_string(const BigInt& z);

/// Correctly rounded conversion (round to nearest).
double to_double(const BigRational& q);

/// Decimal rendering with `digits` significant digits.
std::string to_decimal(const BigRational& q, int digits = 20);

BigInt binomial(long n, long k);  // zero for k < 0 or k > n
BigInt factorial(long n);
BigInt falling_factorial(long n, long k);
BigRational power(const BigRational& base, unsigned long exponent);

}  // namespace ranklq
