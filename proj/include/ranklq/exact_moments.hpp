#pragma once

#include <vector>

#include "ranklq/coefficient.hpp"
#include "ranklq/rational.hpp"

namespace ranklq {

enum class MomentKind { Mean, Variance };

/// Integer partitions of r, each with parts in non-increasing order.
std::vector<std::vector<int>> integer_partitions(int r);

/// How the distinct-index power sum D_lambda(n) is evaluated.
enum class PowerSumMethod {
  Mobius,       // inclusion-exclusion over set partitions of the parts
  Monomial,     // dynamic programme over the scores (monomial symmetric function)
  Auto,         // Mobius for <= 8 parts, Monomial above
};

/// D_lambda(n) = sum over pairwise distinct i_1..i_l of prod_b a_{i_b}^{lambda_b}, a_i = i - (n+1)/2.
BigRational distinct_power_sum(const std::vector<int>& parts, long n, PowerSumMethod method = PowerSumMethod::Auto);

/// Null moment E(rho_n^r) from the integer-partition identity.
BigRational spearman_moment_partition(int r, long n, PowerSumMethod method = PowerSumMethod::Auto);

/// Printed closed-form polynomials for the L4 / L6 centering (Mean) and variance of rho_n^q, q in {4, 6}.
BigRational spearman_closed(int q, MomentKind which, long n);

/// Bernoulli number B_r with the convention B_1 = -1/2.
BigRational bernoulli(int r);

/// Cumulant of order r >= 1 of Kendall's tau under independence (zero for r = 1).
BigRational kendall_cumulant(int r, long n);

/// Null moment E(tau_n^r) via the moment-cumulant recursion.
BigRational kendall_moment(int r, long n);

BigRational kendall_closed(int q, MomentKind which, long n);

/// Raw moments M_0..M_max from cumulants kappa_1..kappa_max (kappa[0] unused).
std::vector<BigRational> moments_from_cumulants(const std::vector<BigRational>& kappa, int max_order);

/// Exact E(T_n^r) by enumerating all n! second rank columns against the identity, n <= 9.
BigRational bruteforce_moment(Kind kind, int r, int n);

/// Same enumeration, several orders at once.
std::vector<BigRational> bruteforce_moments(Kind kind, const std::vector<int>& orders, int n);

inline constexpr int kBruteforceMaxN = 9;

}  // namespace ranklq
