#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ranklq/coefficient.hpp"
#include "ranklq/rational.hpp"

namespace ranklq {

/// How Omega_{T,r,b} is obtained.
enum class OmegaRoute {
  Auto,       // embedded constant when printed, otherwise enumeration
  Covers,     // explicit (I_1, I_2) cover enumeration; r = 2 only
  UnionMask,  // per-permutation inclusion-exclusion over union masks; any r <= 12
  Embedded,   // printed constants only
};

struct OmegaOptions {
  OmegaRoute route = OmegaRoute::Auto;
  /// Permit enumerations over S_b with b >= 9 (minutes to hours).
  bool allow_long = false;
  int threads = 1;
};

/// Omega_{T,r,b} = (1/b!) sum over pi in S_b and covers (I_1..I_r) of [b] by m_T-subsets of
/// prod_a psi_T(pattern of pi on I_a). Degenerate kinds only; m_T <= b <= r m_T.
/// Throws Infeasible (with a work estimate) when the enumeration is gated or too large.
BigRational omega(Kind kind, int r, int b, const OmegaOptions& options = {});

/// Printed value when available (r = 2 for D, R, tau*; r in {4, 8} for tau*).
std::optional<BigRational> omega_embedded(Kind kind, int r, int b);

/// Number of (permutation, cover) pairs an enumeration would visit.
double omega_work_estimate(Kind kind, int r, int b, OmegaRoute route);

/// a_{s,b} for tau*, s in {4, 8}; Omega_{tau*,s,b} = a_{s,b} / 3^s.
BigRational taustar_coefficient(int s, int b);

/// E_0 T_n^r = C(n, m)^{-r} sum_b C(n, b) Omega_{T,r,b}. Throws MissingOmega if a needed
/// coefficient is unavailable under the given options.
BigRational moment_from_omega(Kind kind, int r, long n, const OmegaOptions& options = {});

struct TaustarL4 {
  BigRational mu;
  BigRational v;
};

/// Exact L4 centering and variance of the tau* pair statistic from the printed a_{4,b}, a_{8,b}.
TaustarL4 taustar_l4_exact(long n);

struct BasisCheck {
  bool ok = false;
  BigRational from_omega;
  BigRational brute_force;
};

/// Compares moment_from_omega with the S_n enumeration oracle (n <= 8).
BasisCheck binomial_basis_check(Kind kind, int r, int n, const OmegaOptions& options = {});

struct OmegaEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  std::uint64_t samples = 0;
};

/// Monte Carlo estimate of Omega_{T,2,b}: uniform permutation and uniform cover, scaled by the
/// number of covers C(b, m) C(m, 2m - b).
OmegaEstimate omega_monte_carlo(Kind kind, int b, std::uint64_t samples, std::uint64_t seed, int threads = 1);

}  // namespace ranklq
