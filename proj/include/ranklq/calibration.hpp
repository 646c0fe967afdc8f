#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ranklq/coefficient.hpp"
#include "ranklq/rational.hpp"

namespace ranklq {

enum class Provenance { Exact, MonteCarlo, LeadingOrder };

std::string_view provenance_name(Provenance p);
Provenance parse_provenance(std::string_view text);

/// Constants of the degenerate maximum statistic: leading eigenvalue, eigenvalue sum,
/// multiplicity and the product constant kappa of the limiting law F.
struct SpectralConstants {
  double lambda1 = 0.0;
  double lambda_sum = 0.0;
  int mu1 = 1;
  double kappa = 1.0;
  int m = 0;
  double tolerance = 0.0;
};

/// Centering and variance of T^q for one power q.
struct PowerCalibration {
  double mu = 0.0;
  double v = 0.0;
  Provenance source = Provenance::Exact;
};

struct CalibrationRecord {
  Kind kind = Kind::Spearman;
  long n = 0;
  Provenance source = Provenance::Exact;
  std::uint64_t B = 0;  // Monte Carlo replicates, zero when unused
  std::uint64_t seed = 0;
  double sigma2 = 0.0;  // var_0 of the pair statistic
  std::map<int, PowerCalibration> powers;  // q in {2, 4, 6}
  std::map<int, double> mc_moments;        // raw sample moments, powers {2, 4, 6, 8, 12}
  std::optional<SpectralConstants> spectral;

  /// Throws CalibrationUnavailable when q is not stored.
  const PowerCalibration& at(int q) const;
  bool has(int q) const { return powers.count(q) != 0; }

  /// Throws SchemaMismatch when an invariant fails (v <= 0, sigma2 <= 0, MC record without B).
  void validate() const;
};

bool operator==(const SpectralConstants& a, const SpectralConstants& b);
bool operator==(const PowerCalibration& a, const PowerCalibration& b);
bool operator==(const CalibrationRecord& a, const CalibrationRecord& b);

inline constexpr std::uint64_t kMinMonteCarloB = 10000;
inline constexpr std::uint64_t kMaxMonteCarloB = 100000000;
inline constexpr std::uint64_t kDefaultMonteCarloB = 1000000;

/// Raw null moments E T^k, k in {2, 4, 6, 8, 12}, from B uniform permutations. Replicate b uses
/// the stream keyed by (seed, b); the result does not depend on `threads`.
CalibrationRecord mc_calibrate(Kind kind, long n, std::uint64_t B, std::uint64_t seed, int threads = 1);

/// Monte Carlo standard error of the stored sample moment E T^power, power in {2, 4, 6}.
double mc_moment_standard_error(const CalibrationRecord& record, int power);

/// var_0 of the pair statistic: 1/(n-1) for rho and Pearson, 2(2n+5)/(9n(n-1)) for tau,
/// moment_from_omega(kind, 2, n) for degenerate kinds.
BigRational sigma2_exact_rational(Kind kind, long n);
double sigma2_exact(Kind kind, long n);

/// Cumulants and raw moments of J_a = sum_{i,j} a / (pi^4 i^2 j^2) (xi_ij^2 - 1).
struct JaMomentTable {
  int a = 3;
  std::vector<BigRational> cumulants;  // index r, entry 0 unused
  std::vector<BigRational> moments;    // index r, M_0 = 1

  BigRational variance_of_power(int q) const { return moments.at(2 * q) - moments.at(q) * moments.at(q); }
};

/// zeta(2r) / pi^(2r), exact.
BigRational zeta_even_over_pi(int r);

JaMomentTable ja_moments(int a, int max_r);

struct LeadingConstants {
  double mu = 0.0;
  double v = 0.0;
};

/// n-free coefficients: mu_lead = c_mu n^(-q) and v_lead = c_v n^(-2q) for degenerate kinds.
LeadingConstants leading_coefficients(Kind kind, int q);

/// Leading-order centering and variance of T^q at sample size n.
LeadingConstants leading_constants(Kind kind, int q, long n);

/// Scale pair (B_T, a_T): n T converges to B_T J_{a_T}.
std::pair<int, int> degenerate_scale(Kind kind);

SpectralConstants spectral_constants(Kind kind);

/// kappa from its zeta series; `truncated_kappa` from the explicit product over i j <= limit
/// plus a first-order tail bound, for cross-checking.
double spectral_kappa();
double truncated_kappa(long limit);

struct MuV {
  double mu = 0.0;
  double v = 0.0;
  Provenance source = Provenance::Exact;
};

/// Centering and variance of T^q. rho and tau are exact; tau* with q in {2, 4} is exact; D, R and
/// tau* q = 6 read the Monte Carlo record (CalibrationUnavailable if absent or mismatched).
MuV mu_v(Kind kind, int q, long n, const CalibrationRecord* monte_carlo = nullptr);

struct CalibrationOptions {
  std::uint64_t B = kDefaultMonteCarloB;
  std::uint64_t seed = 0;
  int threads = 1;
  /// For degenerate kinds, skip simulation and use leading-order constants.
  bool leading_order = false;
};

/// Full record for (kind, n): exact where available, Monte Carlo or leading order otherwise,
/// with spectral constants for degenerate kinds.
CalibrationRecord build_calibration(Kind kind, long n, const CalibrationOptions& options = {});

std::string calibration_to_json(const CalibrationRecord& record);
/// Throws SchemaMismatch on a structurally valid but inconsistent document, CorruptFile on parse errors.
CalibrationRecord calibration_from_json(const std::string& text);

void save_calibration(const std::string& path, const CalibrationRecord& record);
/// Throws CorruptFile when the file is missing or unreadable.
CalibrationRecord load_calibration(const std::string& path);

/// File name used by calibration caches: one file per (kind, n, B, seed, mode).
std::string calibration_cache_name(Kind kind, long n, const CalibrationOptions& options);

/// Shortest decimal that round-trips the double.
std::string format_double(double x);
double parse_double(const std::string& text);

}  // namespace ranklq
