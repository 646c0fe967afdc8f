#include "ranklq/calibration.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "ranklq/error.hpp"
#include "ranklq/exact_moments.hpp"
#include "ranklq/kernels.hpp"
#include "ranklq/parallel.hpp"
#include "ranklq/pattern_enum.hpp"
#include "ranklq/rng.hpp"

namespace ranklq {

namespace {

constexpr std::uint64_t kPermutationTag = 0x6e756c6c7065726dULL;
constexpr std::array<int, 5> kStoredPowers = {2, 4, 6, 8, 12};
constexpr const char* kSchema = "ranklq.calibration/1";

void require_degenerate(Kind kind) {
  if (!is_degenerate(kind)) fail(ErrorCode::UnsupportedKind, std::string(kind_name(kind)) + " is not degenerate");
}

double moment_or_fail(const CalibrationRecord& rec, int power) {
  auto it = rec.mc_moments.find(power);
  if (it == rec.mc_moments.end()) {
    fail(ErrorCode::CalibrationUnavailable, "Monte Carlo moment of order " + std::to_string(power) + " missing");
  }
  return it->second;
}

}  // namespace

std::string_view provenance_name(Provenance p) {
  switch (p) {
    case Provenance::Exact: return "exact";
    case Provenance::MonteCarlo: return "monte_carlo";
    case Provenance::LeadingOrder: return "leading_order";
  }
  return "exact";
}

Provenance parse_provenance(std::string_view text) {
  if (text == "exact") return Provenance::Exact;
  if (text == "monte_carlo") return Provenance::MonteCarlo;
  if (text == "leading_order") return Provenance::LeadingOrder;
  fail(ErrorCode::SchemaMismatch, "unknown provenance '" + std::string(text) + "'");
}

const PowerCalibration& CalibrationRecord::at(int q) const {
  auto it = powers.find(q);
  if (it == powers.end()) {
    fail(ErrorCode::CalibrationUnavailable,
         "no L" + std::to_string(q) + " constants for " + std::string(kind_name(kind)) + " at n = " + std::to_string(n));
  }
  return it->second;
}

void CalibrationRecord::validate() const {
  if (n < kernel_order(kind)) fail(ErrorCode::SchemaMismatch, "n below kernel order");
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) fail(ErrorCode::SchemaMismatch, "sigma2 must be positive");
  for (const auto& [q, entry] : powers) {
    if (q != 2 && q != 4 && q != 6) fail(ErrorCode::SchemaMismatch, "stored power must be 2, 4 or 6");
    if (!(entry.v > 0.0) || !std::isfinite(entry.v) || !std::isfinite(entry.mu)) {
      fail(ErrorCode::SchemaMismatch, "variance for q = " + std::to_string(q) + " must be positive and finite");
    }
  }
  if (source == Provenance::MonteCarlo && B == 0) fail(ErrorCode::SchemaMismatch, "Monte Carlo record without B");
  if (spectral) {
    const auto& s = *spectral;
    if (!(s.lambda1 > 0.0) || s.lambda_sum < s.lambda1 || s.mu1 < 1 || s.kappa < 1.0) {
      fail(ErrorCode::SchemaMismatch, "spectral constants out of range");
    }
  }
}

bool operator==(const SpectralConstants& a, const SpectralConstants& b) {
  return a.lambda1 == b.lambda1 && a.lambda_sum == b.lambda_sum && a.mu1 == b.mu1 && a.kappa == b.kappa && a.m == b.m &&
         a.tolerance == b.tolerance;
}

bool operator==(const PowerCalibration& a, const PowerCalibration& b) {
  return a.mu == b.mu && a.v == b.v && a.source == b.source;
}

bool operator==(const CalibrationRecord& a, const CalibrationRecord& b) {
  return a.kind == b.kind && a.n == b.n && a.source == b.source && a.B == b.B && a.seed == b.seed &&
         a.sigma2 == b.sigma2 && a.powers == b.powers && a.mc_moments == b.mc_moments && a.spectral == b.spectral;
}

CalibrationRecord mc_calibrate(Kind kind, long n, std::uint64_t B, std::uint64_t seed, int threads) {
  require_degenerate(kind);
  if (n < kernel_order(kind)) fail(ErrorCode::InvalidArgument, "n below kernel order");
  if (B < kMinMonteCarloB || B > kMaxMonteCarloB) {
    fail(ErrorCode::InfeasibleB, "B must lie in [" + std::to_string(kMinMonteCarloB) + ", " +
                                     std::to_string(kMaxMonteCarloB) + "], got " + std::to_string(B));
  }
  std::vector<double> values(static_cast<std::size_t>(B));
  parallel_for(values.size(), threads, [&](std::size_t b) {
    thread_local std::vector<std::int32_t> pi;
    pi.resize(static_cast<std::size_t>(n));
    std::iota(pi.begin(), pi.end(), 1);
    Engine rng = make_stream(seed, kPermutationTag, b);
    std::shuffle(pi.begin(), pi.end(), rng);
    values[b] = fast_kernel(kind, pi).value();
  });

  std::array<long double, kStoredPowers.size()> sums{};
  for (double x : values) {
    const long double x2 = static_cast<long double>(x) * x;
    const long double x4 = x2 * x2;
    const long double x6 = x4 * x2;
    const long double x8 = x4 * x4;
    sums[0] += x2;
    sums[1] += x4;
    sums[2] += x6;
    sums[3] += x8;
    sums[4] += x6 * x6;
  }

  CalibrationRecord rec;
  rec.kind = kind;
  rec.n = n;
  rec.source = Provenance::MonteCarlo;
  rec.B = B;
  rec.seed = seed;
  rec.sigma2 = sigma2_exact(kind, n);
  for (std::size_t k = 0; k < kStoredPowers.size(); ++k) {
    rec.mc_moments[kStoredPowers[k]] = static_cast<double>(sums[k] / static_cast<long double>(B));
  }
  for (int q : {2, 4, 6}) {
    const double mq = rec.mc_moments.at(q);
    rec.powers[q] = {mq, rec.mc_moments.at(2 * q) - mq * mq, Provenance::MonteCarlo};
  }
  return rec;
}

double mc_moment_standard_error(const CalibrationRecord& record, int power) {
  if (power != 2 && power != 4 && power != 6) fail(ErrorCode::InvalidArgument, "power must be 2, 4 or 6");
  if (record.B == 0) fail(ErrorCode::CalibrationUnavailable, "record has no Monte Carlo moments");
  const double m = moment_or_fail(record, power);
  const double m2 = moment_or_fail(record, 2 * power);
  return std::sqrt(std::max(0.0, m2 - m * m) / static_cast<double>(record.B));
}

BigRational sigma2_exact_rational(Kind kind, long n) {
  if (n < std::max(2, kernel_order(kind))) fail(ErrorCode::InvalidArgument, "n too small for this coefficient");
  switch (kind) {
    case Kind::Spearman:
    case Kind::Pearson: return BigRational(1, n - 1);
    case Kind::Kendall: {
      BigRational s(2 * (2 * n + 5), BigInt(9) * n * (n - 1));
      s.canonicalize();
      return s;
    }
    default: return moment_from_omega(kind, 2, n);
  }
}

double sigma2_exact(Kind kind, long n) { return to_double(sigma2_exact_rational(kind, n)); }

BigRational zeta_even_over_pi(int r) {
  if (r < 1) fail(ErrorCode::InvalidArgument, "zeta(2r) needs r >= 1");
  BigRational z = bernoulli(2 * r) * BigRational(power(BigRational(2), static_cast<unsigned long>(2 * r - 1))) /
                  BigRational(factorial(2 * r));
  if (r % 2 == 0) z = -z;
  z.canonicalize();
  return z;
}

JaMomentTable ja_moments(int a, int max_r) {
  if (a <= 0) fail(ErrorCode::InvalidArgument, "scale a must be positive");
  if (max_r < 1 || max_r > 24) fail(ErrorCode::InvalidArgument, "max_r must be in 1..24");
  JaMomentTable t;
  t.a = a;
  t.cumulants.assign(static_cast<std::size_t>(max_r) + 1, 0);
  for (int r = 2; r <= max_r; ++r) {
    const BigRational z = zeta_even_over_pi(r);
    BigRational k = BigRational(power(BigRational(2), static_cast<unsigned long>(r - 1)) * factorial(r - 1)) *
                    power(BigRational(a), static_cast<unsigned long>(r)) * z * z;
    k.canonicalize();
    t.cumulants[static_cast<std::size_t>(r)] = k;
  }
  t.moments = moments_from_cumulants(t.cumulants, max_r);
  return t;
}

std::pair<int, int> degenerate_scale(Kind kind) {
  switch (kind) {
    case Kind::HoeffdingD: return {10, 3};
    case Kind::BkrR: return {15, 6};
    case Kind::TauStar: return {6, 6};
    default: fail(ErrorCode::UnsupportedKind, std::string(kind_name(kind)) + " has no J_a limit");
  }
}

LeadingConstants leading_coefficients(Kind kind, int q) {
  if (q != 2 && q != 4 && q != 6) fail(ErrorCode::InvalidArgument, "q must be 2, 4 or 6");
  if (!is_degenerate(kind)) {
    // Gaussian moments: E Z^q and var Z^q in units of sigma^q, sigma^(2q).
    switch (q) {
      case 2: return {1.0, 2.0};
      case 4: return {3.0, 96.0};
      default: return {15.0, 10170.0};
    }
  }
  const auto [scale, a] = degenerate_scale(kind);
  const JaMomentTable t = ja_moments(a, 2 * q);
  const BigRational bq = power(BigRational(scale), static_cast<unsigned long>(q));
  return {to_double(bq * t.moments[static_cast<std::size_t>(q)]), to_double(bq * bq * t.variance_of_power(q))};
}

LeadingConstants leading_constants(Kind kind, int q, long n) {
  const LeadingConstants c = leading_coefficients(kind, q);
  if (is_degenerate(kind)) {
    const double nq = std::pow(static_cast<double>(n), q);
    return {c.mu / nq, c.v / (nq * nq)};
  }
  const double sigma2 = sigma2_exact(kind, n);
  const double sq = std::pow(sigma2, q / 2.0);
  return {c.mu * sq, c.v * sq * sq};
}

double spectral_kappa() {
  // log kappa = (1/2) sum_{m >= 1} (zeta(2m)^2 - 1) / m over the grid 1/(i^2 j^2)
  long double log_kappa = 0.0L;
  for (int m = 1; m <= 80; ++m) {
    const long double zeta = static_cast<long double>(to_double(zeta_even_over_pi(m))) *
                             std::pow(static_cast<long double>(std::numbers::pi), 2.0L * m);
    const long double term = (zeta * zeta - 1.0L) / m;
    log_kappa += term;
    if (term < 1e-19L) break;
  }
  return static_cast<double>(std::exp(0.5L * log_kappa));
}

double truncated_kappa(long limit) {
  if (limit < 2) fail(ErrorCode::InvalidArgument, "limit must be at least 2");
  std::vector<std::uint32_t> divisors(static_cast<std::size_t>(limit) + 1, 0);
  for (long i = 1; i <= limit; ++i) {
    for (long k = i; k <= limit; k += i) ++divisors[static_cast<std::size_t>(k)];
  }
  long double log_kappa = 0.0L;
  for (long k = limit; k >= 2; --k) {
    const long double x = 1.0L / (static_cast<long double>(k) * k);
    log_kappa -= divisors[static_cast<std::size_t>(k)] * std::log1p(-x);
  }
  const long double L = static_cast<long double>(limit);
  const long double tail = (std::log(L) + 1.0L + 2.0L * std::numbers::egamma_v<long double>) / L;
  return static_cast<double>(std::exp(0.5L * (log_kappa + tail)));
}

SpectralConstants spectral_constants(Kind kind) {
  const auto [scale, a] = degenerate_scale(kind);
  (void)scale;
  const double pi4 = std::pow(std::numbers::pi, 4);
  SpectralConstants s;
  s.m = kernel_order(kind);
  s.mu1 = 1;
  s.lambda1 = a / pi4;
  s.lambda_sum = s.lambda1 * pi4 / 36.0;
  s.kappa = spectral_kappa();
  s.tolerance = 1e-12;
  return s;
}

MuV mu_v(Kind kind, int q, long n, const CalibrationRecord* monte_carlo) {
  if (q != 2 && q != 4 && q != 6) fail(ErrorCode::InvalidArgument, "q must be 2, 4 or 6");
  auto exact = [](const BigRational& mu, const BigRational& v) {
    return MuV{to_double(mu), to_double(v), Provenance::Exact};
  };
  switch (kind) {
    case Kind::Spearman:
    case Kind::Kendall: {
      auto closed = kind == Kind::Spearman ? spearman_closed : kendall_closed;
      if (q == 2) {
        const BigRational s2 = sigma2_exact_rational(kind, n);
        return exact(s2, closed(4, MomentKind::Mean, n) - s2 * s2);
      }
      return exact(closed(q, MomentKind::Mean, n), closed(q, MomentKind::Variance, n));
    }
    case Kind::Pearson: {
      const LeadingConstants c = leading_constants(kind, q, n);
      return {c.mu, c.v, Provenance::LeadingOrder};
    }
    default: break;
  }
  if (kind == Kind::TauStar && q != 6) {
    const TaustarL4 l4 = taustar_l4_exact(n);
    if (q == 4) return exact(l4.mu, l4.v);
    const BigRational s2 = sigma2_exact_rational(kind, n);
    return exact(s2, l4.mu - s2 * s2);
  }
  if (monte_carlo == nullptr || monte_carlo->B == 0) {
    fail(ErrorCode::CalibrationUnavailable, std::string(kind_name(kind)) + " L" + std::to_string(q) +
                                                " constants need a Monte Carlo calibration at n = " + std::to_string(n));
  }
  if (monte_carlo->kind != kind || monte_carlo->n != n) {
    fail(ErrorCode::CalibrationMismatch, "Monte Carlo record is for " + std::string(kind_name(monte_carlo->kind)) +
                                             " at n = " + std::to_string(monte_carlo->n));
  }
  if (q == 2) {
    // Exact second moment, simulated fourth.
    const double s2 = sigma2_exact(kind, n);
    return {s2, moment_or_fail(*monte_carlo, 4) - s2 * s2, Provenance::MonteCarlo};
  }
  const double m = moment_or_fail(*monte_carlo, q);
  return {m, moment_or_fail(*monte_carlo, 2 * q) - m * m, Provenance::MonteCarlo};
}

CalibrationRecord build_calibration(Kind kind, long n, const CalibrationOptions& options) {
  CalibrationRecord rec;
  if (!is_degenerate(kind)) {
    rec.kind = kind;
    rec.n = n;
    rec.sigma2 = sigma2_exact(kind, n);
    rec.source = kind == Kind::Pearson ? Provenance::LeadingOrder : Provenance::Exact;
    for (int q : {2, 4, 6}) {
      const MuV mv = mu_v(kind, q, n);
      rec.powers[q] = {mv.mu, mv.v, mv.source};
    }
    rec.validate();
    return rec;
  }
  if (options.leading_order) {
    rec.kind = kind;
    rec.n = n;
    rec.source = Provenance::LeadingOrder;
    rec.sigma2 = sigma2_exact(kind, n);
    for (int q : {2, 4, 6}) {
      if (kind == Kind::TauStar && q != 6) {
        const MuV mv = mu_v(kind, q, n);
        rec.powers[q] = {mv.mu, mv.v, mv.source};
      } else {
        const LeadingConstants c = leading_constants(kind, q, n);
        rec.powers[q] = {c.mu, c.v, Provenance::LeadingOrder};
      }
    }
  } else {
    rec = mc_calibrate(kind, n, options.B, options.seed, options.threads);
    for (int q : {2, 4, 6}) {
      const MuV mv = mu_v(kind, q, n, &rec);
      rec.powers[q] = {mv.mu, mv.v, mv.source};
    }
  }
  rec.spectral = spectral_constants(kind);
  rec.validate();
  return rec;
}

std::string format_double(double x) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    fail(ErrorCode::SchemaMismatch, "not a decimal number: '" + text + "'");
  }
  if (used != text.size()) fail(ErrorCode::SchemaMismatch, "trailing characters in number '" + text + "'");
  return v;
}

std::string calibration_to_json(const CalibrationRecord& r) {
  nlohmann::ordered_json j;
  j["schema"] = kSchema;
  j["kind"] = std::string(kind_name(r.kind));
  j["n"] = r.n;
  j["source"] = std::string(provenance_name(r.source));
  j["B"] = r.B;
  j["seed"] = r.seed;
  j["sigma2"] = format_double(r.sigma2);
  j["moments"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.mc_moments) j["moments"][std::to_string(k)] = format_double(v);
  j["q"] = nlohmann::ordered_json::object();
  for (const auto& [q, e] : r.powers) {
    j["q"][std::to_string(q)] = {
        {"mu", format_double(e.mu)}, {"v", format_double(e.v)}, {"source", std::string(provenance_name(e.source))}};
  }
  if (r.spectral) {
    const auto& s = *r.spectral;
    j["spectral"] = {{"lambda1", format_double(s.lambda1)}, {"lambda_sum", format_double(s.lambda_sum)},
                     {"mu1", s.mu1},
                     {"kappa", format_double(s.kappa)},
                     {"m", s.m},
                     {"tolerance", format_double(s.tolerance)}};
  }
  return j.dump(2) + "\n";
}

CalibrationRecord calibration_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    fail(ErrorCode::CorruptFile, std::string("calibration is not valid JSON: ") + e.what());
  }
  CalibrationRecord r;
  try {
    if (j.value("schema", std::string()) != kSchema) fail(ErrorCode::SchemaMismatch, "unexpected schema tag");
    r.kind = parse_kind(j.at("kind").get<std::string>());
    r.n = j.at("n").get<long>();
    r.source = parse_provenance(j.at("source").get<std::string>());
    r.B = j.at("B").get<std::uint64_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.sigma2 = parse_double(j.at("sigma2").get<std::string>());
    for (const auto& [k, v] : j.at("moments").items()) r.mc_moments[std::stoi(k)] = parse_double(v.get<std::string>());
    for (const auto& [k, v] : j.at("q").items()) {
      r.powers[std::stoi(k)] = {parse_double(v.at("mu").get<std::string>()), parse_double(v.at("v").get<std::string>()),
                                parse_provenance(v.at("source").get<std::string>())};
    }
    if (j.contains("spectral")) {
      const auto& s = j.at("spectral");
      r.spectral = SpectralConstants{parse_double(s.at("lambda1").get<std::string>()),
                                     parse_double(s.at("lambda_sum").get<std::string>()), s.at("mu1").get<int>(),
                                     parse_double(s.at("kappa").get<std::string>()), s.at("m").get<int>(),
                                     parse_double(s.at("tolerance").get<std::string>())};
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorCode::SchemaMismatch, std::string("calibration fields: ") + e.what());
  }
  r.validate();
  return r;
}

void save_calibration(const std::string& path, const CalibrationRecord& record) {
  record.validate();
  std::ofstream out(path);
  if (!out) fail(ErrorCode::CorruptFile, "cannot write " + path);
  out << calibration_to_json(record);
  if (!out) fail(ErrorCode::CorruptFile, "write failed for " + path);
}

CalibrationRecord load_calibration(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::CorruptFile, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return calibration_from_json(buf.str());
}

std::string calibration_cache_name(Kind kind, long n, const CalibrationOptions& options) {
  std::ostringstream name;
  name << "cal_" << kind_name(kind) << "_n" << n;
  if (is_degenerate(kind)) {
    if (options.leading_order) name << "_leading";
    else name << "_B" << options.B << "_seed" << options.seed;
  }
  name << ".json";
  return name.str();
}

}  // namespace ranklq
