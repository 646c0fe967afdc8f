#include "ranklq/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <json.hpp>

#include "ranklq/error.hpp"
#include "ranklq/parallel.hpp"
#include "ranklq/rng.hpp"
#include "ranklq/test_stats.hpp"

namespace ranklq {

namespace {

constexpr std::uint64_t kColumnTag = 0x636f6c756d6eULL;
constexpr std::uint64_t kActiveTag = 0x616374697665ULL;
constexpr std::uint64_t kCorrTag = 0x636f7272ULL;
constexpr std::uint64_t kNullTag = 0x6e756c6cULL;
constexpr std::uint64_t kPowerTag = 0x706f776572ULL;
constexpr int kMaxPdAttempts = 100;

std::string lower(std::string_view text) {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

double draw(MarginalLaw law, Engine& rng) {
  switch (law) {
    case MarginalLaw::StdNormal: return std::normal_distribution<double>()(rng);
    case MarginalLaw::ScaledT3: return std::student_t_distribution<double>(3.0)(rng) / std::sqrt(3.0);
    case MarginalLaw::ScaledChiSq1: return (std::chi_squared_distribution<double>(1.0)(rng) - 1.0) / std::numbers::sqrt2;
  }
  return 0.0;
}

// Rejection indicators for one dataset, laid out as [kind][norm].
std::vector<std::uint8_t> replicate_decisions(const DataMatrix& data, const std::vector<Kind>& kinds,
                                              const std::vector<CalibrationRecord>& calibs, double alpha) {
  const auto& norms = reported_norms();
  std::vector<std::uint8_t> out(kinds.size() * norms.size(), 0);
  TestOptions options;
  options.alpha = alpha;
  options.norms = {2, 4, 6, kMaxNorm};
  for (std::size_t a = 0; a < kinds.size(); ++a) {
    const PairStatSheet sheet = compute_sheet(data, kinds[a]);
    const TestReport report = run_test_on_sheet(sheet, calibs[a], options);
    for (std::size_t b = 0; b < norms.size(); ++b) {
      const std::string& label = norms[b];
      double p = 1.0;
      if (label == "2") p = report.p_value(2);
      else if (label == "4") p = report.p_value(4);
      else if (label == "6") p = report.p_value(6);
      else if (label == "inf") p = report.p_value(kMaxNorm);
      else p = report.combined.at(label);
      out[a * norms.size() + b] = p < alpha;
    }
  }
  return out;
}

template <class MakeData>
void run_cell(const ExperimentConfig& config, std::size_t n, std::size_t p, const std::string& setting, std::size_t k,
              const CalibrationProvider& calibration, MakeData&& make_data, std::vector<RateRow>& rows) {
  std::vector<CalibrationRecord> calibs;
  for (Kind kind : config.kinds) calibs.push_back(calibration(kind, static_cast<long>(n)));
  const auto& norms = reported_norms();
  const std::size_t width = config.kinds.size() * norms.size();
  std::vector<std::uint8_t> decisions(config.reps * width);
  parallel_for(config.reps, config.threads, [&](std::size_t r) {
    const DataMatrix data = make_data(r);
    const auto d = replicate_decisions(data, config.kinds, calibs, config.alpha);
    std::copy(d.begin(), d.end(), decisions.begin() + static_cast<std::ptrdiff_t>(r * width));
  });
  for (std::size_t a = 0; a < config.kinds.size(); ++a) {
    for (std::size_t b = 0; b < norms.size(); ++b) {
      std::size_t hits = 0;
      for (std::size_t r = 0; r < config.reps; ++r) hits += decisions[r * width + a * norms.size() + b];
      rows.push_back({config.kinds[a], setting, n, p, k, norms[b],
                      static_cast<double>(hits) / static_cast<double>(config.reps), config.reps, config.seed});
    }
  }
}

void check_config(const ExperimentConfig& config) {
  if (config.reps == 0) fail(ErrorCode::InvalidArgument, "replication count must be positive");
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) fail(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
  if (config.kinds.empty()) fail(ErrorCode::InvalidArgument, "no coefficients requested");
  if (config.grid.empty()) fail(ErrorCode::InvalidArgument, "empty (n, p) grid");
}

}  // namespace

std::string_view law_name(MarginalLaw law) {
  switch (law) {
    case MarginalLaw::StdNormal: return "normal";
    case MarginalLaw::ScaledT3: return "t3";
    case MarginalLaw::ScaledChiSq1: return "chisq";
  }
  return "normal";
}

MarginalLaw parse_law(std::string_view text) {
  const std::string s = lower(text);
  if (s == "normal" || s == "gaussian" || s == "n") return MarginalLaw::StdNormal;
  if (s == "t3" || s == "t") return MarginalLaw::ScaledT3;
  if (s == "chisq" || s == "chisq1" || s == "chi2") return MarginalLaw::ScaledChiSq1;
  fail(ErrorCode::InvalidArgument, "unknown marginal law '" + std::string(text) + "' (normal, t3, chisq)");
}

std::string_view design_name(DesignKind design) {
  switch (design) {
    case DesignKind::LinearNormal: return "linear";
    case DesignKind::SineCubeRoot: return "sine_cuberoot";
    case DesignKind::SineCubic: return "sine_cubic";
  }
  return "linear";
}

DesignKind parse_design(std::string_view text) {
  const std::string s = lower(text);
  if (s == "linear" || s == "linear_normal") return DesignKind::LinearNormal;
  if (s == "sine_cuberoot" || s == "cuberoot") return DesignKind::SineCubeRoot;
  if (s == "sine_cubic" || s == "cubic") return DesignKind::SineCubic;
  fail(ErrorCode::InvalidArgument, "unknown design '" + std::string(text) + "' (linear, sine_cuberoot, sine_cubic)");
}

std::pair<double, double> default_r_range(DesignKind design, std::size_t k, std::size_t n, std::size_t p) {
  if (k < 2 || n == 0 || p < 2) fail(ErrorCode::InvalidArgument, "need k >= 2, n >= 1, p >= 2");
  const double lp = std::log(static_cast<double>(p));
  const double nn = static_cast<double>(n);
  const double kk = static_cast<double>(k);
  switch (design) {
    case DesignKind::LinearNormal: return {std::sqrt(12.0 * lp / (kk * nn)), std::sqrt(14.0 * lp / (kk * nn))};
    case DesignKind::SineCubeRoot: {
      const double d = nn * std::log((kk + 2.0) / 2.0);
      return {std::sqrt(9.0 * lp / d), std::sqrt(10.0 * lp / d)};
    }
    case DesignKind::SineCubic: {
      const double s = 1.0 / std::sqrt(kk);
      return {std::sqrt(19.0 * s * lp / nn), std::sqrt(20.0 * s * lp / nn)};
    }
  }
  return {0.0, 0.0};
}

AlternativeDesign make_design(DesignKind design, std::size_t k, std::size_t n, std::size_t p) {
  if (k > p) fail(ErrorCode::InvalidArgument, "active set larger than p");
  const auto [lo, hi] = default_r_range(design, k, n, p);
  return {design, k, n, p, lo, hi};
}

double design_transform(DesignKind design, double z) {
  switch (design) {
    case DesignKind::LinearNormal: return z;
    case DesignKind::SineCubeRoot: {
      const double s = z > 0 ? 1.0 : (z < 0 ? -1.0 : 0.0);
      return std::sin(2.0 * std::numbers::pi * s * std::cbrt(std::abs(z)) / 3.0);
    }
    case DesignKind::SineCubic: return std::sin(std::numbers::pi * z * z * z / 4.0);
  }
  return z;
}

DataMatrix gen_null(std::size_t n, std::size_t p, MarginalLaw law, std::uint64_t seed) {
  if (n == 0 || p == 0) fail(ErrorCode::InvalidArgument, "empty dimensions");
  std::vector<double> values(n * p);
  for (std::size_t j = 0; j < p; ++j) {
    Engine rng = make_stream(seed, kColumnTag, j);
    for (std::size_t i = 0; i < n; ++i) values[j * n + i] = draw(law, rng);
  }
  return DataMatrix(n, p, std::move(values));
}

DataMatrix gen_alternative(const AlternativeDesign& d, std::uint64_t seed) {
  if (d.k > d.p) fail(ErrorCode::InvalidArgument, "active set larger than p");
  if (!(d.r_min >= -1.0 && d.r_max <= 1.0 && d.r_min <= d.r_max)) {
    fail(ErrorCode::InvalidArgument, "correlation range must satisfy -1 <= r_min <= r_max <= 1");
  }
  const std::size_t n = d.n, p = d.p, k = d.k;
  DataMatrix latent = gen_null(n, p, MarginalLaw::StdNormal, seed);
  std::vector<double> values = latent.values();

  if (k >= 2) {
    std::vector<std::size_t> coords(p);
    std::iota(coords.begin(), coords.end(), 0);
    Engine pick = make_stream(seed, kActiveTag);
    std::shuffle(coords.begin(), coords.end(), pick);
    std::vector<std::size_t> active(coords.begin(), coords.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(active.begin(), active.end());

    Eigen::MatrixXd corr;
    Eigen::LLT<Eigen::MatrixXd> llt;
    bool ok = false;
    for (int attempt = 0; attempt < kMaxPdAttempts && !ok; ++attempt) {
      Engine rng = make_stream(seed, kCorrTag, static_cast<std::uint64_t>(attempt));
      std::uniform_real_distribution<double> u(d.r_min, d.r_max);
      corr = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
      for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) {
          const double r = d.r_min == d.r_max ? d.r_min : u(rng);
          corr(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = r;
          corr(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = r;
        }
      }
      llt.compute(corr);
      ok = llt.info() == Eigen::Success;
      if (ok) {
        const Eigen::MatrixXd L = llt.matrixL();
        ok = (L.diagonal().array() > 1e-12).all();
      }
    }
    if (!ok) {
      fail(ErrorCode::NotPositiveDefinite,
           "active correlation block not positive definite after " + std::to_string(kMaxPdAttempts) + " draws");
    }
    const Eigen::MatrixXd L = llt.matrixL();
    Eigen::MatrixXd block(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t i = 0; i < n; ++i) block(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a)) = values[active[a] * n + i];
    }
    const Eigen::MatrixXd mixed = block * L.transpose();
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t i = 0; i < n; ++i) values[active[a] * n + i] = mixed(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a));
    }
  }
  for (double& v : values) v = design_transform(d.kind, v);
  return DataMatrix(n, p, std::move(values));
}

CalibrationProvider memo_calibration_provider(const CalibrationOptions& options) {
  auto cache = std::make_shared<std::map<std::pair<int, long>, CalibrationRecord>>();
  auto mutex = std::make_shared<std::mutex>();
  return [options, cache, mutex](Kind kind, long n) {
    std::lock_guard<std::mutex> lock(*mutex);
    const auto key = std::make_pair(static_cast<int>(kind), n);
    auto it = cache->find(key);
    if (it == cache->end()) it = cache->emplace(key, build_calibration(kind, n, options)).first;
    return it->second;
  };
}

const std::vector<std::string>& reported_norms() {
  static const std::vector<std::string> norms = {"2", "4", "6", "inf", "2,inf", "2,4,6,inf"};
  return norms;
}

std::vector<RateRow> size_table(const ExperimentConfig& config, const CalibrationProvider& calibration) {
  check_config(config);
  std::vector<RateRow> rows;
  for (auto [n, p] : config.grid) {
    for (MarginalLaw law : config.laws) {
      run_cell(config, n, p, std::string(law_name(law)), 0, calibration,
               [&](std::size_t r) {
                 return gen_null(n, p, law, derive_seed(config.seed, kNullTag + static_cast<std::uint64_t>(law),
                                                        n * 100003 + p, r));
               },
               rows);
    }
  }
  return rows;
}

std::vector<RateRow> power_curve(const ExperimentConfig& config, DesignKind design, const std::vector<std::size_t>& ks,
                                 const CalibrationProvider& calibration) {
  check_config(config);
  const auto [n, p] = config.grid.front();
  std::vector<RateRow> rows;
  for (std::size_t k : ks) {
    const AlternativeDesign d = make_design(design, k, n, p);
    run_cell(config, n, p, std::string(design_name(design)), k, calibration,
             [&](std::size_t r) {
               return gen_alternative(d, derive_seed(config.seed, kPowerTag + static_cast<std::uint64_t>(design),
                                                     k * 1000003 + n * 1009 + p, r));
             },
             rows);
  }
  return rows;
}

std::string rows_to_csv(const std::vector<RateRow>& rows) {
  std::ostringstream out;
  out << "kind,setting,n,p,k,norm,reject_rate,reps,seed\n";
  for (const auto& r : rows) {
    out << kind_name(r.kind) << ',' << r.setting << ',' << r.n << ',' << r.p << ',' << r.k << ",\"" << r.norm << "\","
        << format_double(r.reject_rate) << ',' << r.reps << ',' << r.seed << '\n';
  }
  return out.str();
}

std::string rows_to_json(const std::vector<RateRow>& rows) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    j.push_back({{"kind", std::string(kind_name(r.kind))},
                 {"setting", r.setting},
                 {"n", r.n},
                 {"p", r.p},
                 {"k", r.k},
                 {"norm", r.norm},
                 {"reject_rate", r.reject_rate},
                 {"reps", r.reps},
                 {"seed", r.seed}});
  }
  return j.dump(2) + "\n";
}

const RateRow& find_row(const std::vector<RateRow>& rows, Kind kind, const std::string& setting, std::size_t k,
                        const std::string& norm) {
  for (const auto& r : rows) {
    if (r.kind == kind && r.setting == setting && r.k == k && r.norm == norm) return r;
  }
  fail(ErrorCode::InvalidArgument, "no row for " + std::string(kind_name(kind)) + "/" + setting + "/" + norm);
}

}  // namespace ranklq
