#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ranklq/calibration.hpp"
#include "ranklq/data.hpp"

namespace ranklq {

enum class MarginalLaw { StdNormal, ScaledT3, ScaledChiSq1 };

std::string_view law_name(MarginalLaw law);  // "normal", "t3", "chisq"
MarginalLaw parse_law(std::string_view text);

enum class DesignKind { LinearNormal, SineCubeRoot, SineCubic };

std::string_view design_name(DesignKind design);  // "linear", "sine_cuberoot", "sine_cubic"
DesignKind parse_design(std::string_view text);

struct AlternativeDesign {
  DesignKind kind = DesignKind::LinearNormal;
  std::size_t k = 2;
  std::size_t n = 100;
  std::size_t p = 200;
  double r_min = 0.0;
  double r_max = 0.0;
};

/// Correlation range for the active block as a function of (k, n, p).
std::pair<double, double> default_r_range(DesignKind design, std::size_t k, std::size_t n, std::size_t p);
AlternativeDesign make_design(DesignKind design, std::size_t k, std::size_t n, std::size_t p);

/// The coordinate transform applied to every latent Gaussian column.
double design_transform(DesignKind design, double z);

/// n x p i.i.d. draws; column j uses the stream keyed by (seed, j).
DataMatrix gen_null(std::size_t n, std::size_t p, MarginalLaw law, std::uint64_t seed);

/// Latent Gaussian with a uniformly drawn active block of k coordinates whose pairwise
/// correlations are i.i.d. U(r_min, r_max), resampled up to 100 times until the block is
/// positive definite (NotPositiveDefinite otherwise), then transformed coordinatewise.
DataMatrix gen_alternative(const AlternativeDesign& design, std::uint64_t seed);

/// Supplies the calibration used for (kind, n).
using CalibrationProvider = std::function<CalibrationRecord(Kind, long)>;

/// Builds records with build_calibration and memoizes them for the provider's lifetime.
CalibrationProvider memo_calibration_provider(const CalibrationOptions& options);

struct ExperimentConfig {
  std::vector<Kind> kinds = {Kind::Spearman};
  std::vector<MarginalLaw> laws = {MarginalLaw::StdNormal};
  std::vector<std::pair<std::size_t, std::size_t>> grid = {{100, 100}};
  std::size_t reps = 200;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  int threads = 1;
};

/// Column labels for norms reported by the harness.
const std::vector<std::string>& reported_norms();  // 2, 4, 6, inf, "2,inf", "2,4,6,inf"

struct RateRow {
  Kind kind = Kind::Spearman;
  std::string setting;  // law name or design name
  std::size_t n = 0;
  std::size_t p = 0;
  std::size_t k = 0;  // zero for null runs
  std::string norm;
  double reject_rate = 0.0;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
};

/// Null rejection frequencies per (kind, law, (n, p), norm). Replicate r of each cell uses the
/// dataset keyed by (seed, law, n, p, r), shared by all kinds.
std::vector<RateRow> size_table(const ExperimentConfig& config, const CalibrationProvider& calibration);

/// Rejection frequencies per (kind, k, norm) under the design at (n, p) = config.grid.front().
std::vector<RateRow> power_curve(const ExperimentConfig& config, DesignKind design, const std::vector<std::size_t>& ks,
                                 const CalibrationProvider& calibration);

std::string rows_to_csv(const std::vector<RateRow>& rows);
std::string rows_to_json(const std::vector<RateRow>& rows);

/// Looks up one row; throws InvalidArgument if absent.
const RateRow& find_row(const std::vector<RateRow>& rows, Kind kind, const std::string& setting, std::size_t k,
                        const std::string& norm);

}  // namespace ranklq
