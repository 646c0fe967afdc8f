#pragma once

#include <array>
#include <string>
#include <string_view>

namespace ranklq {

/// The pairwise dependence coefficients supported by the library.
enum class Kind { Spearman, Kendall, HoeffdingD, BkrR, TauStar, Pearson };

/// Null-theory class of a coefficient; decides centering and the maximum-statistic family.
enum class KindClass { SimpleLinear, NonDegenerate, Degenerate, Benchmark };

inline constexpr std::array<Kind, 6> kAllKinds = {Kind::Spearman, Kind::Kendall, Kind::HoeffdingD,
                                                  Kind::BkrR,     Kind::TauStar, Kind::Pearson};
inline constexpr std::array<Kind, 5> kRankKinds = {Kind::Spearman, Kind::Kendall, Kind::HoeffdingD, Kind::BkrR,
                                                   Kind::TauStar};
inline constexpr std::array<Kind, 3> kDegenerateKinds = {Kind::HoeffdingD, Kind::BkrR, Kind::TauStar};

KindClass kind_class(Kind kind);

/// Kernel order m_T; Spearman and Pearson report the effective order 2.
int kernel_order(Kind kind);

bool is_degenerate(Kind kind);
bool is_rank_based(Kind kind);

/// Canonical short name used in files and on the command line ("rho", "tau", "D", "R", "taustar", "pearson").
std::string_view kind_name(Kind kind);

/// Accepts canonical names plus common aliases (spearman, kendall, hoeffding, bkr, bdy, ...). Case-insensitive.
Kind parse_kind(std::string_view text);

}  // namespace ranklq
