#include "ranklq/coefficient.hpp"

#include <algorithm>
#include <cctype>

#include "ranklq/error.hpp"

namespace ranklq {

KindClass kind_class(Kind kind) {
  switch (kind) {
    case Kind::Spearman: return KindClass::SimpleLinear;
    case Kind::Kendall: return KindClass::NonDegenerate;
    case Kind::HoeffdingD:
    case Kind::BkrR:
    case Kind::TauStar: return KindClass::Degenerate;
    case Kind::Pearson: return KindClass::Benchmark;
  }
  fail(ErrorCode::Internal, "unknown kind");
}

int kernel_order(Kind kind) {
  switch (kind) {
    case Kind::Spearman:
    case Kind::Kendall:
    case Kind::Pearson: return 2;
    case Kind::HoeffdingD: return 5;
    case Kind::BkrR: return 6;
    case Kind::TauStar: return 4;
  }
  fail(ErrorCode::Internal, "unknown kind");
}

bool is_degenerate(Kind kind) { return kind_class(kind) == KindClass::Degenerate; }
bool is_rank_based(Kind kind) { return kind != Kind::Pearson; }

std::string_view kind_name(Kind kind) {
  switch (kind) {
    case Kind::Spearman: return "rho";
    case Kind::Kendall: return "tau";
    case Kind::HoeffdingD: return "D";
    case Kind::BkrR: return "R";
    case Kind::TauStar: return "taustar";
    case Kind::Pearson: return "pearson";
  }
  return "?";
}

Kind parse_kind(std::string_view text) {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "rho" || s == "spearman") return Kind::Spearman;
  if (s == "tau" || s == "kendall") return Kind::Kendall;
  if (s == "d" || s == "hoeffding" || s == "hoeffdingd") return Kind::HoeffdingD;
  if (s == "r" || s == "bkr" || s == "bkr_r") return Kind::BkrR;
  if (s == "taustar" || s == "tau*" || s == "bdy" || s == "bdy_taustar" || s == "tstar") return Kind::TauStar;
  if (s == "pearson" || s == "r_pearson") return Kind::Pearson;
  fail(ErrorCode::InvalidArgument, "unknown coefficient '" + std::string(text) + "'");
}

}  // namespace ranklq
