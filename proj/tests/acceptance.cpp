// Acceptance driver: `ranklq_acceptance --criterion N` prints one PASS/FAIL line per criterion
// and exits nonzero on failure. Without arguments every criterion runs.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ranklq/calibration.hpp"
#include "ranklq/exact_moments.hpp"
#include "ranklq/pattern_enum.hpp"
#include "ranklq/rng.hpp"
#include "ranklq/simulation.hpp"

namespace {

using namespace ranklq;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects mismatches; the first few are kept for the report line.
class Checker {
 public:
  void check(bool ok, const std::string& what) {
    ++checks_;
    if (ok) return;
    ++failures_;
    if (failures_ <= 3) failed_ << (failures_ > 1 ? "; " : "") << what;
  }
  Outcome outcome(const std::string& summary) const {
    std::ostringstream s;
    s << summary << ", " << checks_ - failures_ << "/" << checks_ << " checks";
    if (failures_ > 0) s << " (first failures: " << failed_.str() << ")";
    return {failures_ == 0, s.str()};
  }

 private:
  long checks_ = 0, failures_ = 0;
  std::ostringstream failed_;
};

std::string label(Kind k, int r, long n) {
  return std::string(kind_name(k)) + " r=" + std::to_string(r) + " n=" + std::to_string(n);
}

Outcome criterion1() {
  Checker c;
  for (Kind k : kRankKinds) {
    for (int n = std::max(2, kernel_order(k)); n <= 8; ++n) {
      const auto brute = bruteforce_moments(k, {1, 2, 3, 4}, n);
      for (int r = 1; r <= 4; ++r) {
        BigRational formula;
        if (k == Kind::Spearman)
          formula = spearman_moment_partition(r, n);
        else if (k == Kind::Kendall)
          formula = kendall_moment(r, n);
        else
          formula = moment_from_omega(k, r, n);
        c.check(formula == brute[r - 1], label(k, r, n));
      }
    }
  }
  return c.outcome("formula pipeline vs S_n enumeration, r=1..4, n=m_T..8");
}

// True when x agrees with the printed value to within half a unit in its 9th significant digit.
bool agrees9(double x, double printed) {
  const double e = std::floor(std::log10(std::fabs(printed)));
  return std::fabs(x - printed) <= 0.5 * std::pow(10.0, e - 8);
}

Outcome criterion2() {
  Checker c;
  for (long n = 3; n <= 60; ++n) {
    for (int q : {4, 6}) {
      const BigRational rm = spearman_moment_partition(q, n), rm2 = spearman_moment_partition(2 * q, n);
      c.check(spearman_closed(q, MomentKind::Mean, n) == rm, "rho mean q=" + std::to_string(q) + " n=" + std::to_string(n));
      c.check(spearman_closed(q, MomentKind::Variance, n) == rm2 - rm * rm,
              "rho var q=" + std::to_string(q) + " n=" + std::to_string(n));
      const BigRational tm = kendall_moment(q, n), tm2 = kendall_moment(2 * q, n);
      c.check(kendall_closed(q, MomentKind::Mean, n) == tm, "tau mean q=" + std::to_string(q) + " n=" + std::to_string(n));
      c.check(kendall_closed(q, MomentKind::Variance, n) == tm2 - tm * tm,
              "tau var q=" + std::to_string(q) + " n=" + std::to_string(n));
    }
  }

  // Second-order Omega constants reachable by enumeration within the unflagged budget.
  struct Range {
    Kind kind;
    int lo, hi;
  };
  OmegaOptions enumerate;
  enumerate.route = OmegaRoute::UnionMask;
  for (const Range& rg : {Range{Kind::HoeffdingD, 5, 8}, Range{Kind::BkrR, 6, 8}, Range{Kind::TauStar, 4, 8}}) {
    for (int b = rg.lo; b <= rg.hi; ++b) {
      const auto printed = omega_embedded(rg.kind, 2, b);
      c.check(printed.has_value() && omega(rg.kind, 2, b, enumerate) == *printed,
              "Omega " + std::string(kind_name(rg.kind)) + " b=" + std::to_string(b));
    }
  }
  c.check(omega(Kind::HoeffdingD, 2, 6, enumerate) == BigRational(41, 45), "Omega_D,2,6 = 41/45");
  c.check(omega(Kind::TauStar, 2, 4, enumerate) == BigRational(2, 9), "Omega_tau*,2,4 = 2/9");
  c.check(omega(Kind::BkrR, 2, 7, enumerate) == BigRational(287, 60), "Omega_R,2,7 = 287/60");

  const auto j3 = ja_moments(3, 8);
  c.check(j3.moments[4] == BigRational(193, 3307500), "M4(3)");
  BigRational var4(std::string("37007208536234/36365716622000390625"));
  var4.canonicalize();
  c.check(j3.variance_of_power(4) == var4, "var(J3^4)");

  struct Printed {
    Kind kind;
    int q;
    double mu, v;
  };
  const Printed table[] = {
      {Kind::HoeffdingD, 4, 0.583522298, 101.7640019},
      {Kind::HoeffdingD, 6, 5.479391670, 1.444311135e5},
      {Kind::BkrR, 4, 47.26530612, 6.676736161e5},
      {Kind::BkrR, 6, 3994.476528, 7.675661537e10},
      {Kind::TauStar, 4, 1.209991837, 437.5665811},
      {Kind::TauStar, 6, 16.36137586, 1.287762316e6},
  };
  for (const auto& e : table) {
    const auto got = leading_coefficients(e.kind, e.q);
    const std::string tag = std::string(kind_name(e.kind)) + " q=" + std::to_string(e.q);
    c.check(agrees9(got.mu, e.mu), "leading mu " + tag);
    c.check(agrees9(got.v, e.v), "leading v " + tag);
  }
  return c.outcome("closed forms n=3..60, Omega constants, J_3 moments, 12 leading constants");
}

Outcome criterion3() {
  Checker c;
  const auto exact = taustar_l4_exact(8);
  const auto brute = bruteforce_moments(Kind::TauStar, {4, 8}, 8);
  c.check(exact.mu == brute[0], "E tau*^4");
  c.check(exact.v == brute[1] - brute[0] * brute[0], "var tau*^4");
  return c.outcome("taustar_l4_exact(8) vs 40320 permutations");
}

Outcome criterion4() {
  ExperimentConfig config;
  config.kinds = {kAllKinds.begin(), kAllKinds.end()};
  config.laws = {MarginalLaw::StdNormal, MarginalLaw::ScaledT3, MarginalLaw::ScaledChiSq1};
  config.grid = {{100, 50}};
  config.reps = 1000;
  config.seed = kDefaultSeed;
  CalibrationOptions options;
  options.B = 100000;
  options.seed = kDefaultSeed;
  const auto rows = size_table(config, memo_calibration_provider(options));

  Checker c;
  double lo = 1.0, hi = 0.0;
  for (Kind k : kRankKinds) {
    for (MarginalLaw law : config.laws) {
      for (const char* norm : {"2", "4", "6", "2,4,6,inf"}) {
        const double rate = find_row(rows, k, std::string(law_name(law)), 0, norm).reject_rate;
        lo = std::min(lo, rate);
        hi = std::max(hi, rate);
        std::ostringstream what;
        what << kind_name(k) << " " << law_name(law) << " L" << norm << " = " << 100 * rate << "%";
        c.check(rate >= 0.025 && rate <= 0.085, what.str());
      }
    }
  }
  const double inflation = find_row(rows, Kind::Pearson, "t3", 0, "4").reject_rate;
  std::ostringstream what;
  what << "Pearson t3 L4 = " << 100 * inflation << "%";
  c.check(inflation > 0.5, what.str());
  std::ostringstream summary;
  summary << "rank-kind sizes in [" << 100 * lo << "%, " << 100 * hi << "%], Pearson t3 L4 " << 100 * inflation << "%";
  return c.outcome(summary.str());
}

Outcome criterion5() {
  ExperimentConfig config;
  config.kinds = {Kind::HoeffdingD};
  config.grid = {{100, 100}};
  config.reps = 300;
  config.seed = kDefaultSeed;
  CalibrationOptions options;
  options.B = 100000;
  options.seed = kDefaultSeed;
  const auto rows = power_curve(config, DesignKind::LinearNormal, {2, 12}, memo_calibration_provider(options));
  const std::string setting(design_name(DesignKind::LinearNormal));
  auto power = [&](std::size_t k, const char* norm) { return find_row(rows, Kind::HoeffdingD, setting, k, norm).reject_rate; };

  Checker c;
  c.check(power(2, "inf") > power(12, "inf") + 0.15, "max-type power falls with k");
  c.check(power(12, "2") > power(2, "2") + 0.15, "L2 power rises with k");
  for (std::size_t k : {2, 12}) {
    const double best = std::max(power(k, "2"), power(k, "inf"));
    c.check(std::fabs(power(k, "2,4,6,inf") - best) <= 0.12, "combined near best at k=" + std::to_string(k));
  }
  std::ostringstream summary;
  summary << "D power k=2: L2 " << power(2, "2") << " Linf " << power(2, "inf") << " comb " << power(2, "2,4,6,inf")
          << "; k=12: L2 " << power(12, "2") << " Linf " << power(12, "inf") << " comb " << power(12, "2,4,6,inf");
  return c.outcome(summary.str());
}

Outcome criterion6() {
  const int status = std::system(RANKLQ_PROPERTIES_PATH " --gtest_brief=1");
  Checker c;
  c.check(status == 0, "property binary exit status " + std::to_string(status));
  return c.outcome("standalone property suites");
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria = {criterion1, criterion2, criterion3,
                                                          criterion4, criterion5, criterion6};
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      selected.push_back(std::atoi(argv[++i]));
    } else {
      std::cerr << "usage: ranklq_acceptance [--criterion N]...\n";
      return 1;
    }
  }
  if (selected.empty())
    for (int i = 1; i <= static_cast<int>(criteria.size()); ++i) selected.push_back(i);

  bool all = true;
  for (int id : selected) {
    if (id < 1 || id > static_cast<int>(criteria.size())) {
      std::cerr << "unknown criterion " << id << "\n";
      return 1;
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[id - 1]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << " " << o.detail << " [" << secs << " s]"
              << std::endl;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
