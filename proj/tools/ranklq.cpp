// Command-line front end: test, calibrate, moments, constants, simulate.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ranklq/calibration.hpp"
#include "ranklq/csv.hpp"
#include "ranklq/error.hpp"
#include "ranklq/exact_moments.hpp"
#include "ranklq/pattern_enum.hpp"
#include "ranklq/rng.hpp"
#include "ranklq/simulation.hpp"
#include "ranklq/test_stats.hpp"

namespace fs = std::filesystem;
using namespace ranklq;
using Json = nlohmann::ordered_json;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kDataError = 2, kInternal = 3 };

std::vector<std::string> split(const std::string& text, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<Kind> parse_kinds(const std::string& text) {
  std::vector<Kind> out;
  for (const auto& item : split(text)) out.push_back(parse_kind(item));
  if (out.empty()) fail(ErrorCode::InvalidArgument, "no coefficient given");
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> parse_grid(const std::string& text) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& item : split(text)) {
    const auto x = item.find_first_of("xX");
    if (x == std::string::npos) fail(ErrorCode::InvalidArgument, "grid entries look like 100x200, got '" + item + "'");
    out.emplace_back(std::stoul(item.substr(0, x)), std::stoul(item.substr(x + 1)));
  }
  return out;
}

// "2,4,8" or "2-16"
std::vector<std::size_t> parse_ks(const std::string& text) {
  std::vector<std::size_t> out;
  for (const auto& item : split(text)) {
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      out.push_back(std::stoul(item));
    } else {
      const std::size_t lo = std::stoul(item.substr(0, dash)), hi = std::stoul(item.substr(dash + 1));
      for (std::size_t k = lo; k <= hi; ++k) out.push_back(k);
    }
  }
  return out;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) fail(ErrorCode::CorruptFile, "cannot write " + out_path);
  out << text;
}

std::string decimal(const BigRational& q) { return to_decimal(q, 20); }

std::string module_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::TiesPresent:
    case ErrorCode::TooLargeForReference:
    case ErrorCode::BadPermutation:
    case ErrorCode::DegenerateColumn: return "kernels";
    case ErrorCode::TooLarge: return "moments";
    case ErrorCode::Infeasible:
    case ErrorCode::MissingOmega: return "patterns";
    case ErrorCode::CalibrationUnavailable:
    case ErrorCode::InfeasibleB:
    case ErrorCode::SchemaMismatch:
    case ErrorCode::CorruptFile: return "calibration";
    case ErrorCode::CalibrationMismatch:
    case ErrorCode::DimensionTooSmall:
    case ErrorCode::MissingSpectral:
    case ErrorCode::BadWeights: return "teststats";
    case ErrorCode::NotPositiveDefinite: return "simulation";
    case ErrorCode::RaggedRows:
    case ErrorCode::NonNumericCell:
    case ErrorCode::EmptyFile: return "input";
    default: return "core";
  }
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::UnsupportedKind: return kUsage;
    case ErrorCode::Internal: return kInternal;
    default: return kDataError;
  }
}

// Calibration lookup shared by `test` and `simulate`: explicit file, then cache, then build.
struct CalibrationSource {
  std::string file;
  std::string cache_dir;
  CalibrationOptions options;
  bool auto_calibrate = true;

  CalibrationRecord get(Kind kind, long n) const {
    if (!file.empty()) {
      CalibrationRecord rec = load_calibration(file);
      if (rec.kind != kind || rec.n != n) {
        fail(ErrorCode::CalibrationMismatch, "calibration file is for " + std::string(kind_name(rec.kind)) +
                                                 " at n = " + std::to_string(rec.n));
      }
      return rec;
    }
    if (!is_degenerate(kind)) return build_calibration(kind, n, options);
    fs::path cached;
    if (!cache_dir.empty()) {
      cached = fs::path(cache_dir) / calibration_cache_name(kind, n, options);
      if (fs::exists(cached)) return load_calibration(cached.string());
    }
    if (!auto_calibrate && !options.leading_order) {
      fail(ErrorCode::CalibrationUnavailable, std::string(kind_name(kind)) + " at n = " + std::to_string(n) +
                                                  " has no calibration file and auto-calibration is disabled");
    }
    CalibrationRecord rec = build_calibration(kind, n, options);
    if (!cached.empty()) {
      fs::create_directories(cached.parent_path());
      save_calibration(cached.string(), rec);
    }
    return rec;
  }
};

std::string cache_dir_from_env() {
  const char* dir = std::getenv("RANKLQ_CACHE_DIR");
  return dir ? std::string(dir) : std::string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rank-based finite-L_q tests of mutual independence"};
  app.require_subcommand(1);
  // Subcommands inherit this, so global options such as --threads may follow the subcommand.
  app.fallthrough();
  int threads = 1;
  app.add_option("--threads", threads, "Worker threads (0 = all cores); results do not depend on it")
      ->capture_default_str();

  // test
  auto* test = app.add_subcommand("test", "Run the independence test on a CSV data file");
  std::string in_path, kind_text, norms_text = "2,4,6,inf", weights_text, calib_path, out_path, ties_text = "reject";
  double alpha = 0.05;
  std::uint64_t seed = kDefaultSeed, tie_seed = kDefaultSeed, B = kDefaultMonteCarloB;
  bool no_auto = false, leading = false;
  test->add_option("--in", in_path, "Input CSV (rows = observations)")->required();
  test->add_option("--kind", kind_text, "Coefficient: rho, tau, D, R, taustar, pearson")->required();
  test->add_option("--norms", norms_text, "Norm set, e.g. 2,4,6,inf")->capture_default_str();
  test->add_option("--weights", weights_text, "Cauchy weights for the norm set (default equal)");
  test->add_option("--alpha", alpha, "Level used for the reported decision")->capture_default_str();
  test->add_option("--calibration", calib_path, "Calibration JSON to use instead of building one");
  test->add_flag("--no-auto-calibrate", no_auto, "Fail instead of simulating a missing calibration");
  test->add_flag("--leading-order", leading, "Use leading-order constants for D and R instead of simulation");
  test->add_option("--B", B, "Monte Carlo replicates for automatic calibration")->capture_default_str();
  test->add_option("--seed", seed, "Seed for automatic calibration")->capture_default_str();
  test->add_option("--ties", ties_text, "Tie policy: reject or random")->capture_default_str();
  test->add_option("--tie-seed", tie_seed, "Seed for random tie breaking")->capture_default_str();
  test->add_option("--out", out_path, "Report path (default stdout)");

  // calibrate
  auto* calibrate = app.add_subcommand("calibrate", "Build and save a calibration record");
  long cal_n = 0;
  calibrate->add_option("--kind", kind_text, "Coefficient")->required();
  calibrate->add_option("--n", cal_n, "Sample size")->required();
  calibrate->add_option("--B", B, "Monte Carlo replicates")->capture_default_str();
  calibrate->add_option("--seed", seed, "Master seed")->capture_default_str();
  calibrate->add_flag("--leading-order", leading, "Leading-order constants instead of simulation");
  calibrate->add_option("--out", out_path, "Output JSON (default stdout)");

  // moments
  auto* moments = app.add_subcommand("moments", "Exact null moments of a single pair statistic");
  int order = 0, q = 0;
  long mom_n = 0;
  bool brute = false;
  moments->add_option("--kind", kind_text, "Coefficient")->required();
  moments->add_option("--n", mom_n, "Sample size")->required();
  auto* r_opt = moments->add_option("--r", order, "Moment order E T^r");
  auto* q_opt = moments->add_option("--q", q, "Report centering and variance of T^q (2, 4 or 6)");
  moments->add_flag("--bruteforce", brute, "Average over all n! permutations (n <= 9)");
  moments->add_option("--B", B, "Monte Carlo replicates when --q needs simulation")->capture_default_str();
  moments->add_option("--seed", seed, "Seed for that simulation")->capture_default_str();
  r_opt->excludes(q_opt);

  // constants
  auto* constants = app.add_subcommand("constants", "Printed and derived constants");
  constants->require_subcommand(1);
  auto* c_omega = constants->add_subcommand("omega", "Omega_{T,r,b} coefficient");
  int om_r = 2, om_b = 0;
  std::string route_text = "auto";
  bool allow_long = false;
  c_omega->add_option("--kind", kind_text, "D, R or taustar")->required();
  c_omega->add_option("--r", om_r, "Moment order")->capture_default_str();
  c_omega->add_option("--b", om_b, "Union size")->required();
  c_omega->add_option("--route", route_text, "auto, covers, unionmask or embedded")->capture_default_str();
  c_omega->add_flag("--allow-long", allow_long, "Permit enumerations over S_b with b >= 9");
  auto* c_tau = constants->add_subcommand("taustar-l4", "Exact tau* L4 centering and variance");
  long tau_n = 0;
  c_tau->add_option("--n", tau_n, "Sample size")->required();
  auto* c_ja = constants->add_subcommand("ja", "Cumulants and moments of J_a");
  int ja_a = 3, ja_r = 12;
  c_ja->add_option("--a", ja_a, "Scale (3 or 6)")->capture_default_str();
  c_ja->add_option("--r", ja_r, "Highest order")->capture_default_str();
  auto* c_lead = constants->add_subcommand("leading", "Leading-order constants of T^q");
  int lead_q = 4;
  long lead_n = 0;
  c_lead->add_option("--kind", kind_text, "Coefficient")->required();
  c_lead->add_option("--q", lead_q, "Power (2, 4 or 6)")->capture_default_str();
  c_lead->add_option("--n", lead_n, "Sample size (omit for n-free coefficients)");
  auto* c_spec = constants->add_subcommand("spectral", "Spectral constants of the degenerate maximum");
  c_spec->add_option("--kind", kind_text, "D, R or taustar")->required();

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Size tables and power curves");
  simulate->require_subcommand(1);
  std::string kinds_text = "rho", laws_text = "normal", grid_text = "100x100", format = "csv", design_text = "linear",
              ks_text = "2-16";
  std::size_t reps = 200;
  std::uint64_t cal_seed = kDefaultSeed;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--kinds", kinds_text, "Coefficients, comma separated")->capture_default_str();
    sub->add_option("--np", grid_text, "(n, p) grid, e.g. 100x100,200x200")->capture_default_str();
    sub->add_option("--reps", reps, "Replicates per cell")->capture_default_str();
    sub->add_option("--alpha", alpha, "Nominal level")->capture_default_str();
    sub->add_option("--seed", seed, "Master seed for data generation")->capture_default_str();
    sub->add_option("--B", B, "Monte Carlo replicates for degenerate calibrations")->capture_default_str();
    sub->add_option("--calibration-seed", cal_seed, "Seed for degenerate calibrations")->capture_default_str();
    sub->add_flag("--leading-order", leading, "Leading-order constants for D and R");
    sub->add_option("--format", format, "csv or json")->capture_default_str();
    sub->add_option("--out", out_path, "Output file (default stdout)");
  };
  auto* s_size = simulate->add_subcommand("size", "Empirical size under the null");
  add_common(s_size);
  s_size->add_option("--laws", laws_text, "Marginal laws: normal, t3, chisq")->capture_default_str();
  auto* s_power = simulate->add_subcommand("power", "Power curve over the sparsity k");
  add_common(s_power);
  s_power->add_option("--design", design_text, "linear, sine_cuberoot or sine_cubic")->capture_default_str();
  s_power->add_option("--ks", ks_text, "Active-set sizes, e.g. 2-16 or 2,8,16")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return e.get_exit_code() == 0 ? code : kUsage;
  }

  try {
    if (*test) {
      const Kind kind = parse_kind(kind_text);
      TestOptions options;
      options.norms = parse_norms(norms_text);
      for (const auto& w : split(weights_text)) options.weights.push_back(std::stod(w));
      options.alpha = alpha;
      options.threads = threads;
      if (ties_text == "reject") options.ties = TiePolicy::reject();
      else if (ties_text == "random") options.ties = TiePolicy::random_break(tie_seed);
      else fail(ErrorCode::InvalidArgument, "--ties must be reject or random");
      const DataMatrix data = ingest_csv(in_path);
      CalibrationSource source;
      source.file = calib_path;
      source.cache_dir = cache_dir_from_env();
      source.options = {B, seed, threads, leading};
      source.auto_calibrate = !no_auto;
      const CalibrationRecord calib = source.get(kind, static_cast<long>(data.n()));
      emit(report_to_json(run_test(data, kind, calib, options)), out_path);
    } else if (*calibrate) {
      const Kind kind = parse_kind(kind_text);
      const CalibrationRecord rec = build_calibration(kind, cal_n, {B, seed, threads, leading});
      if (out_path.empty()) emit(calibration_to_json(rec), "");
      else save_calibration(out_path, rec);
    } else if (*moments) {
      const Kind kind = parse_kind(kind_text);
      Json j;
      j["kind"] = std::string(kind_name(kind));
      j["n"] = mom_n;
      if (*q_opt) {
        MuV e;
        try {
          e = mu_v(kind, q, mom_n);
        } catch (const Error& err) {
          if (err.code() != ErrorCode::CalibrationUnavailable) throw;
          const CalibrationRecord rec = mc_calibrate(kind, mom_n, B, seed, threads);
          e = mu_v(kind, q, mom_n, &rec);
        }
        j["q"] = q;
        j["mu"] = format_double(e.mu);
        j["v"] = format_double(e.v);
        j["source"] = std::string(provenance_name(e.source));
        if (kind == Kind::Spearman || kind == Kind::Kendall || (kind == Kind::TauStar && q != 6)) {
          // exact fractions alongside the decimals
          BigRational mu, v;
          if (kind == Kind::TauStar) {
            const auto l4 = taustar_l4_exact(mom_n);
            const BigRational s2 = sigma2_exact_rational(kind, mom_n);
            mu = q == 4 ? l4.mu : s2;
            v = q == 4 ? l4.v : BigRational(l4.mu - s2 * s2);
          } else {
            auto closed = kind == Kind::Spearman ? spearman_closed : kendall_closed;
            if (q == 2) {
              mu = sigma2_exact_rational(kind, mom_n);
              v = closed(4, MomentKind::Mean, mom_n) - mu * mu;
            } else {
              mu = closed(q, MomentKind::Mean, mom_n);
              v = closed(q, MomentKind::Variance, mom_n);
            }
          }
          j["mu_exact"] = to_string(mu);
          j["v_exact"] = to_string(v);
        }
      } else {
        if (!*r_opt) fail(ErrorCode::InvalidArgument, "give --r or --q");
        BigRational value;
        std::string method;
        if (brute) {
          value = bruteforce_moment(kind, order, static_cast<int>(mom_n));
          method = "bruteforce";
        } else if (kind == Kind::Spearman) {
          value = spearman_moment_partition(order, mom_n);
          method = "partition";
        } else if (kind == Kind::Kendall) {
          value = kendall_moment(order, mom_n);
          method = "cumulant";
        } else if (is_degenerate(kind)) {
          OmegaOptions o;
          o.threads = threads;
          value = moment_from_omega(kind, order, mom_n, o);
          method = "omega";
        } else {
          fail(ErrorCode::UnsupportedKind, "Pearson has no distribution-free moments");
        }
        j["r"] = order;
        j["method"] = method;
        j["value"] = to_string(value);
        j["decimal"] = decimal(value);
      }
      emit(j.dump(2) + "\n", "");
    } else if (*constants) {
      Json j;
      if (*c_omega) {
        const Kind kind = parse_kind(kind_text);
        OmegaOptions o;
        o.threads = threads;
        o.allow_long = allow_long;
        if (route_text == "auto") o.route = OmegaRoute::Auto;
        else if (route_text == "covers") o.route = OmegaRoute::Covers;
        else if (route_text == "unionmask") o.route = OmegaRoute::UnionMask;
        else if (route_text == "embedded") o.route = OmegaRoute::Embedded;
        else fail(ErrorCode::InvalidArgument, "unknown route '" + route_text + "'");
        const BigRational w = omega(kind, om_r, om_b, o);
        j = {{"kind", std::string(kind_name(kind))}, {"r", om_r}, {"b", om_b}, {"omega", to_string(w)},
             {"decimal", decimal(w)}};
      } else if (*c_tau) {
        const auto l4 = taustar_l4_exact(tau_n);
        j = {{"n", tau_n}, {"mu", to_string(l4.mu)}, {"v", to_string(l4.v)}, {"mu_decimal", decimal(l4.mu)},
             {"v_decimal", decimal(l4.v)}};
      } else if (*c_ja) {
        const auto t = ja_moments(ja_a, ja_r);
        j["a"] = ja_a;
        for (int r = 2; r <= ja_r; ++r) {
          j["cumulants"][std::to_string(r)] = to_string(t.cumulants[static_cast<std::size_t>(r)]);
          j["moments"][std::to_string(r)] = to_string(t.moments[static_cast<std::size_t>(r)]);
        }
      } else if (*c_lead) {
        const Kind kind = parse_kind(kind_text);
        const LeadingConstants c = lead_n > 0 ? leading_constants(kind, lead_q, lead_n) : leading_coefficients(kind, lead_q);
        j = {{"kind", std::string(kind_name(kind))}, {"q", lead_q}, {"n", lead_n}, {"mu", format_double(c.mu)},
             {"v", format_double(c.v)}};
      } else if (*c_spec) {
        const Kind kind = parse_kind(kind_text);
        const auto s = spectral_constants(kind);
        j = {{"kind", std::string(kind_name(kind))},
             {"lambda1", format_double(s.lambda1)},
             {"lambda_sum", format_double(s.lambda_sum)},
             {"mu1", s.mu1},
             {"kappa", format_double(s.kappa)},
             {"m", s.m}};
      }
      emit(j.dump(2) + "\n", "");
    } else if (*simulate) {
      ExperimentConfig config;
      config.kinds = parse_kinds(kinds_text);
      config.grid = parse_grid(grid_text);
      config.reps = reps;
      config.alpha = alpha;
      config.seed = seed;
      config.threads = threads;
      CalibrationSource source;
      source.cache_dir = cache_dir_from_env();
      source.options = {B, cal_seed, threads, leading};
      std::map<std::pair<int, long>, CalibrationRecord> memo;
      CalibrationProvider provider = [&](Kind kind, long n) {
        const auto key = std::make_pair(static_cast<int>(kind), n);
        auto it = memo.find(key);
        if (it == memo.end()) it = memo.emplace(key, source.get(kind, n)).first;
        return it->second;
      };
      std::vector<RateRow> rows;
      if (*s_size) {
        config.laws.clear();
        for (const auto& law : split(laws_text)) config.laws.push_back(parse_law(law));
        rows = size_table(config, provider);
      } else {
        rows = power_curve(config, parse_design(design_text), parse_ks(ks_text), provider);
      }
      if (format == "csv") emit(rows_to_csv(rows), out_path);
      else if (format == "json") emit(rows_to_json(rows), out_path);
      else fail(ErrorCode::InvalidArgument, "--format must be csv or json");
    }
  } catch (const Error& e) {
    std::cerr << "ranklq [" << module_of(e.code()) << "] " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::invalid_argument& e) {
    std::cerr << "ranklq: malformed number: " << e.what() << "\n";
    return kUsage;
  } catch (const std::out_of_range& e) {
    std::cerr << "ranklq: number out of range: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "ranklq: internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kOk;
}
