#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "manhattan/counting.hpp"
#include "manhattan/db_io.hpp"
#include "manhattan/errors.hpp"
#include "manhattan/orbits.hpp"
#include "manhattan/thermo.hpp"

namespace manhattan::cli {

namespace {

double parse_real_strict(const std::string& s, const char* what) {
  if (s.empty()) throw UsageError(std::string("empty ") + what);
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size())
    throw UsageError(std::string("cannot parse ") + what + " '" + s + "'");
  return v;
}

long parse_int_strict(const std::string& s, const char* what) {
  if (s.empty()) throw UsageError(std::string("empty ") + what);
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size())
    throw UsageError(std::string("cannot parse ") + what + " '" + s + "'");
  return v;
}

std::string complex_str(cdouble z) {
  std::string s = format_real(z.real());
  s += z.imag() < 0.0 ? "-" : "+";
  s += format_real(std::abs(z.imag()));
  s += "i";
  return s;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot open output file: " + path);
  return out;
}

const char* bool_str(bool b) { return b ? "true" : "false"; }

}  // namespace

cdouble parse_complex(const std::string& text) {
  const auto fail = [&]() -> UsageError {
    return UsageError("cannot parse complex literal '" + text +
                      "': expected re+imi (e.g. 0.05+0i, -0.1+0.2i) or a bare real");
  };
  if (text.empty()) throw fail();
  if (text.back() != 'i') {
    errno = 0;
    char* end = nullptr;
    const double re = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size()) throw fail();
    return {re, 0.0};
  }
  const std::string body = text.substr(0, text.size() - 1);
  if (body.empty()) throw fail();
  // the split sign is the last +/- that is neither leading nor an exponent sign
  size_t split = std::string::npos;
  for (size_t i = 1; i < body.size(); ++i) {
    if (body[i] != '+' && body[i] != '-') continue;
    if (body[i - 1] == 'e' || body[i - 1] == 'E') continue;
    split = i;
  }
  std::string re_part = "0", im_part = body;
  if (split != std::string::npos) {
    re_part = body.substr(0, split);
    im_part = body.substr(split);  // keeps the sign
  }
  char* end = nullptr;
  const double re = std::strtod(re_part.c_str(), &end);
  if (end != re_part.c_str() + re_part.size()) throw fail();
  const double im = std::strtod(im_part.c_str(), &end);
  if (end != im_part.c_str() + im_part.size()) throw fail();
  return {re, im};
}

std::vector<cdouble> parse_waypoints(const std::string& text) {
  std::vector<cdouble> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_complex(item));
  if (out.empty()) throw UsageError("empty waypoint list");
  return out;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 4)
    throw UsageError("cannot parse grid '" + text + "': expected start:stop:count:geometric|linear");
  const double start = parse_real_strict(parts[0], "grid start");
  const double stop = parse_real_strict(parts[1], "grid stop");
  const long count = parse_int_strict(parts[2], "grid count");
  if (!(stop > start)) throw UsageError("grid stop must exceed start");
  if (count < 2) throw UsageError("grid count must be at least 2");
  std::vector<double> grid(static_cast<size_t>(count));
  if (parts[3] == "geometric") {
    if (!(start > 0.0)) throw UsageError("geometric grid needs start > 0");
    const double l0 = std::log(start), l1 = std::log(stop);
    for (long i = 0; i < count; ++i)
      grid[i] = std::exp(l0 + (l1 - l0) * static_cast<double>(i) / static_cast<double>(count - 1));
  } else if (parts[3] == "linear") {
    for (long i = 0; i < count; ++i)
      grid[i] = start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1);
  } else {
    throw UsageError("grid kind must be 'geometric' or 'linear', got '" + parts[3] + "'");
  }
  grid.front() = start;
  grid.back() = stop;
  return grid;
}

namespace {

void print_evidence(int which, cdouble c, const HyperbolicityEvidence& ev) {
  std::printf("map %d (c = %s): %s", which, complex_str(c).c_str(), to_string(ev.verdict));
  if (ev.escapes)
    std::printf(", critical orbit escapes after %d steps", ev.critical_orbit_iterations_used);
  else if (ev.attracting_cycle_period > 0)
    std::printf(", attracting cycle of period %d after %d steps", ev.attracting_cycle_period,
                ev.critical_orbit_iterations_used);
  else
    std::printf(", no conclusion after %d steps", ev.critical_orbit_iterations_used);
  if (std::isfinite(ev.min_expansion_rate))
    std::printf(", min expansion rate %.6g", ev.min_expansion_rate);
  std::printf("\n");
}

struct OrbitsOpts {
  int d = 2;
  std::string c1, c2;
  int max_period = 0;
  std::string out;
  std::string path1, path2;
  double newton_tol = 1e-11;
  double merge_tol = 1e-7;
  long long seed_cap = 1LL << 24;
  int evidence_budget = 10000;
  int threads = 1;
};

int run_orbits(const OrbitsOpts& o) {
  if (o.max_period < 1) throw UsageError("--max-period must be at least 1");
  if (!(o.newton_tol > 0.0) || !(o.merge_tol > 0.0)) throw UsageError("tolerances must be positive");
  if (o.threads < 1) throw UsageError("--threads must be at least 1");
  BuildSpec spec;
  spec.d = o.d;
  spec.c1 = parse_complex(o.c1);
  spec.c2 = o.c2.empty() ? spec.c1 : parse_complex(o.c2);
  spec.max_period = o.max_period;
  if (!o.path1.empty()) spec.path1 = parse_waypoints(o.path1);
  if (!o.path2.empty()) spec.path2 = parse_waypoints(o.path2);
  spec.config.track.newton_tol = o.newton_tol;
  spec.config.track.point_merge_tol = o.merge_tol;
  spec.config.track.threads = o.threads;
  spec.config.seed_cap = o.seed_cap;
  spec.config.evidence_budget = o.evidence_budget;

  OrbitDatabase db = build_database(spec);
  save_database(db, o.out);

  std::printf("wrote %s: d=%d c1=%s c2=%s max_period=%d\n", o.out.c_str(), db.d,
              complex_str(db.c1).c_str(), complex_str(db.c2).c_str(), db.max_period);
  print_evidence(1, db.c1, db.evidence1);
  print_evidence(2, db.c2, db.evidence2);
  std::printf("%8s %10s %10s\n", "period", "orbits", "excluded");
  long long excluded_total = 0;
  for (int n = 1; n <= db.max_period; ++n) {
    long long ex = 0;
    for (const ExcludedMarking& e : db.excluded)
      if (e.primitive_period == n) ++ex;
    excluded_total += ex;
    std::printf("%8d %10lld %10lld\n", n, static_cast<long long>(db.count_of_period(n)), ex);
  }
  std::printf("total: %lld primitive orbits, %lld excluded\n",
              static_cast<long long>(db.orbits.size()), excluded_total);
  return 0;
}

struct DimOpts {
  std::string db;
  int map = 1;
  double root_tol = 1e-9;
  int n_cap = 0;
};

int run_dim(const DimOpts& o) {
  if (!(o.root_tol > 0.0)) throw UsageError("--root-tol must be positive");
  OrbitDatabase db = load_database(o.db);
  const int N = o.n_cap == 0 ? db.max_period : o.n_cap;
  const double value = bowen_root(db, o.map, o.root_tol, N);  // also validates the cap
  std::printf("map %d (c = %s), periods up to %d\n", o.map,
              complex_str(o.map == 1 ? db.c1 : db.c2).c_str(), N);
  std::printf("%4s %-22s\n", "n", "root");
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (int n = 4; n < N; ++n) {
    prev = bowen_root(db, o.map, o.root_tol, n);
    std::printf("%4d %.17g\n", n, prev);
  }
  std::printf("%4d %.17g\n", N, value);
  const double err = std::isnan(prev) ? 0.0 : std::abs(value - prev);
  std::printf("2VD = %s (error estimate %.3g, periods used %d)\n", format_real(value).c_str(),
              err, N);
  return 0;
}

struct CurveOpts {
  std::string db;
  int samples = 33;
  std::string out;
  double root_tol = 1e-9;
  int threads = 1;
};

int run_curve(const CurveOpts& o) {
  if (!(o.root_tol > 0.0)) throw UsageError("--root-tol must be positive");
  if (o.threads < 1) throw UsageError("--threads must be at least 1");
  OrbitDatabase db = load_database(o.db);
  const std::vector<CurveSample> samples = manhattan_curve(db, o.samples, o.root_tol, o.threads);
  const CorrelationPoint cp = correlation_point(db, o.root_tol);

  {
    std::ofstream out = open_out(o.out);
    out << "a,b,slope,pressure_residual\n";
    for (const CurveSample& s : samples)
      out << format_real(s.a) << "," << format_real(s.b) << "," << format_real(s.slope) << ","
          << format_real(s.pressure_residual) << "\n";
  }
  {
    std::ofstream out = open_out(o.out + ".summary.json");
    out << "{\n"
        << "  \"a0\": " << format_real(cp.a0) << ",\n"
        << "  \"b0\": " << format_real(cp.b0) << ",\n"
        << "  \"alpha\": " << format_real(cp.alpha) << ",\n"
        << "  \"degenerate_line\": " << bool_str(cp.degenerate_line) << ",\n"
        << "  \"slope_residual\": " << format_real(cp.slope_residual) << "\n"
        << "}\n";
  }
  std::printf("wrote %s (%zu samples) and %s.summary.json\n", o.out.c_str(), samples.size(),
              o.out.c_str());
  std::printf("correlation point: a0=%.10g b0=%.10g alpha=%.10g degenerate_line=%s "
              "slope_residual=%.3g\n",
              cp.a0, cp.b0, cp.alpha, bool_str(cp.degenerate_line), cp.slope_residual);
  return 0;
}

struct CountOpts {
  std::string db;
  int map = 1;
  std::string grid;
  std::string out;
  bool allow_uncertified = false;
};

int run_count(const CountOpts& o) {
  OrbitDatabase db = load_database(o.db);
  const std::vector<double> grid = parse_grid(o.grid);
  std::vector<std::string> warnings;
  const std::vector<CountingRecord> recs =
      counting_report(db, o.map, grid, o.allow_uncertified, &warnings);

  std::ofstream out = open_out(o.out);
  for (const std::string& w : warnings) out << "# " << w << "\n";
  out << "T,N_T,li,ratio,certified\n";
  for (const CountingRecord& r : recs)
    out << format_real(r.T) << "," << r.N_T << "," << format_real(r.li_value) << ","
        << format_real(r.ratio) << "," << bool_str(r.certified) << "\n";

  for (const std::string& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  std::printf("wrote %s: %zu of %zu grid points\n", o.out.c_str(), recs.size(), grid.size());
  return 0;
}

struct CorrelateOpts {
  std::string db;
  double epsilon = 0.0;
  std::string grid;
  std::string out;
  bool allow_uncertified = false;
  bool poisson = false;
};

int run_correlate(const CorrelateOpts& o) {
  OrbitDatabase db = load_database(o.db);
  const std::vector<double> grid = parse_grid(o.grid);
  const std::vector<CorrelationBin> bins =
      correlation_bins(db, o.epsilon, grid, o.allow_uncertified);

  {
    std::ofstream out = open_out(o.out);
    out << "T,epsilon,count\n";
    for (const CorrelationBin& b : bins)
      out << format_real(b.T) << "," << format_real(b.epsilon) << "," << b.count << "\n";
  }
  std::printf("wrote %s: %zu bins\n", o.out.c_str(), bins.size());

  const ExponentFit fit = fit_correlation_exponent(bins, o.poisson);
  const CorrelationPoint cp = correlation_point(db);
  const double gap = std::abs(cp.alpha) > 0.0
                         ? std::abs(fit.alpha_hat - cp.alpha) / std::abs(cp.alpha)
                         : std::numeric_limits<double>::infinity();
  const bool lattice =
      std::min(spectrum_rate_variance(db, 1), spectrum_rate_variance(db, 2)) <= 1e-12;
  if (lattice)
    std::fprintf(stderr, "warning: multiplier spectrum looks arithmetic; the exponential "
                         "correlation model is not expected to apply\n");

  {
    std::ofstream out = open_out(o.out + ".fit.json");
    out << "{\n"
        << "  \"alpha_hat\": " << format_real(fit.alpha_hat) << ",\n"
        << "  \"stderr\": " << format_real(fit.std_error) << ",\n"
        << "  \"alpha_curve\": " << format_real(cp.alpha) << ",\n"
        << "  \"relative_gap\": " << format_real(gap) << ",\n"
        << "  \"c_hat\": " << format_real(fit.c_hat) << ",\n"
        << "  \"bins_used\": " << fit.bins_used << ",\n"
        << "  \"epsilon\": " << format_real(o.epsilon) << ",\n"
        << "  \"poisson_weighted\": " << bool_str(o.poisson) << ",\n"
        << "  \"lattice_suspect\": " << bool_str(lattice) << "\n"
        << "}\n";
  }
  std::printf("fit: alpha_hat=%.10g stderr=%.3g alpha_curve=%.10g relative_gap=%.3g "
              "(%d bins)\n",
              fit.alpha_hat, fit.std_error, cp.alpha, gap, fit.bins_used);
  return 0;
}

struct CheckOpts {
  std::string db;
};

int run_check(const CheckOpts& o) {
  OrbitDatabase db = load_database(o.db);
  VerifyReport rep = verify_database(db);
  std::vector<CheckResult> checks = rep.checks;

  {
    CheckResult r;
    r.name = "pressure-monotone";
    const double p0 = pressure(db, 0.1, 0.1).value;
    const double pa = pressure(db, 0.35, 0.1).value;
    const double pb = pressure(db, 0.1, 0.35).value;
    r.pass = pa < p0 && pb < p0;
    std::ostringstream os;
    os << "P(0.1,0.1)=" << p0 << " P(0.35,0.1)=" << pa << " P(0.1,0.35)=" << pb;
    r.detail = os.str();
    checks.push_back(std::move(r));
  }
  {
    CheckResult r;
    r.name = "exponent-homogeneity";
    const double base = critical_exponent(db, 0.7, 0.3);
    const double e2 = std::abs(2.0 * critical_exponent(db, 1.4, 0.6) - base);
    const double eh = std::abs(0.5 * critical_exponent(db, 0.35, 0.15) - base);
    const double err = std::max(e2, eh);
    r.pass = err <= 1e-8;
    std::ostringstream os;
    os << "max deviation " << err << " over t in {0.5, 2}";
    r.detail = os.str();
    checks.push_back(std::move(r));
  }
  {
    CheckResult r;
    r.name = "curve-convexity";
    const std::vector<CurveSample> cs = manhattan_curve(db, 9);
    double min_dd = std::numeric_limits<double>::infinity();
    for (size_t i = 1; i + 1 < cs.size(); ++i)
      min_dd = std::min(min_dd, cs[i + 1].b - 2.0 * cs[i].b + cs[i - 1].b);
    r.pass = min_dd >= -1e-6;
    std::ostringstream os;
    os << "min second difference " << min_dd;
    r.detail = os.str();
    checks.push_back(std::move(r));
  }
  {
    CheckResult r;
    r.name = "swap-symmetry";
    const int mp = std::min(db.max_period, 6);
    BuildSpec spec;
    spec.d = db.d;
    spec.c1 = db.c2;
    spec.c2 = db.c1;
    spec.max_period = mp;
    OrbitDatabase swapped = build_database(spec);
    OrbitDatabase trunc = truncated(db, mp);
    std::vector<std::pair<double, double>> ours, theirs;
    for (const MarkedOrbit& mo : trunc.orbits) ours.emplace_back(mo.lambda1, mo.lambda2);
    for (const MarkedOrbit& mo : swapped.orbits) theirs.emplace_back(mo.lambda2, mo.lambda1);
    std::sort(ours.begin(), ours.end());
    std::sort(theirs.begin(), theirs.end());
    double gap = 0.0;
    if (ours.size() != theirs.size()) {
      r.pass = false;
      r.detail = "orbit counts differ between orders";
    } else {
      for (size_t i = 0; i < ours.size(); ++i) {
        gap = std::max(gap, std::abs(ours[i].first - theirs[i].first));
        gap = std::max(gap, std::abs(ours[i].second - theirs[i].second));
      }
      r.pass = gap <= 1e-8;
      std::ostringstream os;
      os << "max multiplier gap " << gap << " at periods <= " << mp;
      r.detail = os.str();
    }
    checks.push_back(std::move(r));
  }

  int passed = 0;
  for (const CheckResult& c : checks) {
    std::printf("%-22s %-4s %s\n", c.name.c_str(), c.pass ? "pass" : "FAIL", c.detail.c_str());
    if (c.pass) ++passed;
  }
  if (db.max_period < 8)
    std::printf("warning: max_period %d < 8, extrapolated quantities are low quality\n",
                db.max_period);
  const bool ok = passed == static_cast<int>(checks.size());
  std::printf("RESULT: %s (%d/%zu)\n", ok ? "PASS" : "FAIL", passed, checks.size());
  return ok ? 0 : 4;
}

}  // namespace

int run(std::vector<std::string> args) {
  CLI::App app{"thermodynamic formalism toolkit for pairs of unicritical polynomial maps"};
  app.name("manhattan");
  app.require_subcommand(1);

  OrbitsOpts oo;
  CLI::App* orbits = app.add_subcommand("orbits", "build and save a marked orbit database");
  orbits->add_option("--d", oo.d, "polynomial degree")->default_val(2);
  orbits->add_option("--c1", oo.c1, "first parameter, re+imi literal")->required();
  orbits->add_option("--c2", oo.c2, "second parameter (defaults to --c1)");
  orbits->add_option("--max-period", oo.max_period, "largest primitive period")->required();
  orbits->add_option("--out", oo.out, "output database path (JSON lines)")->required();
  orbits->add_option("--path1", oo.path1, "waypoints 0 -> c1, comma-separated literals");
  orbits->add_option("--path2", oo.path2, "waypoints c1 -> c2, comma-separated literals");
  orbits->add_option("--newton-tol", oo.newton_tol, "Newton residual tolerance");
  orbits->add_option("--merge-tol", oo.merge_tol, "point identification tolerance");
  orbits->add_option("--seed-cap", oo.seed_cap, "refuse builds needing more seeds than this");
  orbits->add_option("--evidence-budget", oo.evidence_budget, "critical orbit iteration budget");
  orbits->add_option("--threads", oo.threads, "tracking threads");

  DimOpts dopt;
  CLI::App* dim = app.add_subcommand("dim", "Bowen root 2VD of one map's multiplier spectrum");
  dim->add_option("db", dopt.db, "database path")->required();
  dim->add_option("--map", dopt.map, "which map, 1 or 2")->check(CLI::Range(1, 2));
  dim->add_option("--root-tol", dopt.root_tol, "root tolerance");
  dim->add_option("--n-cap", dopt.n_cap, "use only periods up to this (0 = all)");

  CurveOpts copt;
  CLI::App* curve = app.add_subcommand("curve", "sample the pressure-zero curve b(a)");
  curve->add_option("db", copt.db, "database path")->required();
  curve->add_option("--samples", copt.samples, "number of grid points")->default_val(33);
  curve->add_option("--out", copt.out, "output CSV path")->required();
  curve->add_option("--root-tol", copt.root_tol, "root tolerance");
  curve->add_option("--threads", copt.threads, "evaluation threads");

  CountOpts nopt;
  CLI::App* count = app.add_subcommand("count", "multiplier counting report N_T vs Li(T^2VD)");
  count->add_option("db", nopt.db, "database path")->required();
  count->add_option("--map", nopt.map, "which map, 1 or 2")->check(CLI::Range(1, 2));
  count->add_option("--grid", nopt.grid, "T grid, start:stop:count:geometric|linear")->required();
  count->add_option("--out", nopt.out, "output CSV path")->required();
  count->add_flag("--allow-uncertified", nopt.allow_uncertified,
                  "keep thresholds beyond the certified range");

  CorrelateOpts xopt;
  CLI::App* correlate =
      app.add_subcommand("correlate", "joint multiplier windows and exponent fit");
  correlate->add_option("db", xopt.db, "database path")->required();
  correlate->add_option("--epsilon", xopt.epsilon, "window width in nats")->required();
  correlate->add_option("--grid", xopt.grid, "log-multiplier grid, start:stop:count:...")
      ->required();
  correlate->add_option("--out", xopt.out, "output CSV path")->required();
  correlate->add_flag("--allow-uncertified", xopt.allow_uncertified,
                      "allow windows beyond the certified range");
  correlate->add_flag("--poisson-fit", xopt.poisson, "weight bins by count in the fit");

  CheckOpts kopt;
  CLI::App* check = app.add_subcommand("check", "verify a database and run self-checks");
  check->add_option("db", kopt.db, "database path")->required();

  std::reverse(args.begin(), args.end());
  try {
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (app.got_subcommand(orbits)) return run_orbits(oo);
    if (app.got_subcommand(dim)) return run_dim(dopt);
    if (app.got_subcommand(curve)) return run_curve(copt);
    if (app.got_subcommand(count)) return run_count(nopt);
    if (app.got_subcommand(correlate)) return run_correlate(xopt);
    if (app.got_subcommand(check)) return run_check(kopt);
    std::cerr << "usage error: no subcommand\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const InvariantError& e) {
    std::cerr << "invariant failure: " << e.what() << "\n";
    return 4;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace manhattan::cli
