#include "manhattan/counting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "manhattan/errors.hpp"
#include "manhattan/thermo.hpp"

namespace manhattan {

namespace {

double orbit_lambda(const MarkedOrbit& o, int which_map) {
  return which_map == 1 ? o.lambda1 : o.lambda2;
}

void require_map_index(int which_map) {
  if (which_map != 1 && which_map != 2) throw UsageError("which_map must be 1 or 2");
}

void require_increasing(const std::vector<double>& grid) {
  if (grid.empty()) throw DomainError("empty T grid");
  for (size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw DomainError("T grid must be strictly increasing");
}

}  // namespace

double log_integral(double x) {
  if (!(x >= 2.0)) throw DomainError("log_integral is defined for x >= 2");
  if (x == 2.0) return 0.0;
  auto f = [](double u) { return 1.0 / std::log(u); };
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, 2.0, x, 15, 1e-13);
}

double certified_log_threshold(const OrbitDatabase& db, int which_map) {
  require_map_index(which_map);
  double m = std::numeric_limits<double>::infinity();
  for (const MarkedOrbit& o : db.orbits_of_period(db.max_period))
    m = std::min(m, orbit_lambda(o, which_map));
  if (!std::isfinite(m)) return -std::numeric_limits<double>::infinity();
  return m;
}

double spectrum_rate_variance(const OrbitDatabase& db, int which_map) {
  require_map_index(which_map);
  const size_t n = db.orbits.size();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (const MarkedOrbit& o : db.orbits)
    mean += orbit_lambda(o, which_map) / o.primitive_period;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (const MarkedOrbit& o : db.orbits) {
    const double d = orbit_lambda(o, which_map) / o.primitive_period - mean;
    ss += d * d;
  }
  return ss / static_cast<double>(n - 1);
}

CountingRecord count_N_T(const OrbitDatabase& db, int which_map, double T, double two_vd) {
  require_map_index(which_map);
  if (!(T > 1.0)) throw DomainError("counting threshold T must exceed 1");
  const double logT = std::log(T);
  CountingRecord rec;
  rec.T = T;
  for (const MarkedOrbit& o : db.orbits)
    if (orbit_lambda(o, which_map) <= logT) ++rec.N_T;
  rec.li_value = log_integral(std::max(2.0, std::pow(T, two_vd)));
  rec.ratio = static_cast<double>(rec.N_T) / rec.li_value;
  rec.certified = certified_log_threshold(db, which_map) > logT;
  return rec;
}

CountingRecord count_N_T(const OrbitDatabase& db, int which_map, double T) {
  return count_N_T(db, which_map, T, bowen_root(db, which_map));
}

std::vector<CountingRecord> counting_report(const OrbitDatabase& db, int which_map,
                                            const std::vector<double>& T_grid,
                                            bool include_uncertified,
                                            std::vector<std::string>* warnings) {
  require_map_index(which_map);
  require_increasing(T_grid);
  const double two_vd = bowen_root(db, which_map);
  const double cert = certified_log_threshold(db, which_map);

  if (warnings) {
    warnings->push_back(
        "certified flags use a heuristic: the smallest log-multiplier at the top "
        "computed period is assumed to bound every longer orbit");
    if (spectrum_rate_variance(db, which_map) <= 1e-12)
      warnings->push_back(
          "per-period rates are (numerically) constant: lattice (arithmetic) "
          "multiplier spectrum, the Li comparison is not expected to converge");
  }

  std::vector<CountingRecord> out;
  out.reserve(T_grid.size());
  for (double T : T_grid) {
    if (!(T > 1.0)) throw DomainError("counting threshold T must exceed 1");
    if (std::log(T) >= cert && !include_uncertified) {
      if (warnings) {
        std::ostringstream os;
        os << "T = " << T << " exceeds the certified range (log T >= " << cert
           << "); dropped, rerun with the uncertified override to include it";
        warnings->push_back(os.str());
      }
      continue;
    }
    out.push_back(count_N_T(db, which_map, T, two_vd));
  }
  return out;
}

std::vector<CorrelationBin> correlation_bins(const OrbitDatabase& db, double epsilon,
                                             const std::vector<double>& T_grid,
                                             bool allow_uncertified) {
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  require_increasing(T_grid);
  if (!allow_uncertified) {
    const double cert = std::min(certified_log_threshold(db, 1), certified_log_threshold(db, 2));
    if (T_grid.back() + epsilon >= cert) {
      std::ostringstream os;
      os << "correlation window tops out at " << T_grid.back() + epsilon
         << " which exceeds the certified range (min log-multiplier at the top period is " << cert
         << ")";
      throw DomainError(os.str());
    }
  }
  std::vector<CorrelationBin> out;
  out.reserve(T_grid.size());
  for (double T : T_grid) {
    CorrelationBin bin;
    bin.T = T;
    bin.epsilon = epsilon;
    for (const MarkedOrbit& o : db.orbits)
      if (o.lambda1 > T && o.lambda1 <= T + epsilon && o.lambda2 > T && o.lambda2 <= T + epsilon)
        ++bin.count;
    out.push_back(bin);
  }
  return out;
}

ExponentFit fit_correlation_exponent(const std::vector<CorrelationBin>& bins,
                                     bool poisson_weighted) {
  std::vector<double> x, y, w;
  for (const CorrelationBin& b : bins) {
    if (b.count <= 0) continue;
    if (!(b.T > 0.0)) throw DomainError("correlation fit needs positive thresholds");
    x.push_back(b.T);
    y.push_back(std::log(static_cast<double>(b.count)) + 1.5 * std::log(b.T));
    w.push_back(poisson_weighted ? static_cast<double>(b.count) : 1.0);
  }
  const size_t n = x.size();
  if (n < 5) throw InsufficientDataError("need at least 5 nonzero correlation bins to fit");

  double wsum = 0.0, xm = 0.0, ym = 0.0;
  for (size_t i = 0; i < n; ++i) {
    wsum += w[i];
    xm += w[i] * x[i];
    ym += w[i] * y[i];
  }
  xm /= wsum;
  ym /= wsum;
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxx += w[i] * (x[i] - xm) * (x[i] - xm);
    sxy += w[i] * (x[i] - xm) * (y[i] - ym);
  }
  if (!(sxx > 0.0)) throw InsufficientDataError("all nonzero bins share one threshold");

  ExponentFit fit;
  fit.alpha_hat = sxy / sxx;
  fit.intercept = ym - fit.alpha_hat * xm;
  fit.c_hat = std::exp(fit.intercept);
  fit.bins_used = static_cast<int>(n);
  double ssr = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double r = y[i] - (fit.intercept + fit.alpha_hat * x[i]);
    ssr += w[i] * r * r;
  }
  fit.std_error = n > 2 ? std::sqrt(ssr / static_cast<double>(n - 2) / sxx) : 0.0;
  return fit;
}

std::optional<WitnessPair> assumption_b_witness(const OrbitDatabase& db) {
  const MarkedOrbit* best1 = nullptr;  // maximal lambda1 - lambda2 > 0
  const MarkedOrbit* best2 = nullptr;  // maximal lambda2 - lambda1 > 0
  double gap1 = 0.0, gap2 = 0.0;
  for (const MarkedOrbit& o : db.orbits) {
    const double g = o.lambda1 - o.lambda2;
    if (g > gap1) {
      gap1 = g;
      best1 = &o;
    }
    if (-g > gap2) {
      gap2 = -g;
      best2 = &o;
    }
  }
  if (!best1 || !best2) return std::nullopt;
  return WitnessPair{*best1, *best2};
}

}  // namespace manhattan
