#pragma once

#include <optional>
#include <string>
#include <vector>

#include "manhattan/orbits.hpp"

namespace manhattan {

struct CountingRecord {
  double T = 0.0;  // multiplier-modulus threshold
  long long N_T = 0;
  double li_value = 0.0;  // Li(max(2, T^{2VD}))
  double ratio = 0.0;     // N_T / li_value
  bool certified = false;
};

struct CorrelationBin {
  double T = 0.0;        // log-multiplier threshold, nats
  double epsilon = 0.0;  // window width, nats
  long long count = 0;
};

struct ExponentFit {
  double alpha_hat = 0.0;
  double std_error = 0.0;
  double intercept = 0.0;
  double c_hat = 0.0;  // exp(intercept), diagnostic only
  int bins_used = 0;
};

struct WitnessPair {
  MarkedOrbit faster_under_first;   // lambda1 > lambda2
  MarkedOrbit faster_under_second;  // lambda2 > lambda1
};

// Li(x) = integral from 2 to x of du / log u. Domain x >= 2.
double log_integral(double x);

// Largest log T for which the orbit list is provably complete below it:
// the minimum total log-multiplier among orbits of period max_period.
// Heuristic: minimal log-multiplier grows with the period for hyperbolic
// maps, so nothing longer can slip under this bar.
double certified_log_threshold(const OrbitDatabase& db, int which_map);

// Sample variance of the per-period rates lambda/p across orbits. Values
// at zero signal an arithmetic spectrum, for which the counting and
// correlation asymptotics are not expected to hold.
double spectrum_rate_variance(const OrbitDatabase& db, int which_map);

CountingRecord count_N_T(const OrbitDatabase& db, int which_map, double T);
CountingRecord count_N_T(const OrbitDatabase& db, int which_map, double T, double two_vd);

// One record per grid value. Uncertified thresholds are dropped unless
// include_uncertified is set; explanations accumulate in *warnings.
std::vector<CountingRecord> counting_report(const OrbitDatabase& db, int which_map,
                                            const std::vector<double>& T_grid,
                                            bool include_uncertified = false,
                                            std::vector<std::string>* warnings = nullptr);

// Joint window counts: orbits with both log-multipliers in (T, T + eps].
std::vector<CorrelationBin> correlation_bins(const OrbitDatabase& db, double epsilon,
                                             const std::vector<double>& T_grid,
                                             bool allow_uncertified = false);

// Least squares of log(count) + 1.5 log T against T over nonzero bins.
// poisson_weighted weights each bin by its count (inverse variance of the
// log under a Poisson model); default is plain unweighted least squares.
ExponentFit fit_correlation_exponent(const std::vector<CorrelationBin>& bins,
                                     bool poisson_weighted = false);

// One orbit with lambda1 > lambda2 and one with lambda2 > lambda1, each
// maximizing its gap; absent when the spectra never cross.
std::optional<WitnessPair> assumption_b_witness(const OrbitDatabase& db);

}  // namespace manhattan
