#pragma once

#include <utility>
#include <vector>

#include "manhattan/orbits.hpp"

namespace manhattan {

struct PressureEstimate {
  double value = 0.0;                              // Aitken-extrapolated limit
  std::vector<std::pair<int, double>> per_period;  // (n, P_n), n = 1 .. n_used
  // consecutive-ratio estimator log Z_n - log Z_{n-1} at n = n_used; noisier
  // than the Aitken value but an independent cross-check
  double ratio_estimate = 0.0;
  double error_estimate = 0.0;
  int n_used = 0;
};

struct CurveSample {
  double a = 0.0;
  double b = 0.0;
  double slope = 0.0;              // db/da from the Gibbs-average ratio
  double pressure_residual = 0.0;  // |P(-a tau1 - b tau2)| at (a, b)
};

struct CorrelationPoint {
  double a0 = 0.0;
  double b0 = 0.0;
  double alpha = 0.0;  // a0 + b0
  bool degenerate_line = false;
  double slope_residual = 0.0;  // |gibbs_slope(a0, b0) + 1|
};

// log sum over periodic points of f^n of exp(-a S_n tau1 - b S_n tau2),
// assembled from primitive orbits: Z_n = sum_{p | n} sum_{orbits of period p}
// p * exp(-(n/p)(a lambda1 + b lambda2)). Log-sum-exp with compensated
// summation in (period, marking) order.
double log_partition_sum(const OrbitDatabase& db, double a, double b, int n);

// P(-a tau1 - b tau2): tail of (1/n) log Z_n accelerated by iterated Aitken
// on the last five terms. n_cap = 0 uses db.max_period; the cap needs >= 4.
PressureEstimate pressure(const OrbitDatabase& db, double a, double b, int n_cap = 0);

// positive root of P(-t tau_i) = 0 (equals twice the volume dimension)
double bowen_root(const OrbitDatabase& db, int which_map, double root_tol = 1e-9, int n_cap = 0);

// s solving P(-s(a tau1 + b tau2)) = 0
double critical_exponent(const OrbitDatabase& db, double a, double b, double root_tol = 1e-9,
                         int n_cap = 0);

// point (a, b(a)) on the zero-pressure curve
CurveSample manhattan_sample(const OrbitDatabase& db, double a, double root_tol = 1e-9);

// uniform a-grid over [0, bowen_root(1)] with exact endpoints; samples are
// independent root solves, so the result does not depend on the thread count
std::vector<CurveSample> manhattan_curve(const OrbitDatabase& db, int num_samples,
                                         double root_tol = 1e-9, int threads = 1);

// -<tau1>/<tau2> under the length-n Gibbs weights at (a, b), n = max_period
double gibbs_slope(const OrbitDatabase& db, double a, double b);

// slope -1 point of the curve: minimizes a + b(a) by golden section;
// straight-line spectra collapse to an endpoint and set degenerate_line
CorrelationPoint correlation_point(const OrbitDatabase& db, double root_tol = 1e-9);

}  // namespace manhattan
