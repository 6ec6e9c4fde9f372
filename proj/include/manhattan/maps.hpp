#pragma once

#include <complex>

#include "manhattan/errors.hpp"

namespace manhattan {

using cdouble = std::complex<double>;

// z -> z^degree + c
struct UnicriticalMap {
  int degree = 2;
  cdouble c{0.0, 0.0};
};

// throws DomainError unless degree >= 2 and c is finite
void validate(const UnicriticalMap& f);

// max(2, |c|^{1/(d-1)} + 1); any orbit leaving this disk escapes to infinity
double escape_radius(const UnicriticalMap& f);

// One application of f. Overflow is not an error: the result simply
// carries non-finite components (see escaped_to_infinity).
cdouble evaluate(const UnicriticalMap& f, cdouble z);

bool escaped_to_infinity(cdouble z);

struct IterateResult {
  cdouble z_n;
  double log_abs_deriv;  // log |(f^n)'(z)|
  double arg_deriv;      // arg (f^n)'(z), reduced to (-pi, pi]
};

// n-fold composition with the derivative accumulated in log form.
// Throws OrbitEscapedError if an intermediate point leaves the escape disk,
// DerivativeVanishedError if the orbit hits the critical point.
IterateResult iterate_with_log_derivative(const UnicriticalMap& f, cdouble z, int n);

enum class Verdict {
  hyperbolic_evidence,
  inconclusive,
  non_hyperbolic_evidence,
};

const char* to_string(Verdict v);
Verdict verdict_from_string(const std::string& s);

struct HyperbolicityEvidence {
  // period of the attracting cycle the critical orbit settles on;
  // 0 when the critical orbit escapes to infinity, -1 when undetermined
  int attracting_cycle_period = -1;
  bool escapes = false;
  int critical_orbit_iterations_used = 0;
  // min over database orbits of lambda~/period; NaN until the orbit
  // database fills it in
  double min_expansion_rate;
  Verdict verdict = Verdict::inconclusive;

  HyperbolicityEvidence();
};

// Iterates the critical point for up to `budget` steps, detecting escape or
// convergence to a cycle (lag p <= 64, three consecutive agreements within 1e-10).
HyperbolicityEvidence classify_critical_orbit(const UnicriticalMap& f, int budget);

}  // namespace manhattan
