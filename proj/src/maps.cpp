#include "manhattan/maps.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace manhattan {

namespace {
constexpr double kCycleTol = 1e-10;
constexpr int kMaxCycleLag = 64;
constexpr int kCycleAgreements = 3;
}  // namespace

void validate(const UnicriticalMap& f) {
  if (f.degree < 2) throw DomainError("map degree must be >= 2");
  if (!std::isfinite(f.c.real()) || !std::isfinite(f.c.imag()))
    throw DomainError("map parameter c must be finite");
}

double escape_radius(const UnicriticalMap& f) {
  const double r = std::pow(std::abs(f.c), 1.0 / (f.degree - 1)) + 1.0;
  return r < 2.0 ? 2.0 : r;
}

static cdouble ipow(cdouble z, int k) {
  cdouble w{1.0, 0.0};
  while (k-- > 0) w *= z;
  return w;
}

cdouble evaluate(const UnicriticalMap& f, cdouble z) {
  return ipow(z, f.degree) + f.c;
}

bool escaped_to_infinity(cdouble z) {
  return !std::isfinite(z.real()) || !std::isfinite(z.imag());
}

IterateResult iterate_with_log_derivative(const UnicriticalMap& f, cdouble z, int n) {
  if (n < 0) throw DomainError("iterate count must be >= 0");
  const double R = escape_radius(f);
  const double R2 = R * R;
  const double logd = std::log(static_cast<double>(f.degree));
  double log_abs = 0.0;
  double arg_sum = 0.0;
  cdouble w = z;
  for (int j = 0; j < n; ++j) {
    const double m2 = std::norm(w);
    if (!std::isfinite(m2) || m2 > R2)
      throw OrbitEscapedError("orbit escaped after " + std::to_string(j) + " steps");
    if (m2 == 0.0)
      throw DerivativeVanishedError("orbit hit the critical point at step " + std::to_string(j));
    // f'(w) = d * w^(d-1)
    log_abs += logd + 0.5 * (f.degree - 1) * std::log(m2);
    arg_sum += (f.degree - 1) * std::arg(w);
    w = evaluate(f, w);
  }
  double arg = std::remainder(arg_sum, 2.0 * std::numbers::pi);
  if (arg <= -std::numbers::pi) arg += 2.0 * std::numbers::pi;
  return IterateResult{w, log_abs, arg};
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::hyperbolic_evidence: return "hyperbolic-evidence";
    case Verdict::inconclusive: return "inconclusive";
    case Verdict::non_hyperbolic_evidence: return "non-hyperbolic-evidence";
  }
  return "inconclusive";
}

Verdict verdict_from_string(const std::string& s) {
  if (s == "hyperbolic-evidence") return Verdict::hyperbolic_evidence;
  if (s == "inconclusive") return Verdict::inconclusive;
  if (s == "non-hyperbolic-evidence") return Verdict::non_hyperbolic_evidence;
  throw UsageError("unknown verdict string: " + s);
}

HyperbolicityEvidence::HyperbolicityEvidence()
    : min_expansion_rate(std::numeric_limits<double>::quiet_NaN()) {}

HyperbolicityEvidence classify_critical_orbit(const UnicriticalMap& f, int budget) {
  validate(f);
  if (budget < 1) throw DomainError("classification budget must be >= 1");
  HyperbolicityEvidence ev;
  const double R = escape_radius(f);
  const double R2 = R * R;

  std::vector<cdouble> orbit;
  orbit.reserve(static_cast<size_t>(budget) + 1);
  orbit.push_back(cdouble{0.0, 0.0});

  for (int k = 1; k <= budget; ++k) {
    cdouble z = evaluate(f, orbit.back());
    ev.critical_orbit_iterations_used = k;
    if (escaped_to_infinity(z) || std::norm(z) > R2) {
      ev.escapes = true;
      ev.attracting_cycle_period = 0;
      ev.verdict = Verdict::hyperbolic_evidence;
      return ev;
    }
    orbit.push_back(z);
    const int top = static_cast<int>(orbit.size()) - 1;
    for (int p = 1; p <= kMaxCycleLag && top - p - (kCycleAgreements - 1) >= 0; ++p) {
      bool ok = true;
      for (int s = 0; s < kCycleAgreements; ++s) {
        if (std::abs(orbit[top - s] - orbit[top - s - p]) > kCycleTol) {
          ok = false;
          break;
        }
      }
      if (ok) {
        ev.attracting_cycle_period = p;
        ev.verdict = Verdict::hyperbolic_evidence;
        return ev;
      }
    }
  }
  ev.verdict = Verdict::inconclusive;
  return ev;
}

}  // namespace manhattan
