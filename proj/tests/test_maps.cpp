#include <doctest.h>

#include <cmath>
#include <numbers>

#include "manhattan/maps.hpp"
#include "oracles.hpp"

using namespace manhattan;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("validate rejects bad maps") {
  CHECK_THROWS_AS(validate(UnicriticalMap{1, cdouble{0.0, 0.0}}), DomainError);
  CHECK_THROWS_AS(validate(UnicriticalMap{0, cdouble{0.0, 0.0}}), DomainError);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(validate(UnicriticalMap{2, cdouble{nan, 0.0}}), DomainError);
  CHECK_THROWS_AS(validate(UnicriticalMap{2, cdouble{0.0, std::numeric_limits<double>::infinity()}}),
                  DomainError);
  CHECK_NOTHROW(validate(UnicriticalMap{2, cdouble{-1.1, 0.25}}));
}

TEST_CASE("escape radius") {
  CHECK(escape_radius(UnicriticalMap{2, cdouble{0.0, 0.0}}) == 2.0);
  CHECK(escape_radius(UnicriticalMap{2, cdouble{9.0, 0.0}}) == doctest::Approx(10.0));
  CHECK(escape_radius(UnicriticalMap{3, cdouble{0.0, 4.0}}) == doctest::Approx(3.0));
  CHECK(escape_radius(UnicriticalMap{2, cdouble{0.05, 0.0}}) == 2.0);
}

TEST_CASE("evaluate and the escape marker") {
  const UnicriticalMap f{2, cdouble{0.0, 1.0}};
  const cdouble w = evaluate(f, cdouble{1.0, 1.0});
  CHECK(std::abs(w - cdouble{0.0, 3.0}) < 1e-15);

  CHECK_FALSE(escaped_to_infinity(cdouble{1e15, -1e15}));
  const cdouble big = evaluate(UnicriticalMap{2, cdouble{0.0, 0.0}}, cdouble{1e200, 0.0});
  CHECK(escaped_to_infinity(big));
}

TEST_CASE("iterate on a power-map cycle") {
  const UnicriticalMap f{2, cdouble{0.0, 0.0}};
  const cdouble z = std::polar(1.0, 2.0 * kPi / 7.0);  // period 3 under doubling
  const IterateResult r = iterate_with_log_derivative(f, z, 3);
  CHECK(std::abs(r.z_n - z) < 1e-12);
  CHECK(r.log_abs_deriv == doctest::Approx(3.0 * std::log(2.0)).epsilon(1e-12));
  CHECK(std::abs(r.arg_deriv) < 1e-10);
}

TEST_CASE("single step matches evaluate and arg lands in (-pi, pi]") {
  const UnicriticalMap f{2, cdouble{0.0, 0.0}};
  const cdouble z{0.3, -0.4};
  const IterateResult r = iterate_with_log_derivative(f, z, 1);
  CHECK(r.z_n == evaluate(f, z));
  CHECK(r.log_abs_deriv == doctest::Approx(std::log(2.0 * std::abs(z))).epsilon(1e-14));

  const IterateResult neg = iterate_with_log_derivative(f, cdouble{-1.0, 0.0}, 1);
  CHECK(neg.arg_deriv == doctest::Approx(kPi));  // derivative -2, arg exactly pi
}

TEST_CASE("derivative composes across a split orbit") {
  const UnicriticalMap f{2, cdouble{-0.1, 0.0}};
  const cdouble z0{0.1, 0.2};
  const IterateResult whole = iterate_with_log_derivative(f, z0, 5);
  const IterateResult head = iterate_with_log_derivative(f, z0, 2);
  const IterateResult tail = iterate_with_log_derivative(f, head.z_n, 3);
  CHECK(std::abs(whole.z_n - tail.z_n) < 1e-12);
  CHECK(whole.log_abs_deriv == doctest::Approx(head.log_abs_deriv + tail.log_abs_deriv).epsilon(1e-9));
  const double arg_gap = std::remainder(head.arg_deriv + tail.arg_deriv - whole.arg_deriv, 2.0 * kPi);
  CHECK(std::abs(arg_gap) < 1e-9);
}

TEST_CASE("iterate error paths") {
  const UnicriticalMap f{2, cdouble{0.0, 0.0}};
  CHECK_THROWS_AS(iterate_with_log_derivative(f, cdouble{3.0, 0.0}, 5), OrbitEscapedError);
  CHECK_THROWS_AS(iterate_with_log_derivative(f, cdouble{0.0, 0.0}, 2), DerivativeVanishedError);
  CHECK_THROWS_AS(iterate_with_log_derivative(UnicriticalMap{2, cdouble{0.3, 0.0}}, cdouble{0.0, 0.0}, 1),
                  DerivativeVanishedError);
  CHECK_THROWS_AS(iterate_with_log_derivative(f, cdouble{0.5, 0.0}, -1), DomainError);
}

TEST_CASE("critical orbit classification") {
  SUBCASE("superattracting fixed point at the center") {
    const HyperbolicityEvidence ev = classify_critical_orbit(UnicriticalMap{2, cdouble{0.0, 0.0}}, 1000);
    CHECK(ev.verdict == Verdict::hyperbolic_evidence);
    CHECK(ev.attracting_cycle_period == 1);
    CHECK_FALSE(ev.escapes);
    CHECK(ev.critical_orbit_iterations_used <= 1000);
  }
  SUBCASE("basilica parameter has an attracting 2-cycle") {
    const HyperbolicityEvidence ev = classify_critical_orbit(UnicriticalMap{2, cdouble{-1.0, 0.0}}, 1000);
    CHECK(ev.verdict == Verdict::hyperbolic_evidence);
    CHECK(ev.attracting_cycle_period == 2);
    CHECK_FALSE(ev.escapes);
  }
  SUBCASE("escaping critical orbit") {
    const HyperbolicityEvidence ev = classify_critical_orbit(UnicriticalMap{2, cdouble{2.0, 0.0}}, 1000);
    CHECK(ev.verdict == Verdict::hyperbolic_evidence);
    CHECK(ev.escapes);
    CHECK(ev.attracting_cycle_period == 0);
    CHECK(ev.critical_orbit_iterations_used <= 3);
  }
  SUBCASE("parabolic parameter stays inconclusive at a moderate budget") {
    const HyperbolicityEvidence ev = classify_critical_orbit(UnicriticalMap{2, cdouble{0.25, 0.0}}, 2000);
    CHECK(ev.verdict == Verdict::inconclusive);
    CHECK(ev.attracting_cycle_period == -1);
    CHECK(ev.critical_orbit_iterations_used == 2000);
  }
  SUBCASE("bad budget") {
    CHECK_THROWS_AS(classify_critical_orbit(UnicriticalMap{2, cdouble{0.0, 0.0}}, 0), DomainError);
  }
}

TEST_CASE("verdict strings round-trip") {
  for (Verdict v : {Verdict::hyperbolic_evidence, Verdict::inconclusive, Verdict::non_hyperbolic_evidence})
    CHECK(verdict_from_string(to_string(v)) == v);
  CHECK_THROWS_AS(verdict_from_string("definitely-fine"), UsageError);
}
