#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "manhattan/orbits.hpp"
#include "manhattan/thermo.hpp"
#include "oracles.hpp"

using namespace manhattan;

namespace {

const OrbitDatabase& power_db() {
  static const OrbitDatabase db = [] {
    BuildSpec sp;
    sp.d = 2;
    sp.max_period = 12;
    return build_database(sp);
  }();
  return db;
}

const OrbitDatabase& power3_db() {
  static const OrbitDatabase db = [] {
    BuildSpec sp;
    sp.d = 3;
    sp.max_period = 8;
    return build_database(sp);
  }();
  return db;
}

const OrbitDatabase& pair_db() {
  static const OrbitDatabase db = [] {
    BuildSpec sp;
    sp.d = 2;
    sp.c1 = cdouble{0.05, 0.0};
    sp.c2 = cdouble{-0.05, 0.0};
    sp.max_period = 10;
    return build_database(sp);
  }();
  return db;
}

const OrbitDatabase& single05_db() {
  static const OrbitDatabase db = [] {
    BuildSpec sp;
    sp.d = 2;
    sp.c1 = cdouble{0.05, 0.0};
    sp.c2 = cdouble{0.05, 0.0};
    sp.max_period = 10;
    return build_database(sp);
  }();
  return db;
}

}  // namespace

TEST_CASE("partition sums match hand counts") {
  // unweighted: sum of p * count(p) over p | n
  CHECK(std::abs(log_partition_sum(power_db(), 0.0, 0.0, 3) - std::log(7.0)) < 1e-12);
  // at a = b = 1/2 every power-map point contributes exp(-n log 2)
  CHECK(std::abs(log_partition_sum(power_db(), 0.5, 0.5, 4) - std::log(15.0 / 16.0)) < 1e-12);
  // single period-1 orbit of the c = 0.05 map
  CHECK(std::abs(log_partition_sum(pair_db(), 1.0, 0.0, 1) +
                 oracle::quad_fixed_log_multiplier(0.05)) < 1e-10);

  CHECK_THROWS_AS(log_partition_sum(power_db(), 0.0, 0.0, 0), DomainError);
  CHECK_THROWS_AS(log_partition_sum(power_db(), 0.0, 0.0, 13), DomainError);
}

TEST_CASE("pressure of the power map is linear in the weights") {
  const PressureEstimate p10 = pressure(power_db(), 1.0, 0.0);
  CHECK(std::abs(p10.value) < 1e-6);
  CHECK(p10.n_used == 12);
  REQUIRE(p10.per_period.size() == 12);
  CHECK(p10.per_period[2].first == 3);
  CHECK(std::abs(p10.per_period[2].second - std::log(7.0 / 8.0) / 3.0) < 1e-12);
  // the consecutive-ratio estimator is the cruder cross-check
  CHECK(std::abs(p10.ratio_estimate - p10.value) < 1e-3);
  CHECK(p10.error_estimate >= std::abs(p10.value));
  CHECK(p10.error_estimate < 1e-4);

  const PressureEstimate p00 = pressure(power_db(), 0.0, 0.0);
  CHECK(std::abs(p00.value - std::log(2.0)) < 1e-6);

  const PressureEstimate q = pressure(power3_db(), 1.0, 0.0);
  CHECK(std::abs(q.value) < 1e-6);

  const PressureEstimate capped = pressure(power_db(), 1.0, 0.0, 8);
  CHECK(capped.n_used == 8);
  CHECK(capped.per_period.size() == 8);
  CHECK_THROWS_AS(pressure(power_db(), 1.0, 0.0, 3), DomainError);
  CHECK_THROWS_AS(pressure(power_db(), 1.0, 0.0, 13), DomainError);
}

TEST_CASE("pressure decreases in each weight") {
  const double base = pressure(pair_db(), 0.1, 0.1).value;
  CHECK(pressure(pair_db(), 0.35, 0.1).value < base);
  CHECK(pressure(pair_db(), 0.1, 0.35).value < base);
}

TEST_CASE("Bowen roots") {
  CHECK(std::abs(bowen_root(power_db(), 1) - 1.0) < 1e-6);
  CHECK(std::abs(bowen_root(power_db(), 2) - 1.0) < 1e-6);
  CHECK(std::abs(bowen_root(power3_db(), 1) - 1.0) < 1e-6);
  CHECK_THROWS_AS(bowen_root(power_db(), 0), UsageError);
  CHECK_THROWS_AS(bowen_root(power_db(), 3), UsageError);

  // small parameters sit near the quadratic expansion 1 + |c|^2 / (4 log 2)
  const double root = bowen_root(single05_db(), 1);
  CHECK(std::abs(root - (1.0 + 0.0025 / (4.0 * std::log(2.0)))) < 1e-3);
  CHECK(root > 1.0);
}

TEST_CASE("critical exponent scales like 1/t and matches the Bowen root") {
  const double s = critical_exponent(power_db(), 0.7, 0.3);
  CHECK(std::abs(s - 1.0) < 1e-6);
  for (double t : {0.5, 2.0, 4.0})
    CHECK(std::abs(t * critical_exponent(power_db(), t * 0.7, t * 0.3) - s) < 1e-8);

  CHECK(std::abs(critical_exponent(pair_db(), 1.0, 0.0) - bowen_root(pair_db(), 1)) < 1e-9);
  CHECK(std::abs(critical_exponent(pair_db(), 0.0, 1.0) - bowen_root(pair_db(), 2)) < 1e-9);

  CHECK_THROWS_AS(critical_exponent(power_db(), 0.0, 0.0), DomainError);
  CHECK_THROWS_AS(critical_exponent(power_db(), -0.1, 0.5), DomainError);
}

TEST_CASE("curve samples solve the zero-pressure equation") {
  const double A = bowen_root(pair_db(), 1);
  const double B = bowen_root(pair_db(), 2);

  const CurveSample mid = manhattan_sample(pair_db(), A / 2.0);
  CHECK(mid.b > 0.0);
  CHECK(mid.b < B);
  CHECK(mid.pressure_residual <= 1e-9);
  CHECK(mid.slope < 0.0);

  const CurveSample left = manhattan_sample(pair_db(), 0.0);
  CHECK(std::abs(left.b - B) < 1e-8);
  const CurveSample right = manhattan_sample(pair_db(), A);
  CHECK(right.b == 0.0);

  CHECK_THROWS_AS(manhattan_sample(pair_db(), -0.1), DomainError);
  CHECK_THROWS_AS(manhattan_sample(pair_db(), A + 0.1), DomainError);
}

TEST_CASE("curve for the power map is the straight line a + b = 1") {
  const auto curve = manhattan_curve(power_db(), 5);
  REQUIRE(curve.size() == 5);
  const double A = bowen_root(power_db(), 1);
  CHECK(curve.front().a == 0.0);
  CHECK(curve.back().a == A);
  CHECK(curve.back().b == 0.0);
  for (size_t i = 0; i < curve.size(); ++i) {
    CHECK(std::abs(curve[i].a - A * double(i) / 4.0) < 1e-12);
    CHECK(std::abs(curve[i].a + curve[i].b - 1.0) < 1e-6);
    // identical spectra on both sides give the Gibbs ratio exactly
    CHECK(std::abs(curve[i].slope + 1.0) < 1e-12);
  }
  CHECK_THROWS_AS(manhattan_curve(power_db(), 2), UsageError);
}

TEST_CASE("curve of a generic pair is decreasing and convex") {
  const auto curve = manhattan_curve(pair_db(), 21);
  REQUIRE(curve.size() == 21);
  for (size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].b < curve[i - 1].b);
  for (size_t i = 1; i + 1 < curve.size(); ++i)
    CHECK(curve[i - 1].b + curve[i + 1].b - 2.0 * curve[i].b >= -1e-6);
  for (const CurveSample& s : curve) CHECK(s.pressure_residual <= 1e-9);
}

TEST_CASE("identical maps give the degenerate diagonal") {
  const double A = bowen_root(single05_db(), 1);
  CHECK(bowen_root(single05_db(), 2) == A);  // same spectrum bit for bit

  const auto curve = manhattan_curve(single05_db(), 9);
  for (const CurveSample& s : curve) CHECK(std::abs(s.b - (A - s.a)) <= 1e-7);

  const CorrelationPoint cp = correlation_point(single05_db());
  CHECK(cp.degenerate_line);
  CHECK(std::abs(cp.alpha - A) < 1e-6);
  CHECK(std::abs(cp.a0 + cp.b0 - cp.alpha) < 1e-12);
  CHECK(cp.slope_residual < 1e-9);
}

TEST_CASE("slope-minus-one point of a generic pair") {
  const double A = bowen_root(pair_db(), 1);
  const double B = bowen_root(pair_db(), 2);
  const CorrelationPoint cp = correlation_point(pair_db());
  CHECK(cp.alpha > 0.0);
  CHECK(cp.alpha <= std::min(A, B) + 1e-9);
  CHECK(cp.a0 >= 0.0);
  CHECK(cp.b0 >= 0.0);
  CHECK(std::abs(cp.a0 + cp.b0 - cp.alpha) < 1e-12);
  if (!cp.degenerate_line) {
    CHECK(cp.slope_residual < 0.05);
    const CurveSample at = manhattan_sample(pair_db(), cp.a0);
    CHECK(std::abs(at.b - cp.b0) < 1e-6);
  }
}

TEST_CASE("Gibbs slope agrees with a finite difference of the curve") {
  const double A = bowen_root(pair_db(), 1);
  const double a = A / 2.0;
  const CurveSample s = manhattan_sample(pair_db(), a);
  const double h = 1e-3;
  const double fd =
      (manhattan_sample(pair_db(), a + h).b - manhattan_sample(pair_db(), a - h).b) / (2.0 * h);
  CHECK(std::abs(gibbs_slope(pair_db(), a, s.b) - fd) < 1e-3);

  OrbitDatabase holed = truncated(pair_db(), 4);
  holed.max_period = 5;  // no stored orbits at the top period
  CHECK_THROWS_AS(gibbs_slope(holed, 0.5, 0.5), DomainError);
}
