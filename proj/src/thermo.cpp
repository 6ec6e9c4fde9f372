#include "manhattan/thermo.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <sstream>

#include "parallel.hpp"

namespace manhattan {

namespace {

// Flattened per-period term tables: orbit of period p contributes to every
// n with p | n the term log(p) - (n/p)(a*lambda1 + b*lambda2). Storing the
// lambda sums lets one table serve every (a, b) a solver visits.
struct TermTable {
  int n_max = 0;
  std::vector<std::vector<double>> logp;
  std::vector<std::vector<double>> l1;  // (n/p) * lambda1, term order = (p, marking)
  std::vector<std::vector<double>> l2;

  static TermTable build(const OrbitDatabase& db, int n_cap) {
    TermTable t;
    t.n_max = n_cap;
    t.logp.resize(n_cap + 1);
    t.l1.resize(n_cap + 1);
    t.l2.resize(n_cap + 1);
    for (int n = 1; n <= n_cap; ++n) {
      for (int p = 1; p <= n; ++p) {
        if (n % p != 0) continue;
        const double rep = static_cast<double>(n / p);
        const double lp = std::log(static_cast<double>(p));
        for (const MarkedOrbit& o : db.orbits_of_period(p)) {
          t.logp[n].push_back(lp);
          t.l1[n].push_back(rep * o.lambda1);
          t.l2[n].push_back(rep * o.lambda2);
        }
      }
    }
    return t;
  }

  // log-sum-exp with a single max shift and Kahan summation, fixed order
  double log_Z(int n, double a, double b) const {
    const auto& lp = logp[n];
    const auto& x1 = l1[n];
    const auto& x2 = l2[n];
    const size_t m = lp.size();
    if (m == 0) return -std::numeric_limits<double>::infinity();
    double shift = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < m; ++i) {
      const double term = lp[i] - a * x1[i] - b * x2[i];
      if (term > shift) shift = term;
    }
    double sum = 0.0, comp = 0.0;
    for (size_t i = 0; i < m; ++i) {
      const double term = std::exp(lp[i] - a * x1[i] - b * x2[i] - shift);
      const double y = term - comp;
      const double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
    }
    return shift + std::log(sum);
  }

  double P_n(int n, double a, double b) const { return log_Z(n, a, b) / n; }

  PressureEstimate estimate(double a, double b) const {
    PressureEstimate est;
    est.n_used = n_max;
    est.per_period.reserve(n_max);
    for (int n = 1; n <= n_max; ++n) est.per_period.emplace_back(n, P_n(n, a, b));
    if (n_max >= 2)
      est.ratio_estimate = n_max * est.per_period[n_max - 1].second -
                           (n_max - 1) * est.per_period[n_max - 2].second;

    const int tail_len = std::min<int>(5, n_max);
    std::vector<double> cur;
    for (int i = n_max - tail_len; i < n_max; ++i) cur.push_back(est.per_period[i].second);
    double value = cur.back();
    double last_corr = 0.0;
    while (cur.size() >= 3) {
      std::vector<double> next;
      for (size_t i = 0; i + 2 < cur.size(); ++i) {
        const double x = cur[i], y = cur[i + 1], z = cur[i + 2];
        const double denom = z - 2.0 * y + x;
        if (std::abs(denom) > 1e-14 * std::max(1.0, std::abs(z)))
          next.push_back(z - (z - y) * (z - y) / denom);
        else
          next.push_back(z);
      }
      last_corr = std::abs(next.back() - cur.back());
      value = next.back();
      cur = std::move(next);
    }
    est.value = value;
    const double raw_gap = std::abs(value - est.per_period.back().second);
    est.error_estimate = std::max({last_corr, raw_gap, DBL_EPSILON});
    return est;
  }
};

int resolve_cap(const OrbitDatabase& db, int n_cap) {
  const int n = n_cap == 0 ? db.max_period : n_cap;
  if (n < 4) throw DomainError("pressure needs at least four periods");
  if (n > db.max_period) throw DomainError("period cap exceeds the database max_period");
  return n;
}

// decreasing g with g(lo) >= 0 >= g(hi): bisection to width 1e-3, then secant
// (bracket-guarded) until the step and the residual are both within root_tol
double bisect_then_secant(const std::function<double(double)>& g, double lo, double hi, double glo,
                          double ghi, double root_tol) {
  if (!(glo >= 0.0) || !(ghi < 0.0)) throw BracketError("root bracket failed");
  while (hi - lo > 1e-3) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if (gm >= 0.0) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
      ghi = gm;
    }
  }
  double x0 = lo, f0 = glo, x1 = hi, f1 = ghi;
  for (int it = 0; it < 80; ++it) {
    if (std::abs(f1) <= root_tol && std::abs(x1 - x0) <= root_tol) return x1;
    double x2;
    if (f1 != f0) {
      x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
      if (!(x2 >= lo && x2 <= hi)) x2 = 0.5 * (lo + hi);
    } else {
      x2 = 0.5 * (lo + hi);
    }
    const double f2 = g(x2);
    if (f2 >= 0.0)
      lo = x2;
    else
      hi = x2;
    x0 = x1;
    f0 = f1;
    x1 = x2;
    f1 = f2;
    if (hi - lo <= root_tol * 1e-3 && std::abs(f1) <= root_tol) return x1;
  }
  if (std::abs(f1) <= root_tol) return x1;
  throw BracketError("root refinement did not converge");
}

double min_direction_rate(const OrbitDatabase& db, double a, double b) {
  double r = std::numeric_limits<double>::infinity();
  for (const MarkedOrbit& o : db.orbits)
    r = std::min(r, (a * o.lambda1 + b * o.lambda2) / o.primitive_period);
  return r;
}

double solve_scale(const OrbitDatabase& db, double a, double b, double root_tol, int n_cap) {
  const int N = resolve_cap(db, n_cap);
  if (db.orbits.empty()) throw BracketError("empty orbit database");
  const double rate = min_direction_rate(db, a, b);
  if (!(rate > 0.0)) throw BracketError("direction has non-positive minimal rate");
  const TermTable t = TermTable::build(db, N);
  auto g = [&](double s) { return t.estimate(s * a, s * b).value; };
  double lo = 0.0;
  const double glo = g(lo);
  double hi = 2.0 * std::log(static_cast<double>(db.d)) / rate;
  double ghi = g(hi);
  for (int grow = 0; ghi >= 0.0 && grow < 8; ++grow) {
    hi *= 2.0;
    ghi = g(hi);
  }
  return bisect_then_secant(g, lo, hi, glo, ghi, root_tol);
}

}  // namespace

double log_partition_sum(const OrbitDatabase& db, double a, double b, int n) {
  if (n < 1 || n > db.max_period) throw DomainError("period out of range for this database");
  return TermTable::build(db, n).log_Z(n, a, b);
}

PressureEstimate pressure(const OrbitDatabase& db, double a, double b, int n_cap) {
  const int N = resolve_cap(db, n_cap);
  return TermTable::build(db, N).estimate(a, b);
}

double bowen_root(const OrbitDatabase& db, int which_map, double root_tol, int n_cap) {
  if (which_map != 1 && which_map != 2) throw UsageError("which_map must be 1 or 2");
  return which_map == 1 ? solve_scale(db, 1.0, 0.0, root_tol, n_cap)
                        : solve_scale(db, 0.0, 1.0, root_tol, n_cap);
}

double critical_exponent(const OrbitDatabase& db, double a, double b, double root_tol, int n_cap) {
  if (!(a >= 0.0) || !(b >= 0.0) || a + b <= 0.0)
    throw DomainError("critical_exponent needs a, b >= 0 with a + b > 0");
  return solve_scale(db, a, b, root_tol, n_cap);
}

double gibbs_slope(const OrbitDatabase& db, double a, double b) {
  const int N = db.max_period;
  // divisor-period repetitions alone cannot carry a period-N Gibbs average
  if (db.count_of_period(N) == 0) throw DomainError("no primitive orbits stored at max_period");
  const TermTable t = TermTable::build(db, N);
  const auto& lp = t.logp[N];
  const auto& x1 = t.l1[N];
  const auto& x2 = t.l2[N];
  double shift = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < lp.size(); ++i)
    shift = std::max(shift, lp[i] - a * x1[i] - b * x2[i]);
  double n1 = 0.0, comp1 = 0.0, n2 = 0.0, comp2 = 0.0;
  for (size_t i = 0; i < lp.size(); ++i) {
    const double w = std::exp(lp[i] - a * x1[i] - b * x2[i] - shift);
    double y = w * x1[i] - comp1;
    double s = n1 + y;
    comp1 = (s - n1) - y;
    n1 = s;
    y = w * x2[i] - comp2;
    s = n2 + y;
    comp2 = (s - n2) - y;
    n2 = s;
  }
  return -n1 / n2;
}

CurveSample manhattan_sample(const OrbitDatabase& db, double a, double root_tol) {
  const int N = resolve_cap(db, 0);
  if (!(a >= 0.0)) throw DomainError("manhattan_sample needs a >= 0");
  const TermTable t = TermTable::build(db, N);
  auto g = [&](double b) { return t.estimate(a, b).value; };
  const double g0 = g(0.0);
  CurveSample s;
  s.a = a;
  if (g0 <= root_tol) {
    if (g0 < -root_tol)
      throw DomainError("a exceeds the first Bowen root: no b >= 0 solves the curve equation");
    s.b = 0.0;
    s.pressure_residual = std::abs(g0);
  } else {
    const double rate = min_direction_rate(db, 0.0, 1.0);
    if (!(rate > 0.0)) throw BracketError("map-2 spectrum has non-positive minimal rate");
    double hi = 2.0 * std::log(static_cast<double>(db.d)) / rate;
    double ghi = g(hi);
    for (int grow = 0; ghi >= 0.0 && grow < 8; ++grow) {
      hi *= 2.0;
      ghi = g(hi);
    }
    s.b = bisect_then_secant(g, 0.0, hi, g0, ghi, root_tol);
    s.pressure_residual = std::abs(g(s.b));
  }
  s.slope = gibbs_slope(db, a, s.b);
  return s;
}

std::vector<CurveSample> manhattan_curve(const OrbitDatabase& db, int num_samples,
                                         double root_tol, int threads) {
  if (num_samples < 3) throw UsageError("curve needs at least three samples");
  const double A = bowen_root(db, 1, root_tol);
  const double B = bowen_root(db, 2, root_tol);
  const TermTable t = TermTable::build(db, db.max_period);
  std::vector<CurveSample> out(num_samples);
  detail::parallel_for(
      num_samples, threads,
      [&](std::int64_t begin, std::int64_t end) {
        for (std::int64_t i = begin; i < end; ++i) {
          const double a = A * static_cast<double>(i) / static_cast<double>(num_samples - 1);
          if (i == 0) {
            // endpoint values come straight from the Bowen roots
            CurveSample s;
            s.a = 0.0;
            s.b = B;
            s.slope = gibbs_slope(db, s.a, s.b);
            s.pressure_residual = std::abs(t.estimate(s.a, s.b).value);
            out[i] = s;
          } else if (i == num_samples - 1) {
            CurveSample s;
            s.a = A;
            s.b = 0.0;
            s.slope = gibbs_slope(db, s.a, s.b);
            s.pressure_residual = std::abs(t.estimate(s.a, s.b).value);
            out[i] = s;
          } else {
            out[i] = manhattan_sample(db, a, root_tol);
          }
        }
      },
      /*grain=*/2);
  return out;
}

CorrelationPoint correlation_point(const OrbitDatabase& db, double root_tol) {
  const double A = bowen_root(db, 1, root_tol);
  const double B = bowen_root(db, 2, root_tol);
  auto F = [&](double a) { return a + manhattan_sample(db, a, root_tol).b; };

  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = 0.0, hi = A;
  double x1 = hi - gr * (hi - lo);
  double x2 = lo + gr * (hi - lo);
  double f1 = F(x1);
  double f2 = F(x2);
  while (hi - lo > 1e-6) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = F(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = F(x2);
    }
  }
  const double a_int = 0.5 * (lo + hi);
  const double F_int = std::min(f1, f2);

  CorrelationPoint cp;
  const double F_end = std::min(B, A);  // F(0) = B, F(A) = A
  if (F_end - F_int <= 1e-7) {
    // no interior improvement: proportional marked spectra, the curve is the
    // straight line and a + b is minimized at (one of) the endpoints
    cp.degenerate_line = true;
    if (B <= A) {
      cp.a0 = 0.0;
      cp.b0 = B;
    } else {
      cp.a0 = A;
      cp.b0 = 0.0;
    }
    cp.alpha = cp.a0 + cp.b0;
  } else {
    cp.a0 = a_int;
    cp.b0 = manhattan_sample(db, a_int, root_tol).b;
    cp.alpha = cp.a0 + cp.b0;
  }
  cp.slope_residual = std::abs(gibbs_slope(db, cp.a0, cp.b0) + 1.0);
  return cp;
}

}  // namespace manhattan
