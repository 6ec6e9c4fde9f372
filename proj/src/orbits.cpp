#include "manhattan/orbits.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "parallel.hpp"

namespace manhattan {

namespace {

double residual_floor(double tol, double abs_multiplier) {
  // attainable |f^n(z) - z| in doubles degrades with the multiplier
  const double floor = 32.0 * DBL_EPSILON * (1.0 + abs_multiplier);
  return tol > floor ? tol : floor;
}

std::int64_t checked_point_count(int d, int n, std::int64_t cap) {
  if (d < 2) throw DomainError("degree must be >= 2");
  if (n < 1) throw DomainError("period must be >= 1");
  std::int64_t m = 1;
  for (int j = 0; j < n; ++j) {
    if (m > (cap + 1) / d + 1) throw CapExceededError("d^n - 1 exceeds the seed enumeration cap");
    m *= d;
  }
  if (m - 1 > cap) throw CapExceededError("d^n - 1 exceeds the seed enumeration cap");
  return m - 1;
}

// Roots of f^n(z) = z are continued as whole cycles (z_0, .., z_{L-1}) with
// z_{j+1} = f(z_j) cyclically. Distinct cycles stay O(1) apart in sup norm at
// every period, while individual roots crowd together like d^-n, so cycle
// Newton never slides onto a neighbouring root the way a per-point iteration
// does once the continuation step outruns the root spacing.

struct CycleEval {
  cdouble mult;           // prod_j f'(z_j), the cycle multiplier
  double abs_mult = 0.0;  // |mult|
  double amp = 0.0;       // sum_j prod_{i>j} |f'(z_i)|, residual amplification
  double sup_f = 0.0;     // max_j |f(z_j) - z_{j+1}|
  double sup_z = 0.0;     // max_j |z_j|
  bool ok = false;
};

// Fills f[j] = z_j^d + c - z_{j+1} and m[j] = f'(z_j) and accumulates the
// multiplier and residual-amplification data of the cycle.
CycleEval eval_cycle(int d, cdouble c, std::span<const cdouble> z, std::span<cdouble> f,
                     std::span<cdouble> m) {
  const size_t L = z.size();
  CycleEval e;
  e.mult = cdouble{1.0, 0.0};
  for (size_t j = 0; j < L; ++j) {
    const cdouble zj = z[j];
    if (!(std::norm(zj) <= 1e16)) return e;
    cdouble pw{1.0, 0.0};
    for (int k = 0; k < d - 1; ++k) pw *= zj;
    m[j] = static_cast<double>(d) * pw;
    f[j] = pw * zj + c - z[(j + 1) % L];
    const double am = std::abs(m[j]);
    e.mult *= m[j];
    e.amp = e.amp * am + 1.0;
    e.sup_f = std::max(e.sup_f, std::abs(f[j]));
    e.sup_z = std::max(e.sup_z, std::abs(zj));
  }
  e.abs_mult = std::abs(e.mult);
  e.ok = std::isfinite(e.sup_f) && std::isfinite(e.abs_mult) && std::isfinite(e.amp);
  return e;
}

// Largest acceptable cycle residual. A cycle of length L stands for marked
// points of period n = q * L, whose scalar residual |f^n(z) - z| picks up the
// cycle residual amplified by sum_j prod_{i>j} |f'| over all n steps; keeping
// the cycle residual under residual_floor / (2 amp_n) keeps every marked
// point within the floor the verification pass enforces. The machine term is
// what one evaluation of f can resolve at all.
double cycle_accept(int d, cdouble c, int n, double tol, const CycleEval& e, size_t L) {
  const double q = static_cast<double>(n) / static_cast<double>(L);
  const double P = e.abs_mult;
  const double lam_n = std::pow(P, q);
  const double geom = std::abs(P - 1.0) <= 1e-9 ? q : (lam_n - 1.0) / (P - 1.0);
  const double amp_n = std::max(1.0, e.amp * geom);
  const double scale = 1.0 + std::abs(c) + e.sup_z + std::pow(e.sup_z, d);
  const double machine = std::max(4.0, 2.0 * d) * DBL_EPSILON * scale;
  if (!std::isfinite(lam_n) || !std::isfinite(amp_n)) return machine;
  return std::max(machine, residual_floor(tol, lam_n) / (2.0 * amp_n));
}

// Warm-started Newton on the cycle system at fixed c. The residual is checked
// before the first update, so converged input is returned bitwise unchanged.
// The linearization f'(z_j) dz_j - dz_{j+1} = -f_j is cyclic bidiagonal:
// eliminating around the loop gives dz_0 (1 - mult) = sum_j prod_{i>j} f' f_j,
// and one forward sweep recovers the rest, O(L) per iteration.
bool cycle_newton(int d, cdouble c, int n, double tol, int max_iter, std::vector<cdouble>& z,
                  std::vector<cdouble>& f, std::vector<cdouble>& m) {
  const size_t L = z.size();
  for (int it = 0; it < max_iter; ++it) {
    const CycleEval e = eval_cycle(d, c, z, f, m);
    if (!e.ok) return false;
    if (e.sup_f <= cycle_accept(d, c, n, tol, e, L)) return true;
    const cdouble denom = cdouble{1.0, 0.0} - e.mult;
    if (!(std::abs(denom) > 0.0)) return false;
    cdouble t{0.0, 0.0};
    for (size_t j = 0; j < L; ++j) t = m[j] * t + f[j];
    cdouble dz = t / denom;
    for (size_t j = 0; j < L; ++j) {
      const cdouble carry = m[j] * dz + f[j];
      z[j] += dz;
      if (!(std::norm(z[j]) <= 1e16)) return false;
      dz = carry;
    }
  }
  return false;
}

// Newton continuation of one cycle across the leg a -> b. Steps stay dyadic
// so t accumulates exactly and the final parameter is exactly b.
void track_cycle_leg(int d, int n, cdouble a, cdouble b, double r_bound2,
                     const TrackOptions& opt, std::int64_t seed, std::vector<cdouble>& z,
                     std::vector<cdouble>& z_try, std::vector<cdouble>& f,
                     std::vector<cdouble>& m) {
  const double h0 = 1.0 / opt.initial_segments;
  double t = 0.0;
  double h = h0;
  int depth = 0;
  while (t < 1.0) {
    if (t + h > 1.0) h = 1.0 - t;
    const double tn = t + h;
    const cdouble cn = (tn >= 1.0) ? b : a + tn * (b - a);
    z_try = z;
    bool converged = cycle_newton(d, cn, n, opt.newton_tol, opt.newton_max_iter, z_try, f, m);
    if (converged) {
      for (const cdouble& w : z_try) {
        if (!(std::norm(w) <= r_bound2)) {
          converged = false;
          break;
        }
      }
    }
    if (converged) {
      z.swap(z_try);
      t = tn;
      if (depth > 0) {
        h *= 2.0;
        --depth;
      }
    } else {
      if (++depth > opt.max_halvings) {
        std::ostringstream msg;
        msg << "continuation failed for seed " << seed << " of period " << n << " near c = ("
            << cn.real() << ", " << cn.imag() << ")";
        throw ContinuationError(msg.str(), seed, cn);
      }
      h *= 0.5;
    }
  }
}

// Orbits of the index map k -> k d (mod d^n - 1). Seed k is exp(2 pi i k / M)
// and the power map sends it to seed k d mod M, a relation every continued
// point set inherits, so consecutive entries of one cycle are consecutive
// points of one periodic orbit.
struct CycleIndex {
  std::vector<std::int64_t> order;   // seed indices grouped cycle by cycle
  std::vector<std::int64_t> offset;  // cycle ci spans order[offset[ci] .. offset[ci+1])
};

CycleIndex index_cycles(std::int64_t M, int d) {
  CycleIndex ix;
  ix.order.reserve(static_cast<size_t>(M));
  ix.offset.push_back(0);
  std::vector<bool> seen(static_cast<size_t>(M), false);
  for (std::int64_t k = 0; k < M; ++k) {
    if (seen[static_cast<size_t>(k)]) continue;
    std::int64_t j = k;
    do {
      seen[static_cast<size_t>(j)] = true;
      ix.order.push_back(j);
      j = (j * d) % M;
    } while (j != k);
    ix.offset.push_back(static_cast<std::int64_t>(ix.order.size()));
  }
  return ix;
}

void collision_sweep(std::span<const cdouble> pts, double tol, int n) {
  const std::int64_t N = static_cast<std::int64_t>(pts.size());
  if (N < 2) return;
  std::vector<std::int64_t> ord(N);
  for (std::int64_t i = 0; i < N; ++i) ord[i] = i;
  std::sort(ord.begin(), ord.end(), [&](std::int64_t x, std::int64_t y) {
    if (pts[x].real() != pts[y].real()) return pts[x].real() < pts[y].real();
    return pts[x].imag() < pts[y].imag();
  });
  const double tol2 = tol * tol;
  for (std::int64_t i = 0; i + 1 < N; ++i) {
    for (std::int64_t j = i + 1; j < N && pts[ord[j]].real() - pts[ord[i]].real() <= tol; ++j) {
      if (std::norm(pts[ord[i]] - pts[ord[j]]) <= tol2) {
        std::ostringstream msg;
        msg << "period-" << n << " points " << ord[i] << " and " << ord[j]
            << " collided within point_merge_tol (left the hyperbolic component?)";
        throw CollisionError(msg.str());
      }
    }
  }
}

// index over a point cloud, sorted by real part, for tolerance queries
struct SortedLookup {
  std::span<const cdouble> pts;
  std::vector<std::int64_t> ord;
  std::vector<double> re;

  explicit SortedLookup(std::span<const cdouble> p) : pts(p) {
    const std::int64_t N = static_cast<std::int64_t>(pts.size());
    ord.resize(N);
    for (std::int64_t i = 0; i < N; ++i) ord[i] = i;
    std::sort(ord.begin(), ord.end(), [&](std::int64_t x, std::int64_t y) {
      if (pts[x].real() != pts[y].real()) return pts[x].real() < pts[y].real();
      return pts[x].imag() < pts[y].imag();
    });
    re.resize(N);
    for (std::int64_t i = 0; i < N; ++i) re[i] = pts[ord[i]].real();
  }

  // nearest point within tol satisfying alive(); ties by distance then index
  template <class Alive>
  std::int64_t nearest(cdouble q, double tol, Alive&& alive) const {
    const double tol2 = tol * tol;
    std::int64_t best = -1;
    double best_d2 = 0.0;
    auto it = std::lower_bound(re.begin(), re.end(), q.real() - tol);
    for (auto k = static_cast<std::int64_t>(it - re.begin());
         k < static_cast<std::int64_t>(re.size()) && re[k] <= q.real() + tol; ++k) {
      const std::int64_t i = ord[k];
      if (!alive(i)) continue;
      const double d2 = std::norm(pts[i] - q);
      if (d2 <= tol2 && (best < 0 || d2 < best_d2 || (d2 == best_d2 && i < best))) {
        best = i;
        best_d2 = d2;
      }
    }
    return best;
  }
};

std::vector<int> proper_divisors(int n) {
  std::vector<int> out;
  for (int p = 1; p < n; ++p)
    if (n % p == 0) out.push_back(p);
  return out;
}

constexpr double kExpansionMargin = 1e-3;

}  // namespace

bool VerifyReport::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

std::span<const MarkedOrbit> OrbitDatabase::orbits_of_period(int p) const {
  auto lo = std::lower_bound(orbits.begin(), orbits.end(), p,
                             [](const MarkedOrbit& o, int v) { return o.primitive_period < v; });
  auto hi = std::upper_bound(orbits.begin(), orbits.end(), p,
                             [](int v, const MarkedOrbit& o) { return v < o.primitive_period; });
  return std::span<const MarkedOrbit>(orbits.data() + (lo - orbits.begin()),
                                      static_cast<size_t>(hi - lo));
}

std::int64_t OrbitDatabase::count_of_period(int p) const {
  return static_cast<std::int64_t>(orbits_of_period(p).size());
}

std::vector<cdouble> seeds_at_center(int d, int n, std::int64_t cap) {
  const std::int64_t M = checked_point_count(d, n, cap);
  std::vector<cdouble> seeds(M);
  const double step = 2.0 * std::numbers::pi / static_cast<double>(M);
  for (std::int64_t k = 0; k < M; ++k) seeds[k] = std::polar(1.0, step * static_cast<double>(k));
  return seeds;
}

std::vector<cdouble> track_path(int d, int n, std::span<const cdouble> seeds,
                                std::span<const cdouble> path, const TrackOptions& opt) {
  if (d < 2) throw DomainError("degree must be >= 2");
  if (n < 1) throw DomainError("period must be >= 1");
  if (path.empty()) throw UsageError("parameter path needs at least one waypoint");
  if (opt.initial_segments < 1 || opt.max_halvings < 0 || opt.newton_max_iter < 1)
    throw UsageError("bad continuation options");
  std::vector<cdouble> pts(seeds.begin(), seeds.end());
  const std::int64_t N = static_cast<std::int64_t>(pts.size());
  CycleIndex cycles;  // built on the first moving leg; constant paths skip it
  for (size_t leg = 0; leg + 1 < path.size(); ++leg) {
    const cdouble a = path[leg];
    const cdouble b = path[leg + 1];
    if (a == b) continue;
    if (cycles.order.empty()) {
      std::int64_t expect = 1;
      for (int j = 0; j < n && expect <= N + 1; ++j) expect *= d;
      if (expect - 1 != N) throw UsageError("seed count must be d^n - 1 in seeds_at_center order");
      cycles = index_cycles(N, d);
    }
    const double cmax = std::max(std::abs(a), std::abs(b));
    const double r_leg = std::max(2.0, std::pow(cmax, 1.0 / (d - 1)) + 1.0) + 1e-9;
    const double r_bound2 = r_leg * r_leg;
    const std::int64_t C = static_cast<std::int64_t>(cycles.offset.size()) - 1;
    detail::parallel_for(
        C, opt.threads,
        [&](std::int64_t begin, std::int64_t end) {
          std::vector<cdouble> z, z_try, f, m;
          for (std::int64_t ci = begin; ci < end; ++ci) {
            const std::int64_t lo = cycles.offset[ci];
            const size_t L = static_cast<size_t>(cycles.offset[ci + 1] - lo);
            z.resize(L);
            f.resize(L);
            m.resize(L);
            for (size_t j = 0; j < L; ++j) z[j] = pts[cycles.order[lo + static_cast<std::int64_t>(j)]];
            track_cycle_leg(d, n, a, b, r_bound2, opt, cycles.order[lo], z, z_try, f, m);
            for (size_t j = 0; j < L; ++j) pts[cycles.order[lo + static_cast<std::int64_t>(j)]] = z[j];
          }
        },
        /*grain=*/256);
    collision_sweep(pts, opt.point_merge_tol, n);
  }
  return pts;
}

namespace detail {

PeriodAssembly assemble_period(const OrbitDatabase& db, int n, std::span<const cdouble> pts1,
                               std::span<const cdouble> pts2, double point_merge_tol,
                               double newton_tol) {
  const UnicriticalMap f1 = db.map1();
  const UnicriticalMap f2 = db.map2();
  const std::int64_t N = static_cast<std::int64_t>(pts1.size());
  PeriodAssembly out;

  // regenerate every point of the divisor-period orbits (including excluded
  // ones: holes in the point count would break the grouping below)
  std::vector<cdouble> lower;
  for (int p : proper_divisors(n)) {
    for (const MarkedOrbit& o : db.orbits_of_period(p)) {
      cdouble z = o.z1;
      for (int j = 0; j < p; ++j) {
        lower.push_back(z);
        z = evaluate(f1, z);
      }
    }
    for (const ExcludedMarking& e : db.excluded) {
      if (e.primitive_period != p) continue;
      cdouble z = e.z1;
      for (int j = 0; j < p; ++j) {
        lower.push_back(z);
        z = evaluate(f1, z);
      }
    }
  }

  std::vector<char> consumed(N, 0);
  if (!lower.empty()) {
    SortedLookup lookup(lower);
    for (std::int64_t k = 0; k < N; ++k) {
      if (lookup.nearest(pts1[k], point_merge_tol, [](std::int64_t) { return true; }) >= 0) {
        consumed[k] = 1;
        ++out.matched_lower;
      }
    }
  }
  if (out.matched_lower != static_cast<std::int64_t>(lower.size())) {
    std::ostringstream msg;
    msg << "period " << n << ": " << out.matched_lower << " tracked points matched divisor orbits, expected "
        << lower.size();
    throw InvariantError(msg.str());
  }

  SortedLookup lookup(pts1);
  for (std::int64_t k = 0; k < N; ++k) {
    if (consumed[k]) continue;
    consumed[k] = 1;
    cdouble cur = pts1[k];
    for (int step = 1; step < n; ++step) {
      cur = evaluate(f1, cur);
      const std::int64_t j =
          lookup.nearest(cur, point_merge_tol, [&](std::int64_t i) { return !consumed[i]; });
      if (j < 0) {
        std::ostringstream msg;
        msg << "period " << n << ": orbit grouping failed at seed " << k << " step " << step;
        throw InvariantError(msg.str());
      }
      consumed[j] = 1;
      cur = pts1[j];
    }
    if (std::abs(evaluate(f1, cur) - pts1[k]) > point_merge_tol) {
      std::ostringstream msg;
      msg << "period " << n << ": orbit starting at seed " << k << " did not close";
      throw InvariantError(msg.str());
    }

    const IterateResult it1 = iterate_with_log_derivative(f1, pts1[k], n);
    const IterateResult it2 = iterate_with_log_derivative(f2, pts2[k], n);
    const double r1 = std::abs(it1.z_n - pts1[k]);
    const double r2 = std::abs(it2.z_n - pts2[k]);
    if (it1.log_abs_deriv <= 0.0 || it2.log_abs_deriv <= 0.0) {
      out.excluded.push_back(
          ExcludedMarking{n, Marking{n, k}, pts1[k], pts2[k], it1.log_abs_deriv, it2.log_abs_deriv});
      continue;
    }
    MarkedOrbit o;
    o.primitive_period = n;
    o.marking = Marking{n, k};
    o.z1 = pts1[k];
    o.z2 = pts2[k];
    o.lambda1 = it1.log_abs_deriv;
    o.lambda2 = it2.log_abs_deriv;
    o.residual1 = r1;
    o.residual2 = r2;
    if (r1 > residual_floor(newton_tol, std::exp(o.lambda1)) ||
        r2 > residual_floor(newton_tol, std::exp(o.lambda2))) {
      std::ostringstream msg;
      msg << "period " << n << " orbit at seed " << k << ": residual above tolerance (" << r1
          << ", " << r2 << ")";
      throw InvariantError(msg.str());
    }
    out.orbits.push_back(o);
  }
  return out;
}

}  // namespace detail

OrbitDatabase build_database(const BuildSpec& spec) {
  UnicriticalMap f1{spec.d, spec.c1};
  UnicriticalMap f2{spec.d, spec.c2};
  validate(f1);
  validate(f2);
  if (spec.max_period < 1) throw UsageError("max_period must be >= 1");

  OrbitDatabase db;
  db.d = spec.d;
  db.c1 = spec.c1;
  db.c2 = spec.c2;
  db.max_period = spec.max_period;
  db.newton_tol = spec.config.track.newton_tol;
  db.point_merge_tol = spec.config.track.point_merge_tol;
  db.path1 = spec.path1.empty() ? std::vector<cdouble>{cdouble{0.0, 0.0}, spec.c1} : spec.path1;
  db.path2 = spec.path2.empty() ? std::vector<cdouble>{spec.c1, spec.c2} : spec.path2;
  if (db.path1.size() < 2 || db.path1.front() != cdouble{0.0, 0.0} || db.path1.back() != spec.c1)
    throw UsageError("path1 must run from 0 to c1");
  if (db.path2.size() < 2 || db.path2.front() != spec.c1 || db.path2.back() != spec.c2)
    throw UsageError("path2 must run from c1 to c2");

  db.evidence1 = classify_critical_orbit(f1, spec.config.evidence_budget);
  db.evidence2 = classify_critical_orbit(f2, spec.config.evidence_budget);
  if (db.evidence1.verdict == Verdict::non_hyperbolic_evidence ||
      db.evidence2.verdict == Verdict::non_hyperbolic_evidence)
    throw InvariantError("refusing to build: non-hyperbolic evidence for a parameter");

  for (int n = 1; n <= spec.max_period; ++n) {
    const std::vector<cdouble> seeds = seeds_at_center(spec.d, n, spec.config.seed_cap);
    const std::vector<cdouble> pts1 = track_path(spec.d, n, seeds, db.path1, spec.config.track);
    const std::vector<cdouble> pts2 = track_path(spec.d, n, pts1, db.path2, spec.config.track);
    detail::PeriodAssembly a = detail::assemble_period(db, n, pts1, pts2, db.point_merge_tol,
                                                       db.newton_tol);
    const std::int64_t fresh =
        static_cast<std::int64_t>(a.orbits.size() + a.excluded.size()) * n;
    if (a.matched_lower + fresh != static_cast<std::int64_t>(seeds.size())) {
      std::ostringstream msg;
      msg << "period " << n << ": point bookkeeping mismatch (" << a.matched_lower << " + " << fresh
          << " != " << seeds.size() << ")";
      throw InvariantError(msg.str());
    }
    db.orbits.insert(db.orbits.end(), a.orbits.begin(), a.orbits.end());
    db.excluded.insert(db.excluded.end(), a.excluded.begin(), a.excluded.end());
  }

  VerifyReport report = verify_database(db);
  if (!report.all_pass()) {
    std::string names;
    for (const auto& c : report.checks)
      if (!c.pass) names += (names.empty() ? "" : ", ") + c.name + " (" + c.detail + ")";
    throw InvariantError("database failed verification: " + names);
  }
  return db;
}

VerifyReport verify_database(OrbitDatabase& db) {
  VerifyReport rep;
  auto add = [&rep](const std::string& name, bool pass, const std::string& detail) {
    rep.checks.push_back(CheckResult{name, pass, detail});
  };

  {
    bool ok = db.format_version == 1 && db.d >= 2 && db.max_period >= 1 &&
              db.path1.size() >= 2 && db.path2.size() >= 2 &&
              db.path1.front() == cdouble{0.0, 0.0} && db.path1.back() == db.c1 &&
              db.path2.front() == db.c1 && db.path2.back() == db.c2 && db.newton_tol > 0 &&
              db.point_merge_tol > 0;
    add("header", ok, ok ? "format, degree, paths, tolerances" : "malformed header fields");
  }

  {
    bool sorted = true;
    bool marks = true;
    for (size_t i = 0; i < db.orbits.size(); ++i) {
      const MarkedOrbit& o = db.orbits[i];
      if (i > 0) {
        const MarkedOrbit& q = db.orbits[i - 1];
        if (q.primitive_period > o.primitive_period ||
            (q.primitive_period == o.primitive_period &&
             q.marking.seed_index >= o.marking.seed_index))
          sorted = false;
      }
      std::int64_t M = 1;
      bool over = false;
      for (int j = 0; j < o.marking.period; ++j) {
        M *= db.d;
        if (M > (std::int64_t(1) << 62) / db.d) { over = true; break; }
      }
      if (o.primitive_period < 1 || o.primitive_period > db.max_period ||
          o.marking.period != o.primitive_period || o.marking.seed_index < 0 ||
          (!over && o.marking.seed_index > M - 2))
        marks = false;
    }
    add("ordering", sorted, sorted ? "orbits sorted by (period, seed)" : "orbit order broken");
    add("markings", marks, marks ? "marking ranges valid" : "marking out of range");
  }

  {
    bool ok = true;
    std::string detail;
    double worst = 0.0;
    for (const MarkedOrbit& o : db.orbits) {
      IterateResult i1, i2;
      try {
        i1 = iterate_with_log_derivative(db.map1(), o.z1, o.primitive_period);
        i2 = iterate_with_log_derivative(db.map2(), o.z2, o.primitive_period);
      } catch (const NumericError&) {
        ok = false;
        detail = "stored point escaped or hit the critical point";
        break;
      }
      const double r1 = std::abs(i1.z_n - o.z1);
      const double r2 = std::abs(i2.z_n - o.z2);
      worst = std::max({worst, r1, r2});
      if (r1 > residual_floor(db.newton_tol, std::exp(i1.log_abs_deriv)) ||
          r2 > residual_floor(db.newton_tol, std::exp(i2.log_abs_deriv))) {
        ok = false;
        detail = "orbit (" + std::to_string(o.primitive_period) + ", " +
                 std::to_string(o.marking.seed_index) + ") residual " + std::to_string(std::max(r1, r2));
        break;
      }
      if (std::abs(i1.log_abs_deriv - o.lambda1) > 1e-9 ||
          std::abs(i2.log_abs_deriv - o.lambda2) > 1e-9 || o.lambda1 <= 0.0 || o.lambda2 <= 0.0) {
        ok = false;
        detail = "orbit (" + std::to_string(o.primitive_period) + ", " +
                 std::to_string(o.marking.seed_index) + ") multiplier mismatch";
        break;
      }
    }
    if (ok) detail = "worst recomputed residual " + std::to_string(worst);
    add("residuals", ok, detail);
  }

  {
    bool ok = true;
    std::string detail = "sum(p * count(p)) over p | n equals d^n - 1 for every n";
    for (int n = 1; n <= db.max_period && ok; ++n) {
      std::int64_t M = 1;
      for (int j = 0; j < n; ++j) M *= db.d;
      std::int64_t acc = 0;
      for (int p = 1; p <= n; ++p) {
        if (n % p != 0) continue;
        std::int64_t cnt = db.count_of_period(p);
        for (const ExcludedMarking& e : db.excluded)
          if (e.primitive_period == p) ++cnt;
        acc += static_cast<std::int64_t>(p) * cnt;
      }
      if (acc != M - 1) {
        ok = false;
        detail = "period " + std::to_string(n) + ": " + std::to_string(acc) + " != " +
                 std::to_string(M - 1);
      }
    }
    add("orbit-counts", ok, detail);
  }

  {
    // no two orbits of the same primitive period may share a point; layers of
    // different periods are not compared, since genuinely distinct points of
    // coprime-order layers crowd below any fixed tolerance at high periods
    bool ok = true;
    std::int64_t total = 0;
    std::string detail;
    for (int n = 1; n <= db.max_period && ok; ++n) {
      std::vector<cdouble> layer;
      for (const MarkedOrbit& o : db.orbits_of_period(n)) {
        cdouble z = o.z1;
        for (int j = 0; j < n; ++j) {
          layer.push_back(z);
          z = evaluate(db.map1(), z);
        }
      }
      total += static_cast<std::int64_t>(layer.size());
      try {
        collision_sweep(layer, db.point_merge_tol, n);
      } catch (const CollisionError& e) {
        ok = false;
        detail = e.what();
      }
    }
    if (ok) detail = std::to_string(total) + " points pairwise distinct within each period";
    add("distinct-points", ok, detail);
  }

  {
    double r1 = std::numeric_limits<double>::infinity();
    double r2 = r1;
    for (const MarkedOrbit& o : db.orbits) {
      r1 = std::min(r1, o.lambda1 / o.primitive_period);
      r2 = std::min(r2, o.lambda2 / o.primitive_period);
    }
    db.evidence1.min_expansion_rate = db.orbits.empty() ? std::numeric_limits<double>::quiet_NaN() : r1;
    db.evidence2.min_expansion_rate = db.orbits.empty() ? std::numeric_limits<double>::quiet_NaN() : r2;
    bool ok = !db.orbits.empty() && r1 > kExpansionMargin && r2 > kExpansionMargin;
    if (!ok) {
      auto downgrade = [](HyperbolicityEvidence& ev) {
        if (ev.verdict == Verdict::hyperbolic_evidence)
          ev.verdict = std::isfinite(ev.min_expansion_rate) && ev.min_expansion_rate <= 0.0
                           ? Verdict::non_hyperbolic_evidence
                           : Verdict::inconclusive;
      };
      downgrade(db.evidence1);
      downgrade(db.evidence2);
    }
    add("expansion", ok,
        ok ? "min rates " + std::to_string(r1) + ", " + std::to_string(r2)
           : "expansion rate at or below margin; verdicts downgraded");
  }

  return rep;
}

OrbitDatabase truncated(const OrbitDatabase& db, int max_period) {
  if (max_period < 1 || max_period > db.max_period)
    throw UsageError("truncation period out of range");
  OrbitDatabase out = db;
  out.max_period = max_period;
  out.orbits.clear();
  out.excluded.clear();
  for (const MarkedOrbit& o : db.orbits)
    if (o.primitive_period <= max_period) out.orbits.push_back(o);
  for (const ExcludedMarking& e : db.excluded)
    if (e.primitive_period <= max_period) out.excluded.push_back(e);
  if (!verify_database(out).all_pass())
    throw InvariantError("truncated database failed verification");
  return out;
}

}  // namespace manhattan
