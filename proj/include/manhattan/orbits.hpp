#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "manhattan/maps.hpp"

namespace manhattan {

// (period, seed_index) names the Julia fixed point of f^period that is the
// continuation of exp(2*pi*i*seed_index / (d^period - 1)) from c = 0.
struct Marking {
  int period = 0;
  std::int64_t seed_index = 0;

  friend bool operator==(const Marking&, const Marking&) = default;
};

// One primitive periodic orbit of the pair (f1, f2), carried by the marked
// conjugacy. z1/z2 are the representative points (the member with the least
// seed index), lambda1/lambda2 the log multiplier moduli log|(f_i^p)'(z_i)|.
struct MarkedOrbit {
  int primitive_period = 0;
  Marking marking;
  cdouble z1{0.0, 0.0};
  cdouble z2{0.0, 0.0};
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double residual1 = 0.0;
  double residual2 = 0.0;
};

// Orbit that continued into a non-repelling cycle (lambda~ <= 0 for one of
// the maps); kept out of the spectrum but recorded so period counts close.
// Representative points are kept so divisor-period matching still works.
struct ExcludedMarking {
  int primitive_period = 0;
  Marking marking;
  cdouble z1{0.0, 0.0};
  cdouble z2{0.0, 0.0};
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

struct TrackOptions {
  double newton_tol = 1e-11;
  double point_merge_tol = 1e-7;
  int initial_segments = 32;
  int max_halvings = 20;
  int newton_max_iter = 50;
  int threads = 1;
};

struct BuildConfig {
  TrackOptions track;
  std::int64_t seed_cap = std::int64_t(1) << 24;
  int evidence_budget = 10000;
  double expansion_margin = 1e-3;
};

struct OrbitDatabase {
  int format_version = 1;
  int d = 2;
  cdouble c1{0.0, 0.0};
  cdouble c2{0.0, 0.0};
  std::vector<cdouble> path1;  // c = 0 -> c1 waypoints
  std::vector<cdouble> path2;  // c1 -> c2 waypoints
  int max_period = 0;
  double newton_tol = 1e-11;
  double point_merge_tol = 1e-7;
  HyperbolicityEvidence evidence1;
  HyperbolicityEvidence evidence2;
  // sorted by (primitive_period, marking.seed_index)
  std::vector<MarkedOrbit> orbits;
  std::vector<ExcludedMarking> excluded;

  UnicriticalMap map1() const { return UnicriticalMap{d, c1}; }
  UnicriticalMap map2() const { return UnicriticalMap{d, c2}; }
  // contiguous range of orbits with the given primitive period
  std::span<const MarkedOrbit> orbits_of_period(int p) const;
  std::int64_t count_of_period(int p) const;
};

struct BuildSpec {
  int d = 2;
  cdouble c1{0.0, 0.0};
  cdouble c2{0.0, 0.0};
  int max_period = 0;
  std::vector<cdouble> path1;  // default: straight line 0 -> c1
  std::vector<cdouble> path2;  // default: straight line c1 -> c2
  BuildConfig config;
};

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool all_pass() const;
};

// The d^n - 1 points exp(2*pi*i*k/(d^n - 1)), k = 0 .. d^n - 2: the period-n
// points of z -> z^d on the unit circle (period dividing n, counted with
// the fixed point of z^d excluded at the origin's place, i.e. all Julia
// fixed points of the n-fold power map).
std::vector<cdouble> seeds_at_center(int d, int n, std::int64_t cap = std::int64_t(1) << 24);

// Newton continuation of every seed along a parameter path given as waypoints
// (piecewise linear in c). Seeds must be a full period-n point set in
// seeds_at_center order, where f sends the point in slot k to the point in
// slot k*d mod (d^n - 1); continuation follows whole cycles of that index map
// at once, which keeps Newton locked to its orbit even at periods where
// neighbouring roots of f^n(z) = z sit closer together than one continuation
// step moves them. Returns the continued points in seed order.
std::vector<cdouble> track_path(int d, int n, std::span<const cdouble> seeds,
                                std::span<const cdouble> path, const TrackOptions& opt = {});

// Full pipeline: classify both parameters, track every period up to
// max_period along path1 then path2, deduplicate divisor periods, group into
// primitive orbits, compute multipliers, check invariants.
OrbitDatabase build_database(const BuildSpec& spec);

// Recomputes residuals and multipliers from the stored points, re-checks all
// database invariants, installs min_expansion_rate into the evidence records.
VerifyReport verify_database(OrbitDatabase& db);

// Copy containing only orbits of primitive period <= max_period.
OrbitDatabase truncated(const OrbitDatabase& db, int max_period);

namespace detail {

struct PeriodAssembly {
  std::vector<MarkedOrbit> orbits;  // primitive period == n, in marking order
  std::vector<ExcludedMarking> excluded;
  std::int64_t matched_lower = 0;   // points attributed to divisor periods
};

// Splits the period-n tracked points (seed_index == position) into
// lower-period matches, fresh primitive orbits, and excluded (non-repelling)
// orbits. `db` supplies the already-assembled orbits of periods p | n, p < n.
PeriodAssembly assemble_period(const OrbitDatabase& db, int n,
                               std::span<const cdouble> pts1,
                               std::span<const cdouble> pts2,
                               double point_merge_tol, double newton_tol);

}  // namespace detail

}  // namespace manhattan
