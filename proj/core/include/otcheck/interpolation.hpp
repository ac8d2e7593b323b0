#pragma once

#include <span>
#include <vector>

#include "otcheck/grid.hpp"
#include "otcheck/wasserstein.hpp"

namespace otcheck {

enum class PathKind { Linear, Displacement };

struct PathSample {
  double t;
  Density density;
};

/// A family (mu_t) of equal-mass measures sampled at the requested times.
struct MeasurePath {
  PathKind kind;
  Density mu;
  Density nu;
  std::vector<PathSample> samples;
};

/// Times {k/16 : k = 0..16}.
std::vector<double> default_path_times();

/// Cell-wise convex combination (1-t) mu + t nu. Samples dominate the scaled
/// endpoint exactly: mu_t >= (1-t) mu holds cell by cell with no tolerance.
MeasurePath linear_path(const Density& mu, const Density& nu,
                        std::span<const double> ts);

/// Geodesic (displacement) interpolation. On a 1-D interval, mass moves along
/// x -> (1-t) x + t T(x) with T the monotone quantile map, realized exactly
/// segment by segment in quantile space and then deposited into cells. On a
/// torus, every optimal-coupling atom travels the minimizing geodesic
/// (lexicographically smallest displacement on antipodal ties) and lands in
/// the containing cell.
MeasurePath displacement_path(const Density& mu, const Density& nu,
                              std::span<const double> ts,
                              std::size_t max_pairs = kDefaultMaxPairs);

struct BoundAuditRow {
  double t;
  double sup;
  double bound;
  bool violated;
};

/// For each sample, compare sup density against rho0^(1-t) rho1^t and flag
/// excesses beyond bin_tol (relative). Endpoint sups must obey the stated
/// bounds or HypothesisViolated is thrown.
std::vector<BoundAuditRow> density_bound_audit(const MeasurePath& path,
                                               double rho0, double rho1,
                                               double bin_tol);

/// Audit with the default binning tolerance 10 / (max cells per axis).
std::vector<BoundAuditRow> density_bound_audit(const MeasurePath& path,
                                               double rho0, double rho1);

/// Dimension-aware interpolation bound
/// ((1-t) rho0^(-1/n) + t rho1^(-1/n))^(-n); never exceeds the geometric
/// bound rho0^(1-t) rho1^t.
double refined_density_bound(int n, double t, double rho0, double rho1);

}  // namespace otcheck
