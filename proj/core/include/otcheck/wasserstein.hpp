#pragma once

#include <cstdint>
#include <vector>

#include "otcheck/grid.hpp"

namespace otcheck {

/// Default cap on source x sink cell pairs for the exact solver.
inline constexpr std::size_t kDefaultMaxPairs =
    std::size_t{4096} * std::size_t{4096};

/// Relative tolerance on total masses before transport problems are rejected.
inline constexpr double kMassMatchTol = 1e-9;

/// Sparse nonnegative measure on cell pairs. Entries are kept sorted by
/// (row, col) with duplicates merged, so costs and marginals accumulate in a
/// fixed order.
class Coupling {
 public:
  struct Entry {
    std::uint32_t row;
    std::uint32_t col;
    double mass;
  };

  Coupling(DomainPtr row_domain, DomainPtr col_domain,
           std::vector<Entry> entries);

  const DomainPtr& row_domain() const { return row_domain_; }
  const DomainPtr& col_domain() const { return col_domain_; }
  const std::vector<Entry>& entries() const { return entries_; }

  /// Per-cell masses of the first (row) marginal.
  std::vector<double> row_marginal() const;
  /// Per-cell masses of the second (col) marginal.
  std::vector<double> col_marginal() const;

 private:
  DomainPtr row_domain_;
  DomainPtr col_domain_;
  std::vector<Entry> entries_;
};

/// Transport cost I[pi] = sum of squared geodesic distance times pair mass.
double coupling_cost(const Coupling& pi);

/// Coupling supported on the diagonal with both marginals equal to m.
Coupling diag_coupling(const Density& m);

/// rho * pi + diag(mu' - rho * mu), where mu is pi's row marginal. Requires
/// mu' >= rho * mu cell-wise; the result couples mu' with mu' + rho*(nu - mu)
/// at exactly rho times pi's cost.
Coupling lemma_coupling_transform(const Coupling& pi, const Density& mu_prime,
                                  double rho);

/// Quadratic Wasserstein distance between two measures on a common 1-D
/// interval grid, computed exactly from the merged quantile breakpoints of
/// the piecewise-constant densities. Ties in CDF inversion resolve by the
/// left-continuous pseudo-inverse.
double w2_1d(const Density& mu, const Density& nu);

struct TransportStats {
  int pivots = 0;
  std::size_t sources = 0;
  std::size_t sinks = 0;
  std::size_t basis_size = 0;
};

struct W2Result {
  double value = 0.0;
  Coupling plan;
  TransportStats stats;
};

/// Exact W2 in any dimension: the balanced transportation problem with
/// squared-distance costs solved to LP optimality by network simplex
/// (Dantzig pricing with a Bland anti-cycling fallback). Returns the distance
/// (square root of the optimal cost) and an optimal coupling.
W2Result w2_exact(const Density& mu, const Density& nu,
                  std::size_t max_pairs = kDefaultMaxPairs);

}  // namespace otcheck
