#include "otcheck/interpolation.hpp"

#include <algorithm>
#include <cmath>

namespace otcheck {

std::vector<double> default_path_times() {
  std::vector<double> ts(17);
  for (int k = 0; k <= 16; ++k) ts[k] = static_cast<double>(k) / 16.0;
  return ts;
}

namespace {

void check_times(std::span<const double> ts) {
  if (ts.empty()) throw InvalidArgument("measure path: empty time list");
  for (double t : ts) {
    if (!(t >= 0.0 && t <= 1.0)) {
      throw InvalidArgument("measure path: t outside [0, 1]");
    }
  }
}

void check_pair(const Density& mu, const Density& nu, const char* what) {
  if (!mu.domain()->same_geometry(*nu.domain())) {
    throw DomainMismatch(std::string(what) + ": measures on different grids");
  }
  const double ma = total_mass(mu);
  const double mb = total_mass(nu);
  if (std::abs(ma - mb) > kMassMatchTol * std::max({ma, mb, 1e-300})) {
    throw MassMismatch(std::string(what) + ": total masses differ");
  }
}

}  // namespace

MeasurePath linear_path(const Density& mu, const Density& nu,
                        std::span<const double> ts) {
  check_pair(mu, nu, "linear_path");
  check_times(ts);
  MeasurePath path{PathKind::Linear, mu, nu, {}};
  path.samples.reserve(ts.size());
  for (double t : ts) {
    const double one_minus_t = 1.0 - t;
    std::vector<double> v(mu.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i] = one_minus_t * mu.value(i) + t * nu.value(i);
    }
    path.samples.push_back({t, Density(mu.domain(), std::move(v))});
  }
  return path;
}

namespace {

// One maximal interval of mass on which both quantile functions are affine.
struct QuantileSegment {
  double mass;
  double xa0, xa1;  // mu quantile at segment ends
  double xb0, xb1;  // nu quantile at segment ends
};

std::vector<QuantileSegment> merged_segments(const Density& mu,
                                             const Density& nu) {
  const double h = mu.domain()->spacing(0);
  const double ma = total_mass(mu);
  const double mb = total_mass(nu);
  const double rescale = (mb > 0.0) ? ma / mb : 1.0;

  struct Cell {
    double cum0, cum1, x_left, density;
  };
  const auto collect = [h](const Density& d, double scale) {
    std::vector<Cell> cells;
    double cum = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double rho = d.value(i) * scale;
      if (rho > 0.0) {
        cells.push_back({cum, cum + rho * h, static_cast<double>(i) * h, rho});
        cum += rho * h;
      }
    }
    return cells;
  };
  const auto a = collect(mu, 1.0);
  const auto b = collect(nu, rescale);

  std::vector<QuantileSegment> segs;
  std::size_t ia = 0, ib = 0;
  double s = 0.0;
  while (ia < a.size() && ib < b.size()) {
    const double e = std::min(a[ia].cum1, b[ib].cum1);
    if (e > s) {
      const auto& ca = a[ia];
      const auto& cb = b[ib];
      segs.push_back({e - s,
                      ca.x_left + (s - ca.cum0) / ca.density,
                      ca.x_left + (e - ca.cum0) / ca.density,
                      cb.x_left + (s - cb.cum0) / cb.density,
                      cb.x_left + (e - cb.cum0) / cb.density});
      s = e;
    }
    if (e >= a[ia].cum1) ++ia;
    if (e >= b[ib].cum1) ++ib;
  }
  return segs;
}

// Deposit mass spread uniformly over [y0, y1] into the cells it covers.
void deposit_interval(const GridDomain& g, std::vector<double>& values,
                      double y0, double y1, double mass) {
  const double h = g.spacing(0);
  const double L = g.extents()[0];
  const auto n = static_cast<long>(g.cells()[0]);
  const double len = y1 - y0;
  if (!(len > 0.0)) {
    const double mid = std::clamp(0.5 * (y0 + y1), 0.0, L);
    const std::size_t cell = g.locate(std::span<const double>(&mid, 1));
    values[cell] += mass / g.cell_volume();
    return;
  }
  const long k0 = std::clamp(static_cast<long>(std::floor(y0 / h)), 0L, n - 1);
  const long k1 = std::clamp(static_cast<long>(std::floor(y1 / h)), 0L, n - 1);
  for (long k = k0; k <= k1; ++k) {
    const double lo = std::max(y0, static_cast<double>(k) * h);
    const double hi = std::min(y1, static_cast<double>(k + 1) * h);
    if (hi > lo) {
      values[static_cast<std::size_t>(k)] +=
          mass * (hi - lo) / len / g.cell_volume();
    }
  }
}

MeasurePath displacement_path_quantile(const Density& mu, const Density& nu,
                                       std::span<const double> ts) {
  const GridDomain& g = *mu.domain();
  const auto segs = merged_segments(mu, nu);
  MeasurePath path{PathKind::Displacement, mu, nu, {}};
  path.samples.reserve(ts.size());
  for (double t : ts) {
    std::vector<double> v(g.cell_count(), 0.0);
    for (const auto& seg : segs) {
      const double y0 = (1.0 - t) * seg.xa0 + t * seg.xb0;
      const double y1 = (1.0 - t) * seg.xa1 + t * seg.xb1;
      deposit_interval(g, v, y0, y1, seg.mass);
    }
    path.samples.push_back({t, Density(mu.domain(), std::move(v))});
  }
  return path;
}

MeasurePath displacement_path_coupling(const Density& mu, const Density& nu,
                                       std::span<const double> ts,
                                       std::size_t max_pairs) {
  const GridDomain& g = *mu.domain();
  const W2Result ot = w2_exact(mu, nu, max_pairs);
  const int dims = g.dims();
  std::vector<double> delta(dims), point(dims), start(dims);

  MeasurePath path{PathKind::Displacement, mu, nu, {}};
  path.samples.reserve(ts.size());
  for (double t : ts) {
    std::vector<double> v(g.cell_count(), 0.0);
    for (const auto& e : ot.plan.entries()) {
      g.displacement(e.row, e.col, delta);
      std::size_t rest = e.row;
      for (int a = dims - 1; a >= 0; --a) {
        const auto na = static_cast<std::size_t>(g.cells()[a]);
        start[a] = g.center(a, static_cast<int>(rest % na));
        rest /= na;
      }
      for (int a = 0; a < dims; ++a) point[a] = start[a] + t * delta[a];
      v[g.locate(point)] += e.mass / g.cell_volume();
    }
    path.samples.push_back({t, Density(mu.domain(), std::move(v))});
  }
  return path;
}

}  // namespace

MeasurePath displacement_path(const Density& mu, const Density& nu,
                              std::span<const double> ts,
                              std::size_t max_pairs) {
  check_pair(mu, nu, "displacement_path");
  check_times(ts);
  if (mu.domain()->boundary() == Boundary::Interval) {
    return displacement_path_quantile(mu, nu, ts);
  }
  return displacement_path_coupling(mu, nu, ts, max_pairs);
}

std::vector<BoundAuditRow> density_bound_audit(const MeasurePath& path,
                                               double rho0, double rho1,
                                               double bin_tol) {
  if (!(rho0 > 0.0 && rho1 > 0.0)) {
    throw InvalidArgument("density_bound_audit: bounds must be positive");
  }
  if (sup_density(path.mu) > rho0 || sup_density(path.nu) > rho1) {
    throw HypothesisViolated(
        "density_bound_audit: endpoint sup density exceeds its stated bound");
  }
  std::vector<BoundAuditRow> rows;
  rows.reserve(path.samples.size());
  for (const auto& s : path.samples) {
    const double bound = std::pow(rho0, 1.0 - s.t) * std::pow(rho1, s.t);
    const double sup = sup_density(s.density);
    rows.push_back({s.t, sup, bound, sup > bound * (1.0 + bin_tol)});
  }
  return rows;
}

std::vector<BoundAuditRow> density_bound_audit(const MeasurePath& path,
                                               double rho0, double rho1) {
  const auto& cells = path.mu.domain()->cells();
  const int max_cells = *std::max_element(cells.begin(), cells.end());
  return density_bound_audit(path, rho0, rho1, 10.0 / max_cells);
}

double refined_density_bound(int n, double t, double rho0, double rho1) {
  if (n < 1) throw InvalidArgument("refined_density_bound: dimension must be >= 1");
  if (!(rho0 > 0.0 && rho1 > 0.0)) {
    throw InvalidArgument("refined_density_bound: densities must be positive");
  }
  if (!(t >= 0.0 && t <= 1.0)) {
    throw InvalidArgument("refined_density_bound: t outside [0, 1]");
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  const double mix =
      (1.0 - t) * std::pow(rho0, -inv_n) + t * std::pow(rho1, -inv_n);
  return std::pow(mix, -static_cast<double>(n));
}

}  // namespace otcheck
