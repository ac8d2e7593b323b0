#include "otcheck/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "otcheck/rng.hpp"

namespace otcheck {

GridDomain::GridDomain(std::vector<int> cells, std::vector<double> extents,
                       Boundary boundary)
    : cells_(std::move(cells)), extents_(std::move(extents)),
      boundary_(boundary) {
  if (cells_.empty() || cells_.size() != extents_.size()) {
    throw InvalidArgument("grid: cells and extents must be nonempty and match");
  }
  if (boundary_ == Boundary::Interval && cells_.size() != 1) {
    throw InvalidArgument("grid: interval boundary requires dims == 1");
  }
  cell_volume_ = 1.0;
  cell_count_ = 1;
  spacing_.resize(cells_.size());
  for (std::size_t a = 0; a < cells_.size(); ++a) {
    if (cells_[a] <= 0) throw InvalidArgument("grid: cell counts must be positive");
    if (!(extents_[a] > 0.0)) throw InvalidArgument("grid: extents must be positive");
    spacing_[a] = extents_[a] / static_cast<double>(cells_[a]);
    cell_volume_ *= spacing_[a];
    cell_count_ *= static_cast<std::size_t>(cells_[a]);
  }
}

std::size_t GridDomain::flat_index(std::span<const int> multi) const {
  std::size_t flat = 0;
  for (std::size_t a = 0; a < cells_.size(); ++a) {
    if (multi[a] < 0 || multi[a] >= cells_[a]) {
      throw InvalidArgument("grid: index out of range");
    }
    flat = flat * static_cast<std::size_t>(cells_[a]) +
           static_cast<std::size_t>(multi[a]);
  }
  return flat;
}

void GridDomain::unflatten(std::size_t flat, std::span<int> multi) const {
  for (std::size_t a = cells_.size(); a-- > 0;) {
    auto n = static_cast<std::size_t>(cells_[a]);
    multi[a] = static_cast<int>(flat % n);
    flat /= n;
  }
}

double GridDomain::axis_delta(int axis, double raw) const {
  if (boundary_ == Boundary::Interval) return raw;
  const double L = extents_[axis];
  // Wrap into [-L/2, L/2). An exact antipodal tie lands on -L/2, the
  // lexicographically smallest of the two minimizers.
  double d = std::remainder(raw, L);  // (-L/2, L/2], ties to even
  if (d >= 0.5 * L) d -= L;
  if (d < -0.5 * L) d += L;
  if (d == 0.5 * L) d = -0.5 * L;
  return d;
}

void GridDomain::displacement(std::size_t i, std::size_t j,
                              std::span<double> out) const {
  if (i >= cell_count_ || j >= cell_count_) {
    throw InvalidArgument("grid: cell index out of range");
  }
  for (std::size_t a = cells_.size(); a-- > 0;) {
    auto n = static_cast<std::size_t>(cells_[a]);
    auto ia = static_cast<double>(i % n);
    auto ja = static_cast<double>(j % n);
    i /= n;
    j /= n;
    out[a] = axis_delta(static_cast<int>(a), (ja - ia) * spacing_[a]);
  }
}

void GridDomain::displacement_to_point(std::size_t i,
                                       std::span<const double> point,
                                       std::span<double> out) const {
  if (i >= cell_count_) throw InvalidArgument("grid: cell index out of range");
  for (std::size_t a = cells_.size(); a-- > 0;) {
    auto n = static_cast<std::size_t>(cells_[a]);
    const double ca = center(static_cast<int>(a), static_cast<int>(i % n));
    i /= n;
    out[a] = axis_delta(static_cast<int>(a), point[a] - ca);
  }
}

double GridDomain::geodesic_distance_sq(std::size_t i, std::size_t j) const {
  if (i >= cell_count_ || j >= cell_count_) {
    throw InvalidArgument("grid: cell index out of range");
  }
  double sum = 0.0;
  for (std::size_t a = cells_.size(); a-- > 0;) {
    auto n = static_cast<std::size_t>(cells_[a]);
    auto ia = static_cast<double>(i % n);
    auto ja = static_cast<double>(j % n);
    i /= n;
    j /= n;
    const double d = axis_delta(static_cast<int>(a), (ja - ia) * spacing_[a]);
    sum += d * d;
  }
  return sum;
}

double GridDomain::geodesic_distance(std::size_t i, std::size_t j) const {
  return std::sqrt(geodesic_distance_sq(i, j));
}

std::size_t GridDomain::locate(std::span<const double> point) const {
  std::size_t flat = 0;
  for (std::size_t a = 0; a < cells_.size(); ++a) {
    double x = point[a];
    const double L = extents_[a];
    if (boundary_ == Boundary::Torus) {
      x -= L * std::floor(x / L);  // wrap into [0, L)
      if (x >= L) x = 0.0;         // guard against floor rounding at L
    } else {
      x = std::clamp(x, 0.0, L);
    }
    auto k = static_cast<long>(std::floor(x / spacing_[a]));
    k = std::clamp(k, 0L, static_cast<long>(cells_[a]) - 1L);
    flat = flat * static_cast<std::size_t>(cells_[a]) + static_cast<std::size_t>(k);
  }
  return flat;
}

bool GridDomain::same_geometry(const GridDomain& other) const {
  return boundary_ == other.boundary_ && cells_ == other.cells_ &&
         extents_ == other.extents_;
}

DomainPtr make_interval(int cells, double extent) {
  return std::make_shared<GridDomain>(std::vector<int>{cells},
                                      std::vector<double>{extent},
                                      Boundary::Interval);
}

DomainPtr make_torus(std::vector<int> cells, std::vector<double> extents) {
  return std::make_shared<GridDomain>(std::move(cells), std::move(extents),
                                      Boundary::Torus);
}

namespace detail {
void check_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidArgument(std::string(what) + ": non-finite value");
  }
}
}  // namespace detail

static void check_size(const DomainPtr& d, const std::vector<double>& v,
                       const char* what) {
  if (!d) throw InvalidArgument(std::string(what) + ": null domain");
  if (v.size() != d->cell_count()) {
    throw InvalidArgument(std::string(what) + ": value count does not match grid");
  }
}

Density::Density(DomainPtr domain, std::vector<double> values)
    : domain_(std::move(domain)), values_(std::move(values)) {
  check_size(domain_, values_, "density");
  detail::check_finite(values_, "density");
  for (double v : values_) {
    if (v < 0.0) throw InvalidArgument("density: negative value");
  }
}

SignedDensity::SignedDensity(DomainPtr domain, std::vector<double> values)
    : domain_(std::move(domain)), values_(std::move(values)) {
  check_size(domain_, values_, "signed density");
  detail::check_finite(values_, "signed density");
}

ScalarField::ScalarField(DomainPtr domain, std::vector<double> values)
    : domain_(std::move(domain)), values_(std::move(values)) {
  check_size(domain_, values_, "scalar field");
  detail::check_finite(values_, "scalar field");
}

double total_mass(const Density& m) {
  double sum = 0.0;
  for (double v : m.values()) sum += v;
  return sum * m.domain()->cell_volume();
}

double sup_density(const Density& m) {
  double sup = 0.0;
  for (double v : m.values()) sup = std::max(sup, v);
  return sup;
}

double integral(const SignedDensity& s) {
  double sum = 0.0;
  for (double v : s.values()) sum += v;
  return sum * s.domain()->cell_volume();
}

double total_variation(const SignedDensity& s) {
  double sum = 0.0;
  for (double v : s.values()) sum += std::abs(v);
  return sum * s.domain()->cell_volume();
}

SignedDensity difference(const Density& nu, const Density& mu) {
  if (!nu.domain()->same_geometry(*mu.domain())) {
    throw DomainMismatch("difference: measures live on different grids");
  }
  std::vector<double> v(nu.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = nu.value(i) - mu.value(i);
  return {nu.domain(), std::move(v)};
}

Density perturb(const Density& mu, const SignedDensity& sigma, double t) {
  if (!mu.domain()->same_geometry(*sigma.domain())) {
    throw DomainMismatch("perturb: mismatched grids");
  }
  std::vector<double> v(mu.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = mu.value(i) + t * sigma.value(i);
    if (v[i] < 0.0) throw InvalidArgument("perturb: perturbation makes density negative");
  }
  return {mu.domain(), std::move(v)};
}

Density scaled_to_mass(const Density& m, double target) {
  if (!(target > 0.0)) throw InvalidArgument("scaled_to_mass: nonpositive mass");
  const double current = total_mass(m);
  if (!(current > 0.0)) throw InvalidArgument("scaled_to_mass: zero measure");
  const double f = target / current;
  std::vector<double> v(m.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = m.value(i) * f;
  return {m.domain(), std::move(v)};
}

Density make_measure(DomainPtr domain, const GeneratorSpec& spec) {
  if (!domain) throw InvalidArgument("make_measure: null domain");
  const std::size_t n = domain->cell_count();
  std::vector<double> v(n, 0.0);

  if (const auto* u = std::get_if<Uniform>(&spec)) {
    if (!(u->rho >= 0.0)) throw InvalidArgument("uniform: negative density");
    std::fill(v.begin(), v.end(), u->rho);
  } else if (const auto* b = std::get_if<BoundedRandom>(&spec)) {
    if (b->rho_min > b->rho_max) {
      throw InvalidArgument("bounded_random: rho_min > rho_max");
    }
    if (b->rho_min < 0.0) throw InvalidArgument("bounded_random: negative bound");
    Rng rng(b->seed);
    for (auto& x : v) x = rng.uniform(b->rho_min, b->rho_max);
  } else if (const auto* bp = std::get_if<Bump>(&spec)) {
    if (!(bp->mass > 0.0)) throw InvalidArgument("bump: nonpositive mass");
    if (!(bp->width > 0.0)) throw InvalidArgument("bump: nonpositive width");
    if (bp->center.size() != static_cast<std::size_t>(domain->dims())) {
      throw InvalidArgument("bump: center dimension mismatch");
    }
    std::vector<double> delta(domain->dims());
    const double half_pi = 1.5707963267948966;
    for (std::size_t i = 0; i < n; ++i) {
      domain->displacement_to_point(i, bp->center, delta);
      double r2 = 0.0;
      for (double d : delta) r2 += d * d;
      const double r = std::sqrt(r2);
      if (r < bp->width) {
        const double c = std::cos(half_pi * r / bp->width);
        v[i] = c * c;
      }
    }
    double mass = 0.0;
    for (double x : v) mass += x;
    mass *= domain->cell_volume();
    if (!(mass > 0.0)) {
      throw InvalidArgument("bump: support contains no cell center");
    }
    const double f = bp->mass / mass;
    for (auto& x : v) x *= f;
  } else {
    const auto& d = std::get<DiracLike>(spec);
    if (!(d.mass > 0.0)) throw InvalidArgument("dirac_like: nonpositive mass");
    if (d.cell >= n) throw InvalidArgument("dirac_like: cell out of range");
    v[d.cell] = d.mass / domain->cell_volume();
  }
  return {std::move(domain), std::move(v)};
}

}  // namespace otcheck
