#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "otcheck/errors.hpp"

namespace otcheck {

enum class Boundary { Interval, Torus };

/// A uniform cell-centered discretization of an interval or a flat torus.
///
/// Cells are axis-aligned boxes of identical volume; cell centers sit at
/// (k + 1/2) * spacing along each axis. Flat cell indices are row-major with
/// the last axis fastest. Interval boundaries are reflecting and only allowed
/// in one dimension; tori are periodic in every axis.
class GridDomain {
 public:
  GridDomain(std::vector<int> cells, std::vector<double> extents,
             Boundary boundary);

  int dims() const { return static_cast<int>(cells_.size()); }
  const std::vector<int>& cells() const { return cells_; }
  const std::vector<double>& extents() const { return extents_; }
  Boundary boundary() const { return boundary_; }
  double cell_volume() const { return cell_volume_; }
  double spacing(int axis) const { return spacing_[axis]; }
  std::size_t cell_count() const { return cell_count_; }

  /// Center coordinate of index k along one axis: (k + 1/2) * spacing.
  double center(int axis, int index) const {
    return (static_cast<double>(index) + 0.5) * spacing_[axis];
  }

  std::size_t flat_index(std::span<const int> multi) const;
  void unflatten(std::size_t flat, std::span<int> multi) const;

  /// Signed displacement from cell i to cell j, one entry per axis.
  /// On a torus each axis uses the minimum-image convention; exact antipodal
  /// ties resolve to -extent/2 so the vector is the lexicographically
  /// smallest minimizer.
  void displacement(std::size_t i, std::size_t j, std::span<double> out) const;

  /// Displacement from cell i's center to an arbitrary point (same
  /// convention as above).
  void displacement_to_point(std::size_t i, std::span<const double> point,
                             std::span<double> out) const;

  /// Geodesic distance between cell centers: Euclidean on the interval,
  /// per-axis minimum image combined in the Euclidean norm on the torus.
  double geodesic_distance(std::size_t i, std::size_t j) const;
  double geodesic_distance_sq(std::size_t i, std::size_t j) const;

  /// Flat index of the cell containing a point (coordinates wrapped into
  /// [0, extent) on a torus, clamped to the closed box on an interval).
  std::size_t locate(std::span<const double> point) const;

  bool same_geometry(const GridDomain& other) const;

 private:
  double axis_delta(int axis, double raw) const;

  std::vector<int> cells_;
  std::vector<double> extents_;
  std::vector<double> spacing_;
  Boundary boundary_;
  double cell_volume_;
  std::size_t cell_count_;
};

using DomainPtr = std::shared_ptr<const GridDomain>;

DomainPtr make_interval(int cells, double extent);
DomainPtr make_torus(std::vector<int> cells, std::vector<double> extents);

namespace detail {
void check_finite(std::span<const double> values, const char* what);
}

/// Nonnegative cell-wise density with respect to the grid's volume measure.
class Density {
 public:
  Density(DomainPtr domain, std::vector<double> values);

  const DomainPtr& domain() const { return domain_; }
  const std::vector<double>& values() const { return values_; }
  double value(std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  /// Mass carried by one cell: value * cell_volume.
  double cell_mass(std::size_t i) const {
    return values_[i] * domain_->cell_volume();
  }

 private:
  DomainPtr domain_;
  std::vector<double> values_;
};

/// Signed cell-wise density (perturbations, differences of measures).
class SignedDensity {
 public:
  SignedDensity(DomainPtr domain, std::vector<double> values);

  const DomainPtr& domain() const { return domain_; }
  const std::vector<double>& values() const { return values_; }
  double value(std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

 private:
  DomainPtr domain_;
  std::vector<double> values_;
};

/// Real function sampled at cell centers (test functions, potentials).
class ScalarField {
 public:
  ScalarField(DomainPtr domain, std::vector<double> values);

  const DomainPtr& domain() const { return domain_; }
  const std::vector<double>& values() const { return values_; }
  double value(std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

 private:
  DomainPtr domain_;
  std::vector<double> values_;
};

double total_mass(const Density& m);
double sup_density(const Density& m);

/// Signed integral of a signed density: sum of values times cell volume.
double integral(const SignedDensity& s);
/// Total variation: sum of absolute values times cell volume.
double total_variation(const SignedDensity& s);

/// nu - mu as a signed density. Domains must match.
SignedDensity difference(const Density& nu, const Density& mu);

/// mu + t * sigma; throws InvalidArgument if any cell goes negative.
Density perturb(const Density& mu, const SignedDensity& sigma, double t);

/// Rescale a density so its total mass equals target exactly.
Density scaled_to_mass(const Density& m, double target);

// -- measure generators ------------------------------------------------------

struct Uniform {
  double rho;
};
struct BoundedRandom {
  double rho_min;
  double rho_max;
  std::uint64_t seed;
};
struct Bump {
  std::vector<double> center;
  double width;
  double mass;
};
struct DiracLike {
  std::size_t cell;
  double mass;
};

using GeneratorSpec = std::variant<Uniform, BoundedRandom, Bump, DiracLike>;

/// Build a density from a generator spec. bounded_random draws i.i.d.
/// uniformly from [rho_min, rho_max], deterministically per seed; bump is a
/// raised-cosine profile of the given geodesic radius rescaled to the exact
/// requested mass; dirac_like puts all mass in a single cell.
Density make_measure(DomainPtr domain, const GeneratorSpec& spec);

}  // namespace otcheck
