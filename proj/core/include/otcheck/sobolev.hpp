#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "otcheck/grid.hpp"

namespace otcheck {

/// Default relative-residual target for the conjugate-gradient solver.
inline constexpr double kDefaultPoissonTol = 1e-10;

/// A signed density must integrate to zero within this fraction of its total
/// variation before the dual norm accepts it.
inline constexpr double kMassNeutralityTol = 1e-10;

struct SolveStats {
  int iterations = 0;
  double rel_residual = 0.0;
};

/// Divergence-form operator for the weighted Dirichlet energy
/// sum_faces face_weight * (df/h)^2 * face_measure, where the face weight is
/// the harmonic mean of the two adjacent cell weights. Symmetric positive
/// semidefinite; on a connected grid its kernel is exactly the constants.
class WeightedLaplacian {
 public:
  /// weight must be strictly positive in every cell.
  explicit WeightedLaplacian(const Density& weight);

  const DomainPtr& domain() const { return domain_; }
  std::size_t size() const { return diag_.size(); }

  struct Face {
    std::uint32_t i;
    std::uint32_t j;
    double coeff;  // face_weight * face_measure / spacing^2
  };

  const std::vector<Face>& faces() const { return faces_; }
  const std::vector<double>& diagonal() const { return diag_; }

  /// y = L x, matrix-free.
  void apply(std::span<const double> x, std::span<double> y) const;

  /// f^T L f accumulated face by face (the squared H^1(w) seminorm).
  double energy(std::span<const double> f) const;

 private:
  DomainPtr domain_;
  std::vector<Face> faces_;
  std::vector<double> diag_;
};

struct PoissonResult {
  ScalarField phi;
  SolveStats stats;
};

struct NormResult {
  double value = 0.0;
  SolveStats stats;
};

/// <f, sigma> = sum_i f_i sigma_i * cell_volume.
double pairing(const ScalarField& f, const SignedDensity& sigma);

/// Weighted homogeneous H^1 seminorm of f: sqrt of the Dirichlet energy under
/// weight w. Zero exactly for constant fields.
double h1_seminorm(const ScalarField& f, const Density& w);

/// Solve L_w phi = sigma (cell-mass right-hand side) for the zero-mean
/// potential, by Jacobi-preconditioned conjugate gradient on the zero-mean
/// subspace. Throws NonZeroMass if sigma's integral exceeds the neutrality
/// gate and NoConvergence if the iteration cap (50 x cells) is hit.
PoissonResult weighted_poisson_solve(const SignedDensity& sigma,
                                     const Density& w,
                                     double tol = kDefaultPoissonTol);

/// Same equation solved by dense Cholesky factorization of the rank-corrected
/// operator. Independent solve path used for cross-checking.
ScalarField weighted_poisson_solve_dense(const SignedDensity& sigma,
                                         const Density& w);

/// Weighted homogeneous H^-1 norm of a zero-mass signed density: the H^1(w)
/// seminorm of its Poisson potential, which equals
/// sup { |<f, sigma>| : ||f||_{H^1(w)} <= 1 } for the discrete form.
NormResult hminus1_norm(const SignedDensity& sigma, const Density& w,
                        double tol = kDefaultPoissonTol);

/// Dual-route evaluation through the dense solver.
double hminus1_norm_dense(const SignedDensity& sigma, const Density& w);

/// |<f, sigma>| / ||f||_{H^1(w)}: a feasible lower bound on the dual norm for
/// any non-constant test field f. Throws InvalidArgument when f is constant.
double duality_gap_check(const SignedDensity& sigma, const Density& w,
                         const ScalarField& f);

}  // namespace otcheck
