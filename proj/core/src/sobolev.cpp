#include "otcheck/sobolev.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numeric>

namespace otcheck {

WeightedLaplacian::WeightedLaplacian(const Density& weight)
    : domain_(weight.domain()) {
  const GridDomain& g = *domain_;
  const std::size_t n = g.cell_count();
  for (double v : weight.values()) {
    if (!(v > 0.0)) throw InvalidArgument("weighted laplacian: nonpositive weight cell");
  }
  diag_.assign(n, 0.0);

  const int dims = g.dims();
  std::vector<std::size_t> stride(dims, 1);
  for (int a = dims - 2; a >= 0; --a) {
    stride[a] = stride[a + 1] * static_cast<std::size_t>(g.cells()[a + 1]);
  }

  std::vector<int> multi(dims);
  for (int a = 0; a < dims; ++a) {
    const int na = g.cells()[a];
    if (na < 2) continue;  // no face along a degenerate axis
    const double h = g.spacing(a);
    double face_measure = g.cell_volume();
    if (g.boundary() == Boundary::Interval) {
      // Interior faces only; rescale so total face measure equals the extent
      // and linear fields have exact Dirichlet energy.
      face_measure *= static_cast<double>(na) / static_cast<double>(na - 1);
    }
    const double scale = face_measure / (h * h);
    for (std::size_t i = 0; i < n; ++i) {
      g.unflatten(i, multi);
      const int k = multi[a];
      if (g.boundary() == Boundary::Interval && k == na - 1) continue;
      const std::size_t j =
          (k == na - 1) ? i - static_cast<std::size_t>(na - 1) * stride[a]
                        : i + stride[a];
      const double wi = weight.value(i);
      const double wj = weight.value(j);
      const double coeff = scale * 2.0 * wi * wj / (wi + wj);
      faces_.push_back({static_cast<std::uint32_t>(i),
                        static_cast<std::uint32_t>(j), coeff});
      diag_[i] += coeff;
      diag_[j] += coeff;
    }
  }
}

void WeightedLaplacian::apply(std::span<const double> x,
                              std::span<double> y) const {
  std::fill(y.begin(), y.end(), 0.0);
  for (const Face& f : faces_) {
    const double d = f.coeff * (x[f.i] - x[f.j]);
    y[f.i] += d;
    y[f.j] -= d;
  }
}

double WeightedLaplacian::energy(std::span<const double> f) const {
  double sum = 0.0;
  for (const Face& face : faces_) {
    const double d = f[face.i] - f[face.j];
    sum += face.coeff * d * d;
  }
  return sum;
}

double pairing(const ScalarField& f, const SignedDensity& sigma) {
  if (!f.domain()->same_geometry(*sigma.domain())) {
    throw DomainMismatch("pairing: mismatched grids");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sum += f.value(i) * sigma.value(i);
  return sum * f.domain()->cell_volume();
}

double h1_seminorm(const ScalarField& f, const Density& w) {
  if (!f.domain()->same_geometry(*w.domain())) {
    throw DomainMismatch("h1_seminorm: mismatched grids");
  }
  WeightedLaplacian op(w);
  return std::sqrt(op.energy(f.values()));
}

namespace {

// Cell-mass right-hand side, mean-corrected after the neutrality gate.
std::vector<double> poisson_rhs(const SignedDensity& sigma, const Density& w) {
  if (!sigma.domain()->same_geometry(*w.domain())) {
    throw DomainMismatch("poisson solve: mismatched grids");
  }
  const double mass = integral(sigma);
  const double tv = total_variation(sigma);
  if (std::abs(mass) > kMassNeutralityTol * tv) {
    throw NonZeroMass("poisson solve: signed density has nonzero total mass");
  }
  const std::size_t n = sigma.size();
  const double vol = sigma.domain()->cell_volume();
  std::vector<double> b(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    b[i] = sigma.value(i) * vol;
    sum += b[i];
  }
  const double mean = sum / static_cast<double>(n);
  for (auto& x : b) x -= mean;
  return b;
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

PoissonResult weighted_poisson_solve(const SignedDensity& sigma,
                                     const Density& w, double tol) {
  WeightedLaplacian op(w);
  std::vector<double> b = poisson_rhs(sigma, w);
  const std::size_t n = b.size();

  std::vector<double> x(n, 0.0);
  SolveStats stats;

  const double bnorm = norm2(b);
  if (bnorm == 0.0 || n == 1) {
    return {ScalarField(sigma.domain(), std::move(x)), stats};
  }

  // Jacobi-preconditioned CG. Iteration order is fixed, so results are
  // reproducible bit for bit.
  const std::vector<double>& diag = op.diagonal();
  std::vector<double> r = b;
  std::vector<double> z(n), p(n), q(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
  p = z;
  double rz = 0.0;
  for (std::size_t i = 0; i < n; ++i) rz += r[i] * z[i];

  const int cap = 50 * static_cast<int>(n);
  double rnorm = norm2(r);
  while (rnorm > tol * bnorm) {
    if (stats.iterations >= cap) {
      throw NoConvergence("poisson solve: CG hit iteration cap");
    }
    op.apply(p, q);
    double pq = 0.0;
    for (std::size_t i = 0; i < n; ++i) pq += p[i] * q[i];
    const double alpha = rz / pq;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
    double rz_next = 0.0;
    for (std::size_t i = 0; i < n; ++i) rz_next += r[i] * z[i];
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    ++stats.iterations;
    rnorm = norm2(r);
  }
  stats.rel_residual = rnorm / bnorm;

  double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  for (auto& v : x) v -= mean;
  return {ScalarField(sigma.domain(), std::move(x)), stats};
}

ScalarField weighted_poisson_solve_dense(const SignedDensity& sigma,
                                         const Density& w) {
  WeightedLaplacian op(w);
  std::vector<double> b = poisson_rhs(sigma, w);
  const auto n = static_cast<Eigen::Index>(b.size());

  if (n == 1) return {sigma.domain(), {0.0}};

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (const auto& f : op.faces()) {
    A(f.i, f.i) += f.coeff;
    A(f.j, f.j) += f.coeff;
    A(f.i, f.j) -= f.coeff;
    A(f.j, f.i) -= f.coeff;
  }
  // Rank-one shift c * ones makes the system SPD; for a mean-free right-hand
  // side the solution is exactly the zero-mean potential.
  const double c = A.trace() / static_cast<double>(n * n);
  A.array() += c;

  Eigen::Map<const Eigen::VectorXd> bv(b.data(), n);
  Eigen::VectorXd x = A.llt().solve(bv);
  x.array() -= x.mean();
  return {sigma.domain(), std::vector<double>(x.data(), x.data() + n)};
}

NormResult hminus1_norm(const SignedDensity& sigma, const Density& w,
                        double tol) {
  PoissonResult sol = weighted_poisson_solve(sigma, w, tol);
  WeightedLaplacian op(w);
  NormResult out;
  out.value = std::sqrt(op.energy(sol.phi.values()));
  out.stats = sol.stats;
  return out;
}

double hminus1_norm_dense(const SignedDensity& sigma, const Density& w) {
  ScalarField phi = weighted_poisson_solve_dense(sigma, w);
  WeightedLaplacian op(w);
  return std::sqrt(op.energy(phi.values()));
}

double duality_gap_check(const SignedDensity& sigma, const Density& w,
                         const ScalarField& f) {
  const double h1 = h1_seminorm(f, w);
  if (h1 == 0.0) {
    throw InvalidArgument("duality_gap_check: constant test field");
  }
  return std::abs(pairing(f, sigma)) / h1;
}

}  // namespace otcheck
