#include "otcheck/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "otcheck/interpolation.hpp"

namespace otcheck {

CheckReport make_report(std::string name, double lhs, double rhs,
                        double tolerance,
                        std::vector<std::pair<std::string, double>> diag) {
  CheckReport r;
  r.check_name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.tolerance = tolerance;
  if (rhs > 0.0) {
    r.ratio = lhs / rhs;
  } else {
    r.ratio = (lhs <= 0.0) ? 0.0 : std::numeric_limits<double>::max();
  }
  r.passed = lhs <= rhs * (1.0 + tolerance);
  r.diagnostics = std::move(diag);
  return r;
}

namespace {

Density uniform_one(const DomainPtr& d) {
  return {d, std::vector<double>(d->cell_count(), 1.0)};
}

bool is_1d_interval(const GridDomain& g) {
  return g.boundary() == Boundary::Interval && g.dims() == 1;
}

// W2 by the closed 1-D form on intervals, by the exact LP otherwise. When
// cross-checking, the other route's relative gap is recorded.
double w2_value(const Density& mu, const Density& nu, const CheckOptions& opt,
                std::vector<std::pair<std::string, double>>& diag) {
  if (is_1d_interval(*mu.domain())) {
    const double q = w2_1d(mu, nu);
    if (opt.cross_check &&
        mu.size() * nu.size() <= opt.max_pairs) {
      const double lp = w2_exact(mu, nu, opt.max_pairs).value;
      diag.emplace_back("w2_rel_gap",
                        std::abs(q - lp) / std::max(q, 1e-300));
    }
    return q;
  }
  const W2Result r = w2_exact(mu, nu, opt.max_pairs);
  diag.emplace_back("lp_pivots", static_cast<double>(r.stats.pivots));
  return r.value;
}

double hm1_value(const SignedDensity& sigma, const Density& w,
                 const CheckOptions& opt,
                 std::vector<std::pair<std::string, double>>& diag,
                 const std::string& tag) {
  const NormResult r = hminus1_norm(sigma, w, opt.poisson_tol);
  diag.emplace_back(tag + "_cg_iterations",
                    static_cast<double>(r.stats.iterations));
  if (opt.cross_check && sigma.size() <= 4096) {
    const double dense = hminus1_norm_dense(sigma, w);
    diag.emplace_back(tag + "_rel_gap",
                      std::abs(r.value - dense) / std::max(dense, 1e-300));
  }
  return r.value;
}

void require_upper_bound(const Density& m, double rho, const char* what) {
  const double slack = 1e-12 * rho;
  for (double v : m.values()) {
    if (v > rho + slack) {
      throw HypothesisViolated(std::string(what) +
                               ": density exceeds its stated upper bound");
    }
  }
}

}  // namespace

CheckReport check_thm1(const Density& mu, const Density& nu,
                       const CheckOptions& opt) {
  std::vector<std::pair<std::string, double>> diag;
  const double lhs = w2_value(mu, nu, opt, diag);
  const double rhs = 2.0 * hm1_value(difference(nu, mu), mu, opt, diag, "hm1");
  return make_report("check_thm1", lhs, rhs, opt.tolerance, std::move(diag));
}

CheckReport check_cor1(const Density& mu, const Density& nu, double rho,
                       const CheckOptions& opt) {
  if (!(rho > 0.0)) throw InvalidArgument("check_cor1: rho must be positive");
  const double slack = 1e-12 * rho;
  for (double v : mu.values()) {
    if (v < rho - slack) {
      throw HypothesisViolated("check_cor1: mu < rho at a cell");
    }
  }
  std::vector<std::pair<std::string, double>> diag;
  const double lhs = w2_value(mu, nu, opt, diag);
  const double rhs =
      2.0 / std::sqrt(rho) *
      hm1_value(difference(nu, mu), uniform_one(mu.domain()), opt, diag, "hm1");
  return make_report("check_cor1", lhs, rhs, opt.tolerance, std::move(diag));
}

CheckReport check_lemma_qq(const SignedDensity& sigma, const Density& w,
                           const Density& w_prime, double rho,
                           const CheckOptions& opt) {
  if (!(rho > 0.0)) throw InvalidArgument("check_lemma_qq: rho must be positive");
  if (!w.domain()->same_geometry(*w_prime.domain())) {
    throw DomainMismatch("check_lemma_qq: weights on different grids");
  }
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w_prime.value(i) < rho * w.value(i) * (1.0 - 1e-12)) {
      throw DominationViolated("check_lemma_qq: w' < rho w at a cell");
    }
  }
  std::vector<std::pair<std::string, double>> diag;
  const double lhs = hm1_value(sigma, w_prime, opt, diag, "lhs");
  const double rhs = hm1_value(sigma, w, opt, diag, "rhs") / std::sqrt(rho);
  return make_report("check_lemma_qq", lhs, rhs, opt.tolerance,
                     std::move(diag));
}

double thm2_prefactor(double rho0, double rho1) {
  if (!(rho0 > 0.0 && rho1 > 0.0)) {
    throw InvalidArgument("thm2_prefactor: densities must be positive");
  }
  const double eps = std::log(rho1 / rho0);
  const double s0 = std::sqrt(rho0);
  const double x = 0.5 * eps;
  if (std::abs(eps) < 1e-6) {
    // (e^x - 1)/x expanded around the rho1 = rho0 limit sqrt(rho0).
    return s0 * (1.0 + 0.5 * x + x * x / 6.0);
  }
  return s0 * std::expm1(x) / x;
}

namespace {

// Integrated dimension-refined prefactor, reported as a diagnostic only:
// int_0^1 ((1-t) rho0^{-1/n} + t rho1^{-1/n})^{-n/2} dt by composite Simpson.
double refined_prefactor(int n, double rho0, double rho1) {
  const int panels = 256;
  double sum = 0.0;
  const auto f = [&](double t) {
    return std::sqrt(refined_density_bound(n, t, rho0, rho1));
  };
  const double h = 1.0 / panels;
  for (int k = 0; k < panels; ++k) {
    const double a = k * h;
    sum += (f(a) + 4.0 * f(a + 0.5 * h) + f(a + h)) * h / 6.0;
  }
  return sum;
}

}  // namespace

CheckReport check_thm2(const Density& mu, const Density& nu, double rho0,
                       double rho1, const CheckOptions& opt) {
  if (mu.domain()->boundary() != Boundary::Torus) {
    throw HypothesisViolated("check_thm2: requires a torus domain");
  }
  if (!(rho0 > 0.0 && rho1 > 0.0)) {
    throw InvalidArgument("check_thm2: bounds must be positive");
  }
  require_upper_bound(mu, rho0, "check_thm2(mu)");
  require_upper_bound(nu, rho1, "check_thm2(nu)");
  std::vector<std::pair<std::string, double>> diag;
  const double lhs =
      hm1_value(difference(nu, mu), uniform_one(mu.domain()), opt, diag, "hm1");
  const double w2 = w2_value(mu, nu, opt, diag);
  const double pf = thm2_prefactor(rho0, rho1);
  diag.emplace_back("prefactor", pf);
  diag.emplace_back("refined_prefactor",
                    refined_prefactor(mu.domain()->dims(), rho0, rho1));
  return make_report("check_thm2", lhs, pf * w2, opt.tolerance,
                     std::move(diag));
}

CheckReport check_thm3(const Density& mu, const Density& nu, double rho0,
                       const CheckOptions& opt) {
  if (!is_1d_interval(*mu.domain())) {
    throw HypothesisViolated("check_thm3: requires a 1-D interval domain");
  }
  if (!(rho0 > 0.0)) throw InvalidArgument("check_thm3: rho0 must be positive");
  require_upper_bound(mu, rho0, "check_thm3(mu)");
  std::vector<std::pair<std::string, double>> diag;
  const double lhs =
      hm1_value(difference(nu, mu), uniform_one(mu.domain()), opt, diag, "hm1");
  const double rhs = 2.0 * std::sqrt(rho0) * w2_1d(mu, nu);
  return make_report("check_thm3", lhs, rhs, opt.tolerance, std::move(diag));
}

std::vector<ScanRow> counterexample_scan(std::span<const int> n_list,
                                         const CheckOptions& opt) {
  std::vector<ScanRow> rows;
  rows.reserve(n_list.size());
  for (const int n : n_list) {
    if (n < 2) throw InvalidArgument("counterexample_scan: grid too small");
    const DomainPtr d = make_torus({n, n}, {1.0, 1.0});
    const Density mu = make_measure(d, Uniform{1.0});
    const std::size_t target =
        static_cast<std::size_t>(n / 2) * static_cast<std::size_t>(n) +
        static_cast<std::size_t>(n / 2);
    const Density nu = make_measure(d, DiracLike{target, total_mass(mu)});

    ScanRow row;
    row.cells_per_axis = n;
    double cost = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      cost += mu.cell_mass(i) * d->geodesic_distance_sq(i, target);
    }
    row.w2_analytic = std::sqrt(cost);
    const std::size_t pairs = mu.size();  // single sink
    if (pairs <= opt.max_pairs) {
      row.w2 = w2_exact(mu, nu, opt.max_pairs).value;
      row.lp_used = true;
    } else {
      row.w2 = row.w2_analytic;
      row.lp_used = false;
    }
    row.hm1 =
        hminus1_norm(difference(nu, mu), uniform_one(d), opt.poisson_tol).value;
    rows.push_back(row);
  }
  return rows;
}

LinearizationSweep linearization_sweep(const Density& mu,
                                       const SignedDensity& sigma,
                                       std::span<const double> eps_list,
                                       const CheckOptions& opt) {
  LinearizationSweep out;
  out.sigma_norm = hminus1_norm(sigma, mu, opt.poisson_tol).value;
  if (!(out.sigma_norm > 0.0)) {
    throw InvalidArgument("linearization_sweep: sigma has zero dual norm");
  }
  std::vector<std::pair<std::string, double>> diag;
  for (const double eps : eps_list) {
    if (!(eps > 0.0)) throw InvalidArgument("linearization_sweep: eps <= 0");
    const Density nu = perturb(mu, sigma, eps);
    const double w2 = w2_value(mu, nu, opt, diag);
    out.eps.push_back(eps);
    out.ratio.push_back(w2 / (eps * out.sigma_norm));
  }
  return out;
}

}  // namespace otcheck
