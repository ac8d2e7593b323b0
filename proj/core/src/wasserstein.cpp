#include "otcheck/wasserstein.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <utility>

namespace otcheck {

Coupling::Coupling(DomainPtr row_domain, DomainPtr col_domain,
                   std::vector<Entry> entries)
    : row_domain_(std::move(row_domain)), col_domain_(std::move(col_domain)),
      entries_(std::move(entries)) {
  if (!row_domain_ || !col_domain_) {
    throw InvalidArgument("coupling: null domain");
  }
  if (!row_domain_->same_geometry(*col_domain_)) {
    throw DomainMismatch("coupling: marginals must live on one metric space");
  }
  const std::size_t rows = row_domain_->cell_count();
  const std::size_t cols = col_domain_->cell_count();
  for (const Entry& e : entries_) {
    if (e.row >= rows || e.col >= cols) {
      throw InvalidArgument("coupling: cell index out of range");
    }
    if (!(e.mass >= 0.0) || !std::isfinite(e.mass)) {
      throw InvalidArgument("coupling: negative or non-finite mass");
    }
  }
  std::sort(entries_.begin(), entries_.end(),
            [](const Entry& a, const Entry& b) {
              return a.row != b.row ? a.row < b.row : a.col < b.col;
            });
  // Merge duplicates, drop zero-mass entries: canonical sparse form.
  std::vector<Entry> merged;
  merged.reserve(entries_.size());
  for (const Entry& e : entries_) {
    if (!merged.empty() && merged.back().row == e.row &&
        merged.back().col == e.col) {
      merged.back().mass += e.mass;
    } else {
      merged.push_back(e);
    }
  }
  std::erase_if(merged, [](const Entry& e) { return e.mass == 0.0; });
  entries_ = std::move(merged);
}

std::vector<double> Coupling::row_marginal() const {
  std::vector<double> m(row_domain_->cell_count(), 0.0);
  for (const Entry& e : entries_) m[e.row] += e.mass;
  return m;
}

std::vector<double> Coupling::col_marginal() const {
  std::vector<double> m(col_domain_->cell_count(), 0.0);
  for (const Entry& e : entries_) m[e.col] += e.mass;
  return m;
}

double coupling_cost(const Coupling& pi) {
  const GridDomain& g = *pi.row_domain();
  double sum = 0.0;
  for (const auto& e : pi.entries()) {
    if (e.row == e.col) continue;  // zero distance
    sum += e.mass * g.geodesic_distance_sq(e.row, e.col);
  }
  return sum;
}

Coupling diag_coupling(const Density& m) {
  std::vector<Coupling::Entry> entries;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double mass = m.cell_mass(i);
    if (mass > 0.0) {
      entries.push_back({static_cast<std::uint32_t>(i),
                         static_cast<std::uint32_t>(i), mass});
    }
  }
  return {m.domain(), m.domain(), std::move(entries)};
}

Coupling lemma_coupling_transform(const Coupling& pi, const Density& mu_prime,
                                  double rho) {
  if (!(rho > 0.0)) throw InvalidArgument("coupling transform: rho must be positive");
  if (!mu_prime.domain()->same_geometry(*pi.row_domain())) {
    throw DomainMismatch("coupling transform: mu' grid differs from coupling grid");
  }
  const std::vector<double> marg = pi.row_marginal();
  std::vector<Coupling::Entry> entries;
  entries.reserve(pi.entries().size() + marg.size());
  for (const auto& e : pi.entries()) {
    entries.push_back({e.row, e.col, rho * e.mass});
  }
  for (std::size_t i = 0; i < marg.size(); ++i) {
    const double mp = mu_prime.cell_mass(i);
    const double need = rho * marg[i];
    const double slack = 1e-12 * (mp + need);
    if (mp < need - slack) {
      throw DominationViolated("coupling transform: mu' < rho * mu at a cell");
    }
    const double d = mp - need;
    if (d > 0.0) {
      entries.push_back({static_cast<std::uint32_t>(i),
                         static_cast<std::uint32_t>(i), d});
    }
  }
  return {mu_prime.domain(), pi.col_domain(), std::move(entries)};
}

// -- 1-D closed form ---------------------------------------------------------

namespace {

struct QuantileCell {
  double cum0;     // cumulative mass strictly before this cell
  double cum1;     // cumulative mass through this cell
  double x_left;   // left edge position
  double density;  // strictly positive
};

std::vector<QuantileCell> positive_cells(const Density& m, double scale) {
  const GridDomain& g = *m.domain();
  const double h = g.spacing(0);
  std::vector<QuantileCell> cells;
  double cum = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double rho = m.value(i) * scale;
    if (rho > 0.0) {
      const double mass = rho * h;
      cells.push_back({cum, cum + mass, static_cast<double>(i) * h, rho});
      cum += mass;
    }
  }
  return cells;
}

double quantile_at(const QuantileCell& c, double s) {
  return c.x_left + (s - c.cum0) / c.density;
}

void require_equal_mass(double a, double b, const char* what) {
  if (std::abs(a - b) > kMassMatchTol * std::max({a, b, 1e-300})) {
    throw MassMismatch(std::string(what) + ": total masses differ");
  }
}

}  // namespace

double w2_1d(const Density& mu, const Density& nu) {
  const GridDomain& g = *mu.domain();
  if (!g.same_geometry(*nu.domain())) {
    throw DomainMismatch("w2_1d: measures on different grids");
  }
  if (g.boundary() != Boundary::Interval || g.dims() != 1) {
    throw InvalidArgument("w2_1d: requires a 1-D interval domain");
  }
  const double ma = total_mass(mu);
  const double mb = total_mass(nu);
  require_equal_mass(ma, mb, "w2_1d");
  if (ma == 0.0 && mb == 0.0) return 0.0;

  const auto a = positive_cells(mu, 1.0);
  const auto b = positive_cells(nu, ma / mb);  // balance masses exactly

  // Integrate (Qmu - Qnu)^2 over mass between merged CDF breakpoints; both
  // quantile functions are affine on each open segment, so each piece is a
  // closed-form quadratic integral.
  double total = 0.0;
  std::size_t ia = 0, ib = 0;
  double s = 0.0;
  while (ia < a.size() && ib < b.size()) {
    const double e = std::min(a[ia].cum1, b[ib].cum1);
    if (e > s) {
      const double d0 = quantile_at(a[ia], s) - quantile_at(b[ib], s);
      const double d1 = quantile_at(a[ia], e) - quantile_at(b[ib], e);
      total += (e - s) * (d0 * d0 + d0 * d1 + d1 * d1) / 3.0;
      s = e;
    }
    if (e >= a[ia].cum1) ++ia;
    if (e >= b[ib].cum1) ++ib;
  }
  return std::sqrt(std::max(total, 0.0));
}

// -- exact solver (network simplex on the transportation polytope) -----------

namespace {

struct TransportProblem {
  const GridDomain* geom = nullptr;
  std::vector<std::size_t> src_cell, snk_cell;
  std::vector<double> supply, demand;
  std::size_t m = 0, n = 0;
  std::vector<double> cache;  // dense cost matrix when small enough
  bool cached = false;

  double cost(std::size_t i, std::size_t j) const {
    if (cached) return cache[i * n + j];
    return geom->geodesic_distance_sq(src_cell[i], snk_cell[j]);
  }
};

// Squared diameter of the domain, used to scale optimality tolerances.
double squared_diameter(const GridDomain& g) {
  double d2 = 0.0;
  for (int a = 0; a < g.dims(); ++a) {
    const double L = g.extents()[a];
    const double r = g.boundary() == Boundary::Torus ? 0.5 * L : L;
    d2 += r * r;
  }
  return d2;
}

class TransportSimplex {
 public:
  explicit TransportSimplex(const TransportProblem& p)
      : p_(p), m_(p.m), n_(p.n), nodes_(p.m + p.n) {
    eps_ = 1e-12 * std::max(squared_diameter(*p.geom), 1e-300);
    adj_.resize(nodes_);
    u_.resize(m_);
    v_.resize(n_);
    northwest_corner();
  }

  void solve() {
    const int cap = 1000 + 200 * static_cast<int>(nodes_);
    int degenerate_streak = 0;
    bool bland = false;
    while (true) {
      compute_duals();
      const auto enter = find_entering(bland);
      if (enter.first < 0) break;  // optimal
      const double theta = pivot(static_cast<std::size_t>(enter.first),
                                 static_cast<std::size_t>(enter.second));
      ++pivots_;
      if (pivots_ > cap) {
        throw NoConvergence("w2_exact: simplex pivot cap exceeded");
      }
      if (theta > 0.0) {
        degenerate_streak = 0;
        bland = false;
      } else if (++degenerate_streak > 2 * static_cast<int>(nodes_)) {
        bland = true;  // anti-cycling fallback
      }
    }
    resolve_flows();
  }

  int pivots() const { return pivots_; }

  // (source index, sink index, mass) for every positive basis flow.
  std::vector<std::array<double, 3>> flows() const {
    std::vector<std::array<double, 3>> out;
    for (std::size_t k = 0; k < row_.size(); ++k) {
      if (flow_[k] > 0.0) {
        out.push_back({static_cast<double>(row_[k]),
                       static_cast<double>(col_[k]), flow_[k]});
      }
    }
    return out;
  }

 private:
  void add_slot(std::size_t i, std::size_t j, double f) {
    const int k = static_cast<int>(row_.size());
    row_.push_back(i);
    col_.push_back(j);
    flow_.push_back(f);
    adj_[i].push_back(k);
    adj_[m_ + j].push_back(k);
  }

  void northwest_corner() {
    std::vector<double> srem = p_.supply;
    std::vector<double> drem = p_.demand;
    std::size_t i = 0, j = 0;
    for (std::size_t k = 0; k + 1 < m_ + n_; ++k) {
      const double f = std::min(srem[i], drem[j]);
      add_slot(i, j, f);
      srem[i] -= f;
      drem[j] -= f;
      if (srem[i] <= drem[j] && i + 1 < m_) {
        ++i;
      } else if (j + 1 < n_) {
        ++j;
      } else {
        ++i;
      }
    }
  }

  void compute_duals() {
    visited_.assign(nodes_, false);
    stack_.clear();
    stack_.push_back(0);
    visited_[0] = true;
    u_[0] = 0.0;
    while (!stack_.empty()) {
      const std::size_t x = stack_.back();
      stack_.pop_back();
      for (const int s : adj_[x]) {
        const std::size_t other = (x < m_) ? m_ + col_[s] : row_[s];
        if (visited_[other]) continue;
        visited_[other] = true;
        if (x < m_) {
          v_[col_[s]] = p_.cost(x, col_[s]) - u_[x];
        } else {
          u_[row_[s]] = p_.cost(row_[s], x - m_) - v_[x - m_];
        }
        stack_.push_back(other);
      }
    }
  }

  // Returns (-1, -1) at optimality.
  std::pair<long, long> find_entering(bool bland) const {
    long bi = -1, bj = -1;
    double best = -eps_;
    for (std::size_t i = 0; i < m_; ++i) {
      const double ui = u_[i];
      for (std::size_t j = 0; j < n_; ++j) {
        const double rc = p_.cost(i, j) - ui - v_[j];
        if (rc < best) {
          if (bland) return {static_cast<long>(i), static_cast<long>(j)};
          best = rc;
          bi = static_cast<long>(i);
          bj = static_cast<long>(j);
        }
      }
    }
    return {bi, bj};
  }

  // Bring arc (i*, j*) into the basis; returns the amount of mass moved.
  double pivot(std::size_t si, std::size_t sj) {
    // Unique tree path from source node si to sink node m_ + sj.
    parent_node_.assign(nodes_, -1);
    parent_slot_.assign(nodes_, -1);
    std::deque<std::size_t> queue{si};
    parent_node_[si] = static_cast<long>(si);  // mark root
    const std::size_t target = m_ + sj;
    while (!queue.empty()) {
      const std::size_t x = queue.front();
      queue.pop_front();
      if (x == target) break;
      for (const int s : adj_[x]) {
        const std::size_t other = (x < m_) ? m_ + col_[s] : row_[s];
        if (parent_node_[other] >= 0) continue;
        parent_node_[other] = static_cast<long>(x);
        parent_slot_[other] = s;
        queue.push_back(other);
      }
    }

    path_.clear();
    for (std::size_t x = target; x != si;
         x = static_cast<std::size_t>(parent_node_[x])) {
      path_.push_back(parent_slot_[x]);
    }
    std::reverse(path_.begin(), path_.end());

    // The entering arc gains theta; tree arcs alternate signs starting with
    // minus at the arc incident to the entering source. Ties on the leaving
    // arc break by arc identity (row-major), matching the entering rule so
    // the Bland fallback is a genuine anti-cycling rule.
    const auto arc_id = [this](int s) { return row_[s] * n_ + col_[s]; };
    double theta = std::numeric_limits<double>::infinity();
    int leave = -1;
    for (std::size_t k = 0; k < path_.size(); k += 2) {
      const int s = path_[k];
      if (flow_[s] < theta ||
          (flow_[s] == theta && arc_id(s) < arc_id(leave))) {
        theta = flow_[s];
        leave = s;
      }
    }

    for (std::size_t k = 0; k < path_.size(); ++k) {
      const int s = path_[k];
      if (k % 2 == 0) {
        flow_[s] = std::max(flow_[s] - theta, 0.0);
      } else {
        flow_[s] += theta;
      }
    }

    detach_slot(leave);
    row_[leave] = si;
    col_[leave] = sj;
    flow_[leave] = theta;
    adj_[si].push_back(leave);
    adj_[m_ + sj].push_back(leave);
    return theta;
  }

  void detach_slot(int s) {
    auto remove_from = [&](std::size_t node) {
      auto& lst = adj_[node];
      for (std::size_t k = 0; k < lst.size(); ++k) {
        if (lst[k] == s) {
          lst[k] = lst.back();
          lst.pop_back();
          return;
        }
      }
    };
    remove_from(row_[s]);
    remove_from(m_ + col_[s]);
  }

  // Recompute basis flows exactly from the original supplies by leaf
  // elimination over the final tree; removes floating-point drift from the
  // pivot sequence.
  void resolve_flows() {
    std::vector<double> bal(nodes_);
    for (std::size_t i = 0; i < m_; ++i) bal[i] = p_.supply[i];
    for (std::size_t j = 0; j < n_; ++j) bal[m_ + j] = -p_.demand[j];
    std::vector<int> deg(nodes_);
    std::vector<char> done(row_.size(), 0);
    for (std::size_t x = 0; x < nodes_; ++x) {
      deg[x] = static_cast<int>(adj_[x].size());
    }
    std::vector<std::size_t> leaves;
    for (std::size_t x = 0; x < nodes_; ++x) {
      if (deg[x] == 1) leaves.push_back(x);
    }
    const double tol = 1e-9 * std::max(1e-300, *std::max_element(
                                                   p_.supply.begin(),
                                                   p_.supply.end()));
    while (!leaves.empty()) {
      const std::size_t x = leaves.back();
      leaves.pop_back();
      int slot = -1;
      for (const int s : adj_[x]) {
        if (!done[s]) {
          slot = s;
          break;
        }
      }
      if (slot < 0) continue;  // root of the elimination
      double f = (x < m_) ? bal[x] : -bal[x];
      if (f < 0.0) {
        if (f < -tol) throw Error("w2_exact: infeasible basis flow");
        f = 0.0;
      }
      flow_[slot] = f;
      done[slot] = 1;
      const std::size_t other =
          (x == row_[slot]) ? m_ + col_[slot] : row_[slot];
      if (x < m_) {
        bal[other] += f;
      } else {
        bal[other] -= f;
      }
      if (--deg[other] == 1) leaves.push_back(other);
      deg[x] = 0;
    }
  }

  const TransportProblem& p_;
  std::size_t m_, n_, nodes_;
  double eps_;
  int pivots_ = 0;
  std::vector<std::size_t> row_, col_;
  std::vector<double> flow_;
  std::vector<std::vector<int>> adj_;
  std::vector<double> u_, v_;
  std::vector<char> visited_;
  std::vector<std::size_t> stack_;
  std::vector<long> parent_node_;
  std::vector<int> parent_slot_;
  std::vector<int> path_;
};

}  // namespace

W2Result w2_exact(const Density& mu, const Density& nu,
                  std::size_t max_pairs) {
  if (!mu.domain()->same_geometry(*nu.domain())) {
    throw DomainMismatch("w2_exact: measures on different grids");
  }
  const double ma = total_mass(mu);
  const double mb = total_mass(nu);
  require_equal_mass(ma, mb, "w2_exact");

  TransportProblem p;
  p.geom = mu.domain().get();
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double s = mu.cell_mass(i);
    if (s > 0.0) {
      p.src_cell.push_back(i);
      p.supply.push_back(s);
    }
  }
  const double rescale = (mb > 0.0) ? ma / mb : 1.0;
  for (std::size_t j = 0; j < nu.size(); ++j) {
    const double d = nu.cell_mass(j) * rescale;
    if (d > 0.0) {
      p.snk_cell.push_back(j);
      p.demand.push_back(d);
    }
  }
  p.m = p.supply.size();
  p.n = p.demand.size();

  if (p.m == 0 || p.n == 0) {
    // Equal (zero) masses: the empty coupling is optimal.
    return {0.0, Coupling(mu.domain(), nu.domain(), {}), {0, p.m, p.n, 0}};
  }
  if (p.m * p.n > max_pairs) {
    throw ProblemTooLarge("w2_exact: cell-pair count exceeds the cap");
  }
  if (p.m * p.n <= (std::size_t{1} << 22)) {
    p.cache.resize(p.m * p.n);
    for (std::size_t i = 0; i < p.m; ++i) {
      for (std::size_t j = 0; j < p.n; ++j) {
        p.cache[i * p.n + j] =
            p.geom->geodesic_distance_sq(p.src_cell[i], p.snk_cell[j]);
      }
    }
    p.cached = true;
  }

  TransportSimplex simplex(p);
  simplex.solve();

  std::vector<Coupling::Entry> entries;
  for (const auto& f : simplex.flows()) {
    entries.push_back(
        {static_cast<std::uint32_t>(p.src_cell[static_cast<std::size_t>(f[0])]),
         static_cast<std::uint32_t>(p.snk_cell[static_cast<std::size_t>(f[1])]),
         f[2]});
  }
  W2Result out{0.0, Coupling(mu.domain(), nu.domain(), std::move(entries)),
               {simplex.pivots(), p.m, p.n, p.m + p.n - 1}};
  out.value = std::sqrt(std::max(coupling_cost(out.plan), 0.0));
  return out;
}

}  // namespace otcheck
