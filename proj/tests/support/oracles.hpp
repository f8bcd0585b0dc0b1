// Test-side oracles, independent of the library's computation paths:
// brute-force assignment minima, transportation-polytope vertex
// enumeration, a curvature-route evaluation of the fourth-order tensor,
// and synthetic cost families with known structure.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "otgeo/cost_zoo.hpp"
#include "otgeo/discrete.hpp"
#include "otgeo/mtw.hpp"

namespace otgeo::testing {

/// c(x, y) = -x^T A y + f(x) + g(y) with per-coordinate cubics
/// f(x) = sum fc_i x_i^3, g(y) = sum gc_j y_j^3. The mixed second
/// derivative block is exactly -A regardless of f and g.
class SeparableBilinearCost final : public Cost {
 public:
  SeparableBilinearCost(Mat A, Vec fc, Vec gc, Box dx, Box dy)
      : Cost("separable_bilinear", std::move(dx), std::move(dy), 4),
        A_(std::move(A)),
        fc_(std::move(fc)),
        gc_(std::move(gc)) {}

  double value(VecRef x, VecRef y) const override {
    double v = -x.dot(A_ * y);
    for (int i = 0; i < x.size(); ++i) v += fc_[i] * x[i] * x[i] * x[i];
    for (int j = 0; j < y.size(); ++j) v += gc_[j] * y[j] * y[j] * y[j];
    return v;
  }

  std::optional<double> partial(const Deriv& d, VecRef x, VecRef y) const override {
    const int ox = static_cast<int>(d.ix.size());
    const int oy = static_cast<int>(d.iy.size());
    if (ox == 1 && oy == 1) return -A_(d.ix[0], d.iy[0]);
    if (oy == 0) {
      const int i = d.ix[0];
      for (int t = 1; t < ox; ++t)
        if (d.ix[static_cast<size_t>(t)] != i) return 0.0;
      if (ox == 1) return 3.0 * fc_[i] * x[i] * x[i] - (A_.row(i) * y).value();
      if (ox == 2) return 6.0 * fc_[i] * x[i];
      if (ox == 3) return 6.0 * fc_[i];
      return 0.0;
    }
    if (ox == 0) {
      const int j = d.iy[0];
      for (int t = 1; t < oy; ++t)
        if (d.iy[static_cast<size_t>(t)] != j) return 0.0;
      if (oy == 1) return 3.0 * gc_[j] * y[j] * y[j] - (x.transpose() * A_.col(j)).value();
      if (oy == 2) return 6.0 * gc_[j] * y[j];
      if (oy == 3) return 6.0 * gc_[j];
      return 0.0;
    }
    return 0.0;  // mixed orders beyond (1,1) vanish
  }

 private:
  Mat A_;
  Vec fc_;
  Vec gc_;
};

/// Random matrix with prescribed rank and singular values in [0.5, 2].
inline Mat random_rank_matrix(int rows, int cols, int rank, std::mt19937_64& rng) {
  if (rank == 0) return Mat::Zero(rows, cols);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Mat U(rows, rank), V(cols, rank);
  for (int i = 0; i < rows; ++i)
    for (int r = 0; r < rank; ++r) U(i, r) = gauss(rng);
  for (int j = 0; j < cols; ++j)
    for (int r = 0; r < rank; ++r) V(j, r) = gauss(rng);
  const Mat Qu = Eigen::HouseholderQR<Mat>(U).householderQ() * Mat::Identity(rows, rank);
  const Mat Qv = Eigen::HouseholderQR<Mat>(V).householderQ() * Mat::Identity(cols, rank);
  std::uniform_real_distribution<double> sv(0.5, 2.0);
  Mat S = Mat::Zero(rank, rank);
  for (int r = 0; r < rank; ++r) S(r, r) = sv(rng);
  return Qu * S * Qv.transpose();
}

inline std::unique_ptr<SeparableBilinearCost> random_separable_cost(int nx, int ny, int rank,
                                                                    std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coef(-0.5, 0.5);
  Vec fc(nx), gc(ny);
  for (int i = 0; i < nx; ++i) fc[i] = coef(rng);
  for (int j = 0; j < ny; ++j) gc[j] = coef(rng);
  return std::make_unique<SeparableBilinearCost>(random_rank_matrix(nx, ny, rank, rng), fc,
                                                 gc, Box::cube(nx, -2.0, 2.0),
                                                 Box::cube(ny, -2.0, 2.0));
}

inline MeasurePtr random_measure(std::mt19937_64& rng, int count, const Box& box) {
  std::vector<Vec> atoms;
  std::vector<double> w;
  std::uniform_real_distribution<double> wdist(0.5, 1.5);
  for (int i = 0; i < count; ++i) {
    atoms.push_back(box.sample_interior(rng));
    w.push_back(wdist(rng));
  }
  return std::make_shared<DiscreteMeasure>(DiscreteMeasure::create(std::move(atoms), std::move(w)));
}

inline MeasurePtr uniform_measure(std::vector<Vec> atoms) {
  std::vector<double> w(atoms.size(), 1.0);
  return std::make_shared<DiscreteMeasure>(DiscreteMeasure::create(std::move(atoms), std::move(w)));
}

inline MeasurePtr measure_1d(std::vector<double> xs, std::vector<double> ws) {
  std::vector<Vec> atoms;
  for (double x : xs) {
    Vec v(1);
    v[0] = x;
    atoms.push_back(v);
  }
  return std::make_shared<DiscreteMeasure>(DiscreteMeasure::create(std::move(atoms), std::move(ws)));
}

/// Minimum assignment cost over all permutations (uniform weights 1/m).
inline double brute_force_assignment_min(const Mat& costs) {
  const int m = static_cast<int>(costs.rows());
  std::vector<int> perm(static_cast<size_t>(m));
  std::iota(perm.begin(), perm.end(), 0);
  double best = kInf;
  do {
    double total = 0.0;
    for (int i = 0; i < m; ++i) total += costs(i, perm[static_cast<size_t>(i)]);
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(m);
}

/// All feasible vertices of the transportation polytope, as flow maps
/// keyed by (i, j). Exponential; only for tiny instances.
inline std::vector<std::vector<PlanEntry>> enumerate_vertices(const std::vector<double>& a,
                                                              const std::vector<double>& b) {
  const int m = static_cast<int>(a.size());
  const int k = static_cast<int>(b.size());
  const int arcs = m * k;
  const int basis = m + k - 1;
  std::vector<std::vector<PlanEntry>> vertices;
  std::vector<int> pick(static_cast<size_t>(basis));
  std::iota(pick.begin(), pick.end(), 0);

  auto try_basis = [&](const std::vector<int>& sel) {
    // union-find acyclicity / spanning test
    std::vector<int> root(static_cast<size_t>(m + k));
    std::iota(root.begin(), root.end(), 0);
    std::function<int(int)> find = [&](int v) {
      while (root[static_cast<size_t>(v)] != v) v = root[static_cast<size_t>(v)] =
                                                       root[static_cast<size_t>(root[static_cast<size_t>(v)])];
      return v;
    };
    for (int arc : sel) {
      const int i = arc / k, j = arc % k;
      const int ri = find(i), rj = find(m + j);
      if (ri == rj) return;  // cycle
      root[static_cast<size_t>(ri)] = rj;
    }
    // leaf elimination for flows
    std::vector<double> need(static_cast<size_t>(m + k));
    for (int i = 0; i < m; ++i) need[static_cast<size_t>(i)] = a[static_cast<size_t>(i)];
    for (int j = 0; j < k; ++j) need[static_cast<size_t>(m + j)] = b[static_cast<size_t>(j)];
    std::vector<std::vector<int>> adj(static_cast<size_t>(m + k));
    for (int arc : sel) {
      adj[static_cast<size_t>(arc / k)].push_back(arc);
      adj[static_cast<size_t>(m + arc % k)].push_back(arc);
    }
    std::vector<double> flow(static_cast<size_t>(arcs), 0.0);
    std::vector<char> arc_done(static_cast<size_t>(arcs), 0);
    std::vector<int> degree(static_cast<size_t>(m + k), 0);
    for (int v = 0; v < m + k; ++v) degree[static_cast<size_t>(v)] = static_cast<int>(adj[static_cast<size_t>(v)].size());
    std::vector<int> stack;
    for (int v = 0; v < m + k; ++v)
      if (degree[static_cast<size_t>(v)] == 1) stack.push_back(v);
    int processed = 0;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      if (degree[static_cast<size_t>(v)] != 1) continue;
      int arc = -1;
      for (int cand : adj[static_cast<size_t>(v)])
        if (!arc_done[static_cast<size_t>(cand)]) arc = cand;
      if (arc < 0) continue;
      const int i = arc / k, j = arc % k;
      const int other = (v < m) ? m + j : i;
      flow[static_cast<size_t>(arc)] = need[static_cast<size_t>(v)];
      need[static_cast<size_t>(other)] -= need[static_cast<size_t>(v)];
      need[static_cast<size_t>(v)] = 0;
      arc_done[static_cast<size_t>(arc)] = 1;
      --degree[static_cast<size_t>(v)];
      --degree[static_cast<size_t>(other)];
      if (degree[static_cast<size_t>(other)] == 1) stack.push_back(other);
      ++processed;
    }
    if (processed != basis) return;
    std::vector<PlanEntry> entries;
    for (int arc = 0; arc < arcs; ++arc) {
      if (flow[static_cast<size_t>(arc)] < -1e-12) return;  // infeasible basis
      if (flow[static_cast<size_t>(arc)] > 1e-12)
        entries.push_back({arc / k, arc % k, flow[static_cast<size_t>(arc)]});
    }
    // dedupe
    for (const auto& v : vertices) {
      if (v.size() != entries.size()) continue;
      bool same = true;
      for (size_t t = 0; t < v.size(); ++t)
        if (v[t].i != entries[t].i || v[t].j != entries[t].j ||
            std::abs(v[t].mass - entries[t].mass) > 1e-9)
          same = false;
      if (same) return;
    }
    vertices.push_back(std::move(entries));
  };

  // iterate all basis-sized subsets of arcs
  while (true) {
    try_basis(pick);
    int pos = basis - 1;
    while (pos >= 0 && pick[static_cast<size_t>(pos)] == arcs - basis + pos) --pos;
    if (pos < 0) break;
    ++pick[static_cast<size_t>(pos)];
    for (int t = pos + 1; t < basis; ++t)
      pick[static_cast<size_t>(t)] = pick[static_cast<size_t>(t - 1)] + 1;
  }
  return vertices;
}

/// A random feasible vertex: north-west corner rule on independently
/// permuted atom orders.
inline std::vector<PlanEntry> random_vertex(const std::vector<double>& a,
                                            const std::vector<double>& b,
                                            std::mt19937_64& rng) {
  std::vector<int> pi(a.size()), pj(b.size());
  std::iota(pi.begin(), pi.end(), 0);
  std::iota(pj.begin(), pj.end(), 0);
  std::shuffle(pi.begin(), pi.end(), rng);
  std::shuffle(pj.begin(), pj.end(), rng);
  std::vector<PlanEntry> entries;
  size_t p = 0, q = 0;
  double ra = a[static_cast<size_t>(pi[0])], rb = b[static_cast<size_t>(pj[0])];
  while (p < pi.size() && q < pj.size()) {
    const double t = std::min(ra, rb);
    if (t > 0) entries.push_back({pi[p], pj[q], t});
    ra -= t;
    rb -= t;
    if (ra == 0.0 && ++p < pi.size()) ra = a[static_cast<size_t>(pi[p])];
    if (rb == 0.0 && ++q < pj.size()) rb = b[static_cast<size_t>(pj[q])];
  }
  return entries;
}

/// Curvature-route evaluation of the lightlike sectional quadratic form:
/// R(P,Q,P,Q) from finite differences of the connection coefficients.
/// Under this sign convention the fourth-order tensor contraction equals
/// 2 R((p,0),(0,q),(p,0),(0,q)).
inline double curvature_quadratic_form(const Cost& c, const BasePoint& base, VecRef P,
                                       VecRef Q, double outer_step = 1e-4) {
  const int dim = base.dim();
  const Vec z = base.joint();
  auto gamma_at = [&](VecRef zz) {
    BasePoint b;
    b.x0 = zz.head(c.dim_x());
    b.y0 = zz.tail(c.dim_y());
    return christoffel(c, b);
  };
  const ChristoffelTensor G0 = gamma_at(z);
  // dG[mu][rho](nu, sigma) = d Gamma^rho_{nu sigma} / d z_mu
  std::vector<ChristoffelTensor> dG(static_cast<size_t>(dim));
  for (int mu = 0; mu < dim; ++mu) {
    Vec zp = z, zm = z;
    const double h = outer_step * std::max(1.0, std::abs(z[mu]));
    zp[mu] += h;
    zm[mu] -= h;
    const ChristoffelTensor gp = gamma_at(zp);
    const ChristoffelTensor gm = gamma_at(zm);
    dG[static_cast<size_t>(mu)].gamma.resize(static_cast<size_t>(dim));
    for (int r = 0; r < dim; ++r)
      dG[static_cast<size_t>(mu)].gamma[static_cast<size_t>(r)] =
          (gp.gamma[static_cast<size_t>(r)] - gm.gamma[static_cast<size_t>(r)]) / (2.0 * h);
  }
  const Mat H = hessian_h(c, base).matrix;
  // R^rho_{sigma mu nu} = d_mu G^rho_{nu sigma} - d_nu G^rho_{mu sigma}
  //                        + G^rho_{mu lam} G^lam_{nu sigma} - G^rho_{nu lam} G^lam_{mu sigma}
  auto riemann_up = [&](int rho, int sigma, int mu, int nu) {
    double r = dG[static_cast<size_t>(mu)].gamma[static_cast<size_t>(rho)](nu, sigma) -
               dG[static_cast<size_t>(nu)].gamma[static_cast<size_t>(rho)](mu, sigma);
    for (int lam = 0; lam < dim; ++lam)
      r += G0.gamma[static_cast<size_t>(rho)](mu, lam) * G0.gamma[static_cast<size_t>(lam)](nu, sigma) -
           G0.gamma[static_cast<size_t>(rho)](nu, lam) * G0.gamma[static_cast<size_t>(lam)](mu, sigma);
    return r;
  };
  double total = 0.0;
  for (int rho = 0; rho < dim; ++rho)
    for (int sigma = 0; sigma < dim; ++sigma)
      for (int mu = 0; mu < dim; ++mu)
        for (int nu = 0; nu < dim; ++nu) {
          double lowered = 0.0;
          for (int e = 0; e < dim; ++e) lowered += H(rho, e) * riemann_up(e, sigma, mu, nu);
          total += lowered * P[rho] * Q[sigma] * P[mu] * Q[nu];
        }
  return total;
}

}  // namespace otgeo::testing
