#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "otgeo/discrete.hpp"

namespace otgeo {

namespace detail {
struct SimplexSolution {
  std::vector<PlanEntry> entries;
  std::vector<double> u;
  std::vector<double> v;
  long pivots = 0;
};
SimplexSolution network_simplex(const Mat& costs, const std::vector<double>& a,
                                const std::vector<double>& b);
}  // namespace detail

Mat cost_matrix(const Cost& c, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  Mat out(mu.size(), nu.size());
  for (int i = 0; i < mu.size(); ++i)
    for (int j = 0; j < nu.size(); ++j) out(i, j) = c.evaluate(mu.atom(i), nu.atom(j));
  return out;
}

double monge_cost(const Cost& c, const std::vector<int>& assignment,
                  const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (static_cast<int>(assignment.size()) != mu.size())
    throw DimensionMismatch("monge_cost: assignment must be total over the source");
  double total = 0.0;
  for (int i = 0; i < mu.size(); ++i) {
    const int j = assignment[static_cast<size_t>(i)];
    if (j < 0 || j >= nu.size())
      throw DimensionMismatch("monge_cost: target index out of range");
    total += mu.weight(i) * c.evaluate(mu.atom(i), nu.atom(j));
  }
  return total;
}

double kantorovich_cost(const Cost& c, const TransportPlan& plan) {
  double total = 0.0;
  for (const auto& e : plan.entries())
    total += e.mass * c.evaluate(plan.source().atom(e.i), plan.target().atom(e.j));
  return total;
}

double kantorovich_cost(const Mat& costs, const TransportPlan& plan) {
  double total = 0.0;
  for (const auto& e : plan.entries()) total += e.mass * costs(e.i, e.j);
  return total;
}

TransportPlan solve_primal(const Mat& costs, MeasurePtr mu, MeasurePtr nu) {
  if (costs.rows() != mu->size() || costs.cols() != nu->size())
    throw DimensionMismatch("solve_primal: cost matrix shape mismatch");
  if (!costs.allFinite()) throw Error("solve_primal: non-finite pairwise cost");
  auto sol = detail::network_simplex(costs, mu->weights(), nu->weights());
  return TransportPlan(std::move(mu), std::move(nu), std::move(sol.entries));
}

TransportPlan solve_primal(const Cost& c, MeasurePtr mu, MeasurePtr nu) {
  const Mat costs = cost_matrix(c, *mu, *nu);
  return solve_primal(costs, std::move(mu), std::move(nu));
}

DualPotentials solve_dual(const Mat& costs, const TransportPlan& plan) {
  const int m = plan.source().size();
  const int k = plan.target().size();
  const double scale = std::max(1.0, costs.cwiseAbs().maxCoeff());

  // Adjacency over the support graph.
  std::vector<std::vector<int>> adj(static_cast<size_t>(m + k));
  const auto& entries = plan.entries();
  for (size_t t = 0; t < entries.size(); ++t) {
    adj[static_cast<size_t>(entries[t].i)].push_back(static_cast<int>(t));
    adj[static_cast<size_t>(m + entries[t].j)].push_back(static_cast<int>(t));
  }

  DualPotentials duals;
  duals.u_plus.assign(static_cast<size_t>(m), 0.0);
  duals.u_minus.assign(static_cast<size_t>(k), 0.0);
  std::vector<int> comp(static_cast<size_t>(m + k), -1);
  int ncomp = 0;

  // Tight potentials per connected component, anchored at u_minus = 0 on
  // the component's first target node (so one-atom instances carry the
  // whole potential on the source side).
  for (int anchor = m; anchor < m + k; ++anchor) {
    if (comp[static_cast<size_t>(anchor)] >= 0) continue;
    const int id = ncomp++;
    std::vector<int> stack{anchor};
    comp[static_cast<size_t>(anchor)] = id;
    duals.u_minus[static_cast<size_t>(anchor - m)] = 0.0;
    while (!stack.empty()) {
      const int node = stack.back();
      stack.pop_back();
      for (int t : adj[static_cast<size_t>(node)]) {
        const PlanEntry& e = entries[static_cast<size_t>(t)];
        const int other = node < m ? m + e.j : e.i;
        if (comp[static_cast<size_t>(other)] < 0) {
          comp[static_cast<size_t>(other)] = id;
          if (other < m)
            duals.u_plus[static_cast<size_t>(other)] =
                costs(e.i, e.j) - duals.u_minus[static_cast<size_t>(e.j)];
          else
            duals.u_minus[static_cast<size_t>(other - m)] =
                costs(e.i, e.j) - duals.u_plus[static_cast<size_t>(e.i)];
          stack.push_back(other);
        } else {
          const double res = std::abs(costs(e.i, e.j) -
                                      duals.u_plus[static_cast<size_t>(e.i)] -
                                      duals.u_minus[static_cast<size_t>(e.j)]);
          if (res > 1e-7 * scale)
            throw DisconnectedSupport(
                "solve_dual: support cycle carries no consistent potentials");
        }
      }
    }
  }

  if (ncomp > 1) {
    // Components may be shifted (u += t, v -= t) without breaking
    // tightness; choose shifts so cross-component feasibility holds:
    // t_cj - t_ci >= max over (i in ci, j in cj) of u_i + v_j - c_ij.
    Mat g = Mat::Constant(ncomp, ncomp, -kInf);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < k; ++j) {
        const int ci = comp[static_cast<size_t>(i)];
        const int cj = comp[static_cast<size_t>(m + j)];
        if (ci == cj) continue;
        g(ci, cj) = std::max(g(ci, cj), duals.u_plus[static_cast<size_t>(i)] +
                                            duals.u_minus[static_cast<size_t>(j)] -
                                            costs(i, j));
      }
    std::vector<double> shift(static_cast<size_t>(ncomp), 0.0);
    const double relax_eps = 1e-12 * scale;
    for (int round = 0; round < ncomp; ++round) {
      bool changed = false;
      for (int ci = 0; ci < ncomp; ++ci)
        for (int cj = 0; cj < ncomp; ++cj) {
          if (ci == cj || !std::isfinite(g(ci, cj))) continue;
          const double need = shift[static_cast<size_t>(ci)] + g(ci, cj);
          if (need > shift[static_cast<size_t>(cj)] + relax_eps) {
            shift[static_cast<size_t>(cj)] = need;
            changed = true;
          }
        }
      if (!changed) break;
      if (round == ncomp - 1)
        throw DisconnectedSupport(
            "solve_dual: component shifts do not converge; plan is not optimal");
    }
    for (int i = 0; i < m; ++i)
      duals.u_plus[static_cast<size_t>(i)] += shift[static_cast<size_t>(comp[static_cast<size_t>(i)])];
    for (int j = 0; j < k; ++j)
      duals.u_minus[static_cast<size_t>(j)] -=
          shift[static_cast<size_t>(comp[static_cast<size_t>(m + j)])];
  }
  return duals;
}

DualPotentials solve_dual(const Cost& c, const TransportPlan& plan) {
  return solve_dual(cost_matrix(c, plan.source(), plan.target()), plan);
}

DualDiagnostics dual_diagnostics(const Mat& costs, const TransportPlan& plan,
                                 const DualPotentials& duals) {
  DualDiagnostics d;
  for (int i = 0; i < plan.source().size(); ++i)
    for (int j = 0; j < plan.target().size(); ++j)
      d.feasibility_violation =
          std::max(d.feasibility_violation, duals.u_plus[static_cast<size_t>(i)] +
                                                duals.u_minus[static_cast<size_t>(j)] -
                                                costs(i, j));
  for (const auto& e : plan.entries())
    d.slackness_residual =
        std::max(d.slackness_residual,
                 std::abs(costs(e.i, e.j) - duals.u_plus[static_cast<size_t>(e.i)] -
                          duals.u_minus[static_cast<size_t>(e.j)]));
  return d;
}

// ---------------------------------------------------------------- c-cyclical monotonicity

namespace {

struct CcmContext {
  const Mat& w;  // w(a, b) = c(x_b, y_a) - c(x_a, y_a)
  int n;
  int K;
  double tol;
  long budget;
  long visited = 0;
  std::vector<int> path;
  std::vector<char> used;
  std::vector<int> violation;
  double gap = 0.0;
  bool found = false;
};

void ccm_dfs(CcmContext& ctx, int start, int current, double sum) {
  if (ctx.found) return;
  if (++ctx.visited > ctx.budget)
    throw ComplexityGuard("check_ccm: exact enumeration exceeded node budget");
  const int len = static_cast<int>(ctx.path.size());
  if (len >= 2) {
    const double close = sum + ctx.w(current, start);
    if (close < -ctx.tol) {
      ctx.violation = ctx.path;
      ctx.gap = close;
      ctx.found = true;
      return;
    }
  }
  if (len == ctx.K) return;
  for (int next = start + 1; next < ctx.n; ++next) {
    if (ctx.used[static_cast<size_t>(next)]) continue;
    ctx.used[static_cast<size_t>(next)] = 1;
    ctx.path.push_back(next);
    ccm_dfs(ctx, start, next, sum + ctx.w(current, next));
    ctx.path.pop_back();
    ctx.used[static_cast<size_t>(next)] = 0;
    if (ctx.found) return;
  }
}

}  // namespace

CycleCertificate check_ccm(const std::function<double(VecRef, VecRef)>& cost,
                           const std::vector<std::pair<Vec, Vec>>& support, int K,
                           const std::string& mode, const CcmOptions& opts) {
  if (K < 2) throw Error("check_ccm: K must be >= 2");
  const int n = static_cast<int>(support.size());
  CycleCertificate cert;
  cert.K = K;
  cert.mode = mode;
  cert.node_budget = opts.node_budget;
  if (n < 2) return cert;

  // Arc weight a -> b: replace the x serving y_a with x_b.
  Mat w(n, n);
  for (int a = 0; a < n; ++a) {
    const double base = cost(support[static_cast<size_t>(a)].first,
                             support[static_cast<size_t>(a)].second);
    for (int b = 0; b < n; ++b)
      w(a, b) = cost(support[static_cast<size_t>(b)].first,
                     support[static_cast<size_t>(a)].second) -
                base;
  }

  if (mode == "exact") {
    CcmContext ctx{w, n, K, opts.violation_tol, opts.node_budget};
    ctx.used.assign(static_cast<size_t>(n), 0);
    for (int s = 0; s < n && !ctx.found; ++s) {
      ctx.path = {s};
      ctx.used.assign(static_cast<size_t>(n), 0);
      ctx.used[static_cast<size_t>(s)] = 1;
      ccm_dfs(ctx, s, s, 0.0);
    }
    cert.nodes_visited = ctx.visited;
    if (ctx.found) {
      cert.status = CycleCertificate::Status::violated;
      cert.violation = ctx.violation;
      cert.gap = ctx.gap;
    }
    return cert;
  }

  if (mode != "local_search") throw Error("check_ccm: unknown mode '" + mode + "'");
  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<int> pick(0, n - 1);
  double best_gap = 0.0;
  std::vector<int> best_cycle;
  long visited = 0;
  for (int r = 0; r < opts.restarts; ++r) {
    const int start = pick(rng);
    std::vector<int> path{start};
    std::vector<char> used(static_cast<size_t>(n), 0);
    used[static_cast<size_t>(start)] = 1;
    double sum = 0.0;
    int current = start;
    for (int step = 1; step < K; ++step) {
      // Close now if beneficial, else extend along the best arc.
      int best_next = -1;
      double best_ext = kInf;
      for (int cand = 0; cand < n; ++cand) {
        if (used[static_cast<size_t>(cand)]) continue;
        ++visited;
        const double ext = w(current, cand);
        if (ext < best_ext) {
          best_ext = ext;
          best_next = cand;
        }
      }
      if (best_next < 0) break;
      path.push_back(best_next);
      used[static_cast<size_t>(best_next)] = 1;
      sum += best_ext;
      current = best_next;
      const double close = sum + w(current, start);
      if (close < best_gap) {
        best_gap = close;
        best_cycle = path;
      }
    }
  }
  cert.nodes_visited = visited;
  if (best_gap < -opts.violation_tol) {
    cert.status = CycleCertificate::Status::violated;
    cert.violation = best_cycle;
    cert.gap = best_gap;
  }
  return cert;
}

CycleCertificate check_ccm(const Cost& c, const std::vector<std::pair<Vec, Vec>>& support,
                           int K, const std::string& mode, const CcmOptions& opts) {
  return check_ccm(
      [&c](VecRef x, VecRef y) { return c.evaluate(x, y); }, support, K, mode, opts);
}

// ---------------------------------------------------------------- 1-D structure

TransportPlan monotone_rearrangement_1d(MeasurePtr mu, MeasurePtr nu) {
  if (mu->dim() != 1 || nu->dim() != 1)
    throw DimensionMismatch("monotone_rearrangement_1d: measures must be 1-D");
  std::vector<int> src(static_cast<size_t>(mu->size()));
  std::vector<int> tgt(static_cast<size_t>(nu->size()));
  std::iota(src.begin(), src.end(), 0);
  std::iota(tgt.begin(), tgt.end(), 0);
  std::sort(src.begin(), src.end(),
            [&](int a, int b) { return mu->atom(a)[0] < mu->atom(b)[0]; });
  std::sort(tgt.begin(), tgt.end(),
            [&](int a, int b) { return nu->atom(a)[0] < nu->atom(b)[0]; });

  std::vector<PlanEntry> entries;
  size_t p = 0, q = 0;
  double ra = mu->weight(src[0]);
  double rb = nu->weight(tgt[0]);
  while (p < src.size() && q < tgt.size()) {
    const double t = std::min(ra, rb);
    if (t > 0.0) entries.push_back({src[p], tgt[q], t});
    ra -= t;
    rb -= t;
    if (ra == 0.0) {
      if (++p < src.size()) ra = mu->weight(src[p]);
    }
    if (rb == 0.0) {
      if (++q < tgt.size()) rb = nu->weight(tgt[q]);
    }
  }
  std::sort(entries.begin(), entries.end(), [](const PlanEntry& a, const PlanEntry& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  return TransportPlan(std::move(mu), std::move(nu), std::move(entries));
}

SpacelikeReport spacelike_support_check(const Cost& c,
                                        const std::vector<std::pair<Vec, Vec>>& support,
                                        double radius) {
  SpacelikeReport rep;
  const int n = static_cast<int>(support.size());
  std::vector<std::optional<Mat>> cross(static_cast<size_t>(n));
  for (int a = 0; a < n; ++a) {
    try {
      cross[static_cast<size_t>(a)] =
          c.cross_hessian(support[static_cast<size_t>(a)].first,
                          support[static_cast<size_t>(a)].second);
    } catch (const DomainError&) {
      // base pair on/near the excluded set: no tangent data there
    }
  }
  for (int a = 0; a < n; ++a) {
    if (!cross[static_cast<size_t>(a)]) continue;
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      const Vec dx = support[static_cast<size_t>(b)].first - support[static_cast<size_t>(a)].first;
      const Vec dy =
          support[static_cast<size_t>(b)].second - support[static_cast<size_t>(a)].second;
      const double v2 = dx.squaredNorm() + dy.squaredNorm();
      if (v2 == 0.0 || v2 > radius * radius) continue;
      const double q = -dx.dot(*cross[static_cast<size_t>(a)] * dy);
      ++rep.pairs_checked;
      if (q / v2 < rep.min_normalized) {
        rep.min_normalized = q / v2;
        rep.min_raw = q;
        rep.witness_a = a;
        rep.witness_b = b;
      }
    }
  }
  return rep;
}

DimensionEstimate local_dimension_estimate(const std::vector<Vec>& points, double radius,
                                           double threshold) {
  DimensionEstimate est;
  const int n = static_cast<int>(points.size());
  if (n == 0) return est;
  const int dim = static_cast<int>(points[0].size());
  est.min_neighbors = dim + 2;
  est.per_point.assign(static_cast<size_t>(n), -1);
  for (int a = 0; a < n; ++a) {
    std::vector<int> nbrs;
    for (int b = 0; b < n; ++b)
      if (b != a && (points[static_cast<size_t>(b)] - points[static_cast<size_t>(a)]).norm() <=
                        radius)
        nbrs.push_back(b);
    if (static_cast<int>(nbrs.size()) < est.min_neighbors) {
      ++est.skipped;
      continue;
    }
    Mat centered(static_cast<long>(nbrs.size()), dim);
    Vec mean = Vec::Zero(dim);
    for (int b : nbrs) mean += points[static_cast<size_t>(b)];
    mean /= static_cast<double>(nbrs.size());
    for (size_t t = 0; t < nbrs.size(); ++t)
      centered.row(static_cast<long>(t)) =
          (points[static_cast<size_t>(nbrs[t])] - mean).transpose();
    Eigen::JacobiSVD<Mat> svd(centered);
    const Vec sv = svd.singularValues();
    const double smax = sv.maxCoeff();
    int d = 0;
    for (int t = 0; t < sv.size(); ++t)
      if (smax > 0.0 && sv[t] > threshold * smax) ++d;
    est.per_point[static_cast<size_t>(a)] = d;
    est.max_dim = std::max(est.max_dim, d);
  }
  return est;
}

RotatedLipschitzReport rotated_lipschitz_check_1d(
    const std::vector<std::pair<Vec, Vec>>& support) {
  RotatedLipschitzReport rep;
  const int n = static_cast<int>(support.size());
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int a = 0; a < n; ++a) {
    if (support[static_cast<size_t>(a)].first.size() != 1 ||
        support[static_cast<size_t>(a)].second.size() != 1)
      throw DimensionMismatch("rotated_lipschitz_check_1d: support must be 1-D pairs");
    for (int b = a + 1; b < n; ++b) {
      const double dxv = support[static_cast<size_t>(b)].first[0] -
                         support[static_cast<size_t>(a)].first[0];
      const double dyv = support[static_cast<size_t>(b)].second[0] -
                         support[static_cast<size_t>(a)].second[0];
      const double du = (dxv + dyv) * inv_sqrt2;
      const double dv = (dyv - dxv) * inv_sqrt2;
      double ratio;
      if (du == 0.0)
        ratio = dv == 0.0 ? 0.0 : kInf;
      else
        ratio = std::abs(dv) / std::abs(du);
      if (ratio > rep.max_ratio) {
        rep.max_ratio = ratio;
        rep.witness_a = a;
        rep.witness_b = b;
      }
    }
  }
  return rep;
}

Decomposition graph_antigraph_decompose(const TransportPlan& plan) {
  Decomposition out;
  const auto& entries = plan.entries();
  std::vector<int> src_degree(static_cast<size_t>(plan.source().size()), 0);
  for (const auto& e : entries) ++src_degree[static_cast<size_t>(e.i)];
  std::vector<int> tgt_remaining(static_cast<size_t>(plan.target().size()), 0);
  for (const auto& e : entries)
    if (src_degree[static_cast<size_t>(e.i)] != 1) ++tgt_remaining[static_cast<size_t>(e.j)];
  for (const auto& e : entries) {
    if (src_degree[static_cast<size_t>(e.i)] == 1) {
      out.graph.push_back(e);
    } else if (tgt_remaining[static_cast<size_t>(e.j)] == 1) {
      out.antigraph.push_back(e);
    } else {
      out.residual.push_back(e);
      out.residual_mass += e.mass;
    }
  }
  return out;
}

MongeExtraction extract_monge_map(const TransportPlan& plan, double tolerance) {
  MongeExtraction out;
  const int m = plan.source().size();
  std::vector<int> best_j(static_cast<size_t>(m), -1);
  std::vector<double> best_mass(static_cast<size_t>(m), 0.0);
  std::vector<double> total(static_cast<size_t>(m), 0.0);
  for (const auto& e : plan.entries()) {
    total[static_cast<size_t>(e.i)] += e.mass;
    if (e.mass > best_mass[static_cast<size_t>(e.i)]) {
      best_mass[static_cast<size_t>(e.i)] = e.mass;
      best_j[static_cast<size_t>(e.i)] = e.j;
    }
  }
  std::vector<int> assignment(static_cast<size_t>(m), -1);
  for (int i = 0; i < m; ++i) {
    assignment[static_cast<size_t>(i)] = best_j[static_cast<size_t>(i)];
    if (best_mass[static_cast<size_t>(i)] < (1.0 - tolerance) * total[static_cast<size_t>(i)])
      out.split_sources.push_back(i);
  }
  if (out.split_sources.empty()) out.assignment = std::move(assignment);
  return out;
}

}  // namespace otgeo
