#include <algorithm>
#include <cmath>
#include <deque>
#include <vector>

#include "otgeo/discrete.hpp"

namespace otgeo {
namespace detail {

/// Primal network simplex on the dense bipartite transportation graph.
/// Spanning-tree basis, Dantzig pricing with lexicographic tie-breaks,
/// and a permanent switch to Bland's rule after a long degenerate run.
struct SimplexSolution {
  std::vector<PlanEntry> entries;
  std::vector<double> u;
  std::vector<double> v;
  long pivots = 0;
};

class TransportSimplex {
 public:
  TransportSimplex(const Mat& costs, const std::vector<double>& a,
                   const std::vector<double>& b)
      : c_(costs),
        m_(static_cast<int>(a.size())),
        k_(static_cast<int>(b.size())),
        a_(a),
        b_(b) {
    const double pivot_scale = 1.0;  // costs are O(1)..O(1e3); absolute tol is stable
    pivtol_ = 1e-11 * pivot_scale;
  }

  SimplexSolution solve() {
    build_initial_basis();
    rebuild_tree();
    const long max_pivots = 2000L * (m_ + k_) + 10000L;
    long degenerate_run = 0;
    bool bland = false;
    long pivots = 0;
    while (true) {
      if (pivots > max_pivots) throw Error("network simplex: pivot limit exceeded");
      int ei = -1, ej = -1;
      if (!find_entering(bland, ei, ej)) break;
      const double theta = pivot(ei, ej);
      ++pivots;
      if (theta <= 0.0) {
        if (++degenerate_run > 20L * (m_ + k_)) bland = true;
      } else {
        degenerate_run = 0;
      }
    }
    SimplexSolution sol;
    sol.pivots = pivots;
    sol.u.assign(u_.begin(), u_.end());
    sol.v.assign(v_.begin(), v_.end());
    for (const auto& arc : arcs_)
      if (arc.flow > 0.0) sol.entries.push_back({arc.i, arc.j, arc.flow});
    std::sort(sol.entries.begin(), sol.entries.end(), [](const PlanEntry& x, const PlanEntry& y) {
      return x.i != y.i ? x.i < y.i : x.j < y.j;
    });
    return sol;
  }

 private:
  struct Arc {
    int i, j;
    double flow;
  };

  void build_initial_basis() {
    // North-west corner rule over index order; ties advance the source
    // side, leaving an explicit degenerate arc so the staircase stays a
    // spanning tree with m + k - 1 arcs.
    arcs_.clear();
    std::vector<double> ra = a_, rb = b_;
    int i = 0, j = 0;
    while (true) {
      const double t = std::min(ra[static_cast<size_t>(i)], rb[static_cast<size_t>(j)]);
      arcs_.push_back({i, j, t});
      ra[static_cast<size_t>(i)] -= t;
      rb[static_cast<size_t>(j)] -= t;
      if (i == m_ - 1 && j == k_ - 1) break;
      if (ra[static_cast<size_t>(i)] == 0.0 && i < m_ - 1)
        ++i;
      else
        ++j;
    }
  }

  int node_of_source(int i) const { return i; }
  int node_of_target(int j) const { return m_ + j; }

  void rebuild_tree() {
    const int n = m_ + k_;
    adj_.assign(static_cast<size_t>(n), {});
    for (size_t t = 0; t < arcs_.size(); ++t) {
      adj_[static_cast<size_t>(node_of_source(arcs_[t].i))].push_back(static_cast<int>(t));
      adj_[static_cast<size_t>(node_of_target(arcs_[t].j))].push_back(static_cast<int>(t));
    }
    parent_.assign(static_cast<size_t>(n), -1);
    parent_arc_.assign(static_cast<size_t>(n), -1);
    depth_.assign(static_cast<size_t>(n), 0);
    u_.assign(static_cast<size_t>(m_), 0.0);
    v_.assign(static_cast<size_t>(k_), 0.0);
    std::deque<int> queue{0};
    std::vector<char> seen(static_cast<size_t>(n), 0);
    seen[0] = 1;
    while (!queue.empty()) {
      const int node = queue.front();
      queue.pop_front();
      for (int t : adj_[static_cast<size_t>(node)]) {
        const Arc& arc = arcs_[static_cast<size_t>(t)];
        const int other =
            node == node_of_source(arc.i) ? node_of_target(arc.j) : node_of_source(arc.i);
        if (seen[static_cast<size_t>(other)]) continue;
        seen[static_cast<size_t>(other)] = 1;
        parent_[static_cast<size_t>(other)] = node;
        parent_arc_[static_cast<size_t>(other)] = t;
        depth_[static_cast<size_t>(other)] = depth_[static_cast<size_t>(node)] + 1;
        if (other >= m_)
          v_[static_cast<size_t>(other - m_)] = c_(arc.i, arc.j) - u_[static_cast<size_t>(arc.i)];
        else
          u_[static_cast<size_t>(other)] = c_(arc.i, arc.j) - v_[static_cast<size_t>(arc.j)];
        queue.push_back(other);
      }
    }
  }

  bool find_entering(bool bland, int& ei, int& ej) const {
    double best = -pivtol_;
    for (int i = 0; i < m_; ++i) {
      const double ui = u_[static_cast<size_t>(i)];
      for (int j = 0; j < k_; ++j) {
        const double r = c_(i, j) - ui - v_[static_cast<size_t>(j)];
        if (r < -pivtol_) {
          if (bland) {
            ei = i;
            ej = j;
            return true;
          }
          if (r < best) {
            best = r;
            ei = i;
            ej = j;
          }
        }
      }
    }
    return ei >= 0;
  }

  /// Push flow around the cycle closed by the entering arc; returns the
  /// amount moved (0 for a degenerate pivot).
  double pivot(int ei, int ej) {
    const int na = node_of_source(ei);
    const int nb = node_of_target(ej);
    // Tree arcs on the cycle, with direction relative to added flow.
    struct CycleArc {
      int arc;
      bool forward;
    };
    std::vector<CycleArc> cycle;
    int x = na, y = nb;
    std::vector<CycleArc> up_a, up_b;
    while (x != y) {
      if (depth_[static_cast<size_t>(x)] >= depth_[static_cast<size_t>(y)]) {
        const int t = parent_arc_[static_cast<size_t>(x)];
        // Walking x up from the entering arc's source endpoint: the
        // cycle traverses parent -> x, so a source node's arc runs
        // target->source (backward).
        up_a.push_back({t, x >= m_});
        x = parent_[static_cast<size_t>(x)];
      } else {
        const int t = parent_arc_[static_cast<size_t>(y)];
        // Walking y up from the target endpoint: traversal is y -> parent.
        up_b.push_back({t, y < m_});
        y = parent_[static_cast<size_t>(y)];
      }
    }
    cycle = up_b;
    cycle.insert(cycle.end(), up_a.begin(), up_a.end());

    double theta = kInf;
    for (const auto& ca : cycle)
      if (!ca.forward) theta = std::min(theta, arcs_[static_cast<size_t>(ca.arc)].flow);
    if (!(theta < kInf)) throw Error("network simplex: no leaving arc on cycle");

    int leaving = -1;
    for (const auto& ca : cycle) {
      if (ca.forward) continue;
      const Arc& arc = arcs_[static_cast<size_t>(ca.arc)];
      if (arc.flow == theta) {
        if (leaving < 0) {
          leaving = ca.arc;
        } else {
          const Arc& cur = arcs_[static_cast<size_t>(leaving)];
          if (arc.i < cur.i || (arc.i == cur.i && arc.j < cur.j)) leaving = ca.arc;
        }
      }
    }
    for (const auto& ca : cycle)
      arcs_[static_cast<size_t>(ca.arc)].flow += ca.forward ? theta : -theta;
    arcs_[static_cast<size_t>(leaving)] = {ei, ej, theta};
    rebuild_tree();
    return theta;
  }

  const Mat& c_;
  int m_, k_;
  std::vector<double> a_, b_;
  double pivtol_;
  std::vector<Arc> arcs_;
  std::vector<std::vector<int>> adj_;
  std::vector<int> parent_, parent_arc_, depth_;
  std::vector<double> u_, v_;
};

SimplexSolution network_simplex(const Mat& costs, const std::vector<double>& a,
                                const std::vector<double>& b) {
  double sa = 0.0, sb = 0.0;
  for (double w : a) sa += w;
  for (double w : b) sb += w;
  if (std::abs(sa - sb) > 1e-9)
    throw InfeasibleMass("network simplex: marginal masses differ by " +
                         std::to_string(std::abs(sa - sb)));
  TransportSimplex simplex(costs, a, b);
  return simplex.solve();
}

}  // namespace detail
}  // namespace otgeo
