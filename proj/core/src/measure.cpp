#include <algorithm>
#include <cmath>
#include <numeric>

#include "otgeo/discrete.hpp"

namespace otgeo {

DiscreteMeasure DiscreteMeasure::create(std::vector<Vec> atoms, std::vector<double> weights) {
  if (atoms.size() != weights.size())
    throw DimensionMismatch("DiscreteMeasure: atoms/weights size mismatch");
  if (atoms.empty()) throw Error("DiscreteMeasure: empty measure");
  for (double w : weights)
    if (!(w > 0.0)) throw Error("DiscreteMeasure: weights must be positive");
  const int d = static_cast<int>(atoms[0].size());
  for (const auto& a : atoms)
    if (a.size() != d) throw DimensionMismatch("DiscreteMeasure: mixed atom dimensions");

  // Merge near-duplicates: lexicographic sort, then group adjacent atoms
  // within tolerance; first occurrence keeps its position.
  const size_t n = atoms.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t i, size_t j) {
    for (int k = 0; k < d; ++k) {
      if (atoms[i][k] < atoms[j][k]) return true;
      if (atoms[i][k] > atoms[j][k]) return false;
    }
    return i < j;
  });
  std::vector<size_t> owner(n);
  std::iota(owner.begin(), owner.end(), size_t{0});
  for (size_t t = 1; t < n; ++t) {
    const size_t prev = order[t - 1];
    const size_t cur = order[t];
    if ((atoms[cur] - atoms[owner[prev]]).norm() <= kDistinctTol)
      owner[cur] = owner[prev];
  }

  DiscreteMeasure m;
  m.raw_weight_sum_ = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<int> slot(n, -1);
  for (size_t i = 0; i < n; ++i) {
    size_t root = i;
    while (owner[root] != root) root = owner[root];
    if (slot[root] < 0) {
      slot[root] = static_cast<int>(m.atoms_.size());
      m.atoms_.push_back(atoms[root]);
      m.weights_.push_back(0.0);
    }
    if (root != i) ++m.merged_;
    m.weights_[static_cast<size_t>(slot[root])] += weights[i];
  }
  const double total = std::accumulate(m.weights_.begin(), m.weights_.end(), 0.0);
  for (auto& w : m.weights_) w /= total;
  return m;
}

TransportPlan::TransportPlan(MeasurePtr source, MeasurePtr target,
                             std::vector<PlanEntry> entries)
    : source_(std::move(source)), target_(std::move(target)), entries_(std::move(entries)) {
  if (!source_ || !target_) throw Error("TransportPlan: null measures");
  for (const auto& e : entries_) {
    if (e.i < 0 || e.i >= source_->size() || e.j < 0 || e.j >= target_->size())
      throw DimensionMismatch("TransportPlan: entry index out of range");
    if (!(e.mass > 0.0)) throw Error("TransportPlan: entry masses must be positive");
  }
  const double res = marginal_residual();
  if (res > kMarginalTol)
    throw InfeasibleMass("TransportPlan: marginal residual " + std::to_string(res));
}

double TransportPlan::marginal_residual() const {
  std::vector<double> row(static_cast<size_t>(source_->size()), 0.0);
  std::vector<double> col(static_cast<size_t>(target_->size()), 0.0);
  for (const auto& e : entries_) {
    row[static_cast<size_t>(e.i)] += e.mass;
    col[static_cast<size_t>(e.j)] += e.mass;
  }
  double worst = 0.0;
  for (int i = 0; i < source_->size(); ++i)
    worst = std::max(worst, std::abs(row[static_cast<size_t>(i)] - source_->weight(i)));
  for (int j = 0; j < target_->size(); ++j)
    worst = std::max(worst, std::abs(col[static_cast<size_t>(j)] - target_->weight(j)));
  return worst;
}

std::vector<std::pair<Vec, Vec>> TransportPlan::support_points() const {
  std::vector<std::pair<Vec, Vec>> pts;
  pts.reserve(entries_.size());
  for (const auto& e : entries_) pts.emplace_back(source_->atom(e.i), target_->atom(e.j));
  return pts;
}

double DualPotentials::objective(const DiscreteMeasure& mu, const DiscreteMeasure& nu) const {
  double s = 0.0;
  for (int i = 0; i < mu.size(); ++i) s += u_plus[static_cast<size_t>(i)] * mu.weight(i);
  for (int j = 0; j < nu.size(); ++j) s += u_minus[static_cast<size_t>(j)] * nu.weight(j);
  return s;
}

}  // namespace otgeo
