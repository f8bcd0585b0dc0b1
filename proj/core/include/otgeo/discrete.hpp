#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "otgeo/cost.hpp"
#include "otgeo/crossdiff.hpp"

namespace otgeo {

/// Weighted atoms in R^n (or angles on a circle chart). Construction
/// merges atoms closer than the distinctness tolerance and normalizes
/// the weights to unit total mass.
class DiscreteMeasure {
 public:
  static constexpr double kDistinctTol = 1e-12;

  DiscreteMeasure() = default;
  /// Merge duplicates, drop nothing else, normalize. `raw_weight_sum`
  /// keeps the pre-normalization total for load-time warnings.
  static DiscreteMeasure create(std::vector<Vec> atoms, std::vector<double> weights);

  int size() const { return static_cast<int>(atoms_.size()); }
  int dim() const { return atoms_.empty() ? 0 : static_cast<int>(atoms_[0].size()); }
  const Vec& atom(int i) const { return atoms_[static_cast<size_t>(i)]; }
  double weight(int i) const { return weights_[static_cast<size_t>(i)]; }
  const std::vector<Vec>& atoms() const { return atoms_; }
  const std::vector<double>& weights() const { return weights_; }
  double raw_weight_sum() const { return raw_weight_sum_; }
  int merged_count() const { return merged_; }

 private:
  std::vector<Vec> atoms_;
  std::vector<double> weights_;
  double raw_weight_sum_ = 1.0;
  int merged_ = 0;
};

using MeasurePtr = std::shared_ptr<const DiscreteMeasure>;

struct PlanEntry {
  int i;  // source atom
  int j;  // target atom
  double mass;
};

/// A feasible coupling: sparse entries with marginal bookkeeping.
class TransportPlan {
 public:
  static constexpr double kMarginalTol = 1e-10;

  TransportPlan() = default;
  /// Validates positivity and the marginal sums.
  TransportPlan(MeasurePtr source, MeasurePtr target, std::vector<PlanEntry> entries);

  const DiscreteMeasure& source() const { return *source_; }
  const DiscreteMeasure& target() const { return *target_; }
  MeasurePtr source_ptr() const { return source_; }
  MeasurePtr target_ptr() const { return target_; }
  const std::vector<PlanEntry>& entries() const { return entries_; }

  /// Max violation of the marginal constraints.
  double marginal_residual() const;

  /// The support as explicit (x, y) point pairs.
  std::vector<std::pair<Vec, Vec>> support_points() const;

 private:
  MeasurePtr source_;
  MeasurePtr target_;
  std::vector<PlanEntry> entries_;
};

struct DualPotentials {
  std::vector<double> u_plus;
  std::vector<double> u_minus;

  double objective(const DiscreteMeasure& mu, const DiscreteMeasure& nu) const;
};

struct CycleCertificate {
  enum class Status { certified_up_to_K, violated };
  Status status = Status::certified_up_to_K;
  int K = 0;
  std::string mode;             // "exact" or "local_search"
  std::vector<int> violation;   // support indices of the violating cycle
  double gap = 0.0;             // cycle cost change; negative when violated
  long nodes_visited = 0;
  long node_budget = 0;
};

/// Dense cost matrix of a cost function over two atom lists.
Mat cost_matrix(const Cost& c, const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Monge objective of a total assignment i -> map[i].
double monge_cost(const Cost& c, const std::vector<int>& assignment,
                  const DiscreteMeasure& mu, const DiscreteMeasure& nu);

double kantorovich_cost(const Cost& c, const TransportPlan& plan);
double kantorovich_cost(const Mat& costs, const TransportPlan& plan);

/// Exact primal solve by network simplex on the bipartite transportation
/// graph. Returns an optimal vertex (at most m + k - 1 entries).
TransportPlan solve_primal(const Cost& c, MeasurePtr mu, MeasurePtr nu);
TransportPlan solve_primal(const Mat& costs, MeasurePtr mu, MeasurePtr nu);

/// Feasible potentials tight on every plan entry. Potentials are fixed
/// per connected component of the support and then shifted so that
/// feasibility holds across components; requires the plan's support to
/// carry consistent potentials (true for optimal vertex plans).
DualPotentials solve_dual(const Mat& costs, const TransportPlan& plan);
DualPotentials solve_dual(const Cost& c, const TransportPlan& plan);

/// Max over all pairs of u_i + v_j - c_ij (feasibility; <= ~0) and max
/// over entries of |c_ij - u_i - v_j| (slackness).
struct DualDiagnostics {
  double feasibility_violation = 0.0;
  double slackness_residual = 0.0;
};
DualDiagnostics dual_diagnostics(const Mat& costs, const TransportPlan& plan,
                                 const DualPotentials& duals);

struct CcmOptions {
  long node_budget = 50'000'000;
  double violation_tol = 1e-10;
  int restarts = 64;             // local search
  std::uint64_t seed = 2024;
};

/// c-cyclical monotonicity of a support: exact mode enumerates all
/// cycles of length <= K (cyclic shifts of distinct entries); local
/// search runs best-improvement walks from random restarts.
CycleCertificate check_ccm(const std::function<double(VecRef, VecRef)>& cost,
                           const std::vector<std::pair<Vec, Vec>>& support, int K,
                           const std::string& mode = "exact", const CcmOptions& opts = {});
CycleCertificate check_ccm(const Cost& c, const std::vector<std::pair<Vec, Vec>>& support,
                           int K, const std::string& mode = "exact",
                           const CcmOptions& opts = {});

/// Quantile (north-west) coupling of two 1-D measures: sorted atoms
/// paired by cumulative mass. The unique monotone-support plan.
TransportPlan monotone_rearrangement_1d(MeasurePtr mu, MeasurePtr nu);

struct SpacelikeReport {
  double min_normalized = kInf;  // min over pairs of h(V,V)/|V|^2
  double min_raw = kInf;
  long pairs_checked = 0;
  int witness_a = -1;
  int witness_b = -1;
};

/// Evaluate h(V, V) at each support pair for difference vectors V to
/// neighbors within `radius`; c-monotone supports stay >= -tol |V|^2.
SpacelikeReport spacelike_support_check(const Cost& c,
                                        const std::vector<std::pair<Vec, Vec>>& support,
                                        double radius = kInf);

struct DimensionEstimate {
  std::vector<int> per_point;  // -1 when the neighborhood is too sparse
  int max_dim = 0;             // over points with enough neighbors
  int skipped = 0;
  int min_neighbors = 0;
};

/// Local PCA dimension: singular values above threshold * largest among
/// centered neighbors within `radius`.
DimensionEstimate local_dimension_estimate(const std::vector<Vec>& points, double radius,
                                           double threshold = 1e-2);

struct RotatedLipschitzReport {
  double max_ratio = 0.0;  // may be +inf
  int witness_a = -1;
  int witness_b = -1;
};

/// Rotate (x, y) -> (u, v) = ((x+y)/sqrt2, (y-x)/sqrt2) and report
/// max |dv| / |du| over support pairs; monotone supports give <= 1.
RotatedLipschitzReport rotated_lipschitz_check_1d(
    const std::vector<std::pair<Vec, Vec>>& support);

struct Decomposition {
  std::vector<PlanEntry> graph;      // sources with a unique partner
  std::vector<PlanEntry> antigraph;  // remaining targets with a unique partner
  std::vector<PlanEntry> residual;
  double residual_mass = 0.0;
};

Decomposition graph_antigraph_decompose(const TransportPlan& plan);

struct MongeExtraction {
  std::optional<std::vector<int>> assignment;
  std::vector<int> split_sources;  // witnesses when no map exists
};

/// The source -> target map carried by the plan, when every source
/// ships at least (1 - tolerance) of its mass to a single target.
MongeExtraction extract_monge_map(const TransportPlan& plan, double tolerance = 1e-9);

}  // namespace otgeo
