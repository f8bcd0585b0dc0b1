#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "otgeo/crossdiff.hpp"

namespace otgeo {

/// Sampling resolution for grid-based condition checks. A verdict of
/// `pass` always means "no violation found at this resolution".
struct GridSpec {
  std::vector<int> counts_x{10};
  std::vector<int> counts_y{10};
  std::optional<Box> bounds_x;  // default: the cost's domain
  std::optional<Box> bounds_y;
  int directions = 8;           // direction samples per factor for (p,q) scans
  std::uint64_t seed = 0;       // seeds direction sampling in dimension >= 3

  Box resolved_x(const Cost& c) const { return bounds_x.value_or(c.domain_x()); }
  Box resolved_y(const Cost& c) const { return bounds_y.value_or(c.domain_y()); }
  std::string summary(const Cost& c) const;
};

enum class Verdict { pass, fail, inconclusive };
std::string to_string(Verdict v);

/// A point/vector bundle achieving (or near) the reported margin.
struct Witness {
  std::vector<std::pair<std::string, Vec>> points;
  std::map<std::string, double> values;
};

struct ConditionReport {
  std::string condition;
  Verdict verdict = Verdict::inconclusive;
  double margin = 0.0;
  std::vector<Witness> witnesses;
  std::string grid;
  std::map<std::string, double> tolerances;
  std::vector<std::string> notes;
};

struct MtwOptions {
  double collision_rel = 1e-6;      // A1: image coincidence tolerance, relative
  double det_threshold = 1e-8;      // A2: normalized-determinant cutoff
  double row_floor_rel = 1e-3;      // A2: row-norm floor relative to grid scale
  double margin_tol = 1e-6;         // A3: pass tolerance on the scanned margin
  double C0 = 0.0;                  // A3 strict constant
  bool strict = false;              // A3s variant
  bool strong = false;              // A4s variant
  int refine_factor = 3;            // A4: refinement of the image cloud
  double convexity_tol_factor = 1.5;
  double resolution_ratio = 8.0;    // A4: inconclusive when cloud too coarse
  long pair_budget = 5000;          // A4: midpoint pairs per base point
  int max_base_points = 12;         // A4: x0 probes (deterministic stride)
  int max_probe_points = 100;       // A0 probes (deterministic stride)
  double a0_ratio_threshold = 0.6;  // A0: refinement-consistency cutoff
  SignatureOptions rank;
  FDScheme fd;
};

/// Smoothness proxy: derivative stability under finite-difference step
/// refinement at grid points, orders 1..4.
ConditionReport check_A0(const Cost& c, const GridSpec& grid, const MtwOptions& opts = {});

/// Twist: y -> D_x c(x0, y) must be injective; collisions of grid
/// images are reported with their witness pair.
ConditionReport check_A1_plus(const Cost& c, const GridSpec& grid,
                              const MtwOptions& opts = {});

/// A1: A1+ for the cost and for its reflection c*(y,x) = c(x,y).
ConditionReport check_A1(const Cost& c, const GridSpec& grid, const MtwOptions& opts = {});

/// Nondegeneracy: |det C| (normalized by row norms) above threshold on
/// the grid.
ConditionReport check_A2(const Cost& c, const GridSpec& grid, const MtwOptions& opts = {});

/// Fourth-order tensor contraction
///   (-c_{ij,kl} + c_{ij,m} c^{m,n} c_{n,kl}) p^i p^j q^k q^l
/// evaluated with the cached derivative tensors of one base point.
class MtwKernel {
 public:
  MtwKernel(const Cost& c, const BasePoint& base, const FDScheme& scheme = FDScheme{},
            const SignatureOptions& rank = {});

  double operator()(VecRef p, VecRef q) const;
  const Mat& cross() const { return cross_; }
  const BasePoint& base() const { return base_; }

 private:
  BasePoint base_;
  int n_;
  Mat cross_;               // C[i][j] = c_{i,j}
  Mat cross_inverse_;
  std::vector<Mat> t3a_;    // t3a_[m](i,j) = c_{ij,m}
  std::vector<Mat> t3b_;    // t3b_[n](k,l) = c_{n,kl}
  std::vector<double> t4_;  // c_{ij,kl}, flattened
};

double mtw_sectional(const Cost& c, const BasePoint& base, VecRef p, VecRef q,
                     const FDScheme& scheme = FDScheme{});

/// Lightlike scan of the tensor over base points and projected unit
/// direction pairs with p.Cq = 0 (enforced by projection).
ConditionReport check_A3(const Cost& c, const GridSpec& grid, const MtwOptions& opts = {});

/// Images {D_x c(x0, y_j)}; grid points in the excluded set are skipped.
std::vector<Vec> image_set(const Cost& c, VecRef x0, const std::vector<Vec>& y_points);

/// Convexity heuristic on the image clouds of both factors: midpoints
/// of image samples must stay within tolerance of a refined cloud.
/// With `opts.strong`, boundary curvature signs are estimated from
/// local quadric fits (dimension >= 2 only).
ConditionReport check_A4(const Cost& c, const GridSpec& grid, const MtwOptions& opts = {});

/// Levi-Civita connection coefficients of the pseudo-metric h at a
/// base point, with metric derivatives by central differences.
struct ChristoffelTensor {
  std::vector<Mat> gamma;  // gamma[a](b, c), symmetric in (b, c)
  int dim() const { return static_cast<int>(gamma.size()); }
};
ChristoffelTensor christoffel(const Cost& c, const BasePoint& base, double fd_step = 0.0,
                              const FDScheme& scheme = FDScheme{});

struct GeodesicState {
  Vec position;  // (x, y) joint coordinates
  Vec velocity;
  double time = 0.0;
};

enum class GeodesicStatus { completed, domain_exit, degenerate_metric };

struct Trajectory {
  std::vector<GeodesicState> states;
  GeodesicStatus status = GeodesicStatus::completed;
  double exit_time = 0.0;
};

/// Fixed-step classical 4th-order integration of z'' = -Gamma(z', z').
Trajectory geodesic_integrate(const Cost& c, const GeodesicState& start, double duration,
                              int step_count, double fd_step = 0.0,
                              const FDScheme& scheme = FDScheme{});

/// h(z)(v, v) along a trajectory state; conserved along exact geodesics.
double geodesic_energy(const Cost& c, const GeodesicState& s,
                       const FDScheme& scheme = FDScheme{});

}  // namespace otgeo
