#pragma once

#include <string>
#include <vector>

#include "otgeo/cost.hpp"
#include "otgeo/fd.hpp"

namespace otgeo {

/// Anchor pair (x0, y0) for the cross-difference; the pseudo-metric is
/// only evaluated at the base of its own cross-difference.
struct BasePoint {
  Vec x0;
  Vec y0;

  int dim() const { return static_cast<int>(x0.size() + y0.size()); }
  Vec joint() const {
    Vec z(dim());
    z << x0, y0;
    return z;
  }
};

/// Half the Hessian of the cross-difference at its base: zero diagonal
/// blocks, off-diagonal block -C/2 where C[i][j] = c_{i,j}(x0, y0).
struct PseudoMetric {
  BasePoint base;
  Mat matrix;       // (n+ + n-) square, symmetric
  Mat cross_block;  // n+ x n-

  int dim_x() const { return static_cast<int>(cross_block.rows()); }
  int dim_y() const { return static_cast<int>(cross_block.cols()); }
  int dim() const { return dim_x() + dim_y(); }

  /// Quadratic form h(V, V).
  double form(VecRef v) const { return v.dot(matrix * v); }
  double form(VecRef v, VecRef w) const { return v.dot(matrix * w); }
};

struct Signature {
  int k_plus = 0;
  int k_zero = 0;
  int k_minus = 0;
  int rank = 0;  // 2 * rank(cross_block)
};

enum class ConeClass {
  spacelike_strict,
  spacelike_boundary,
  lightlike,
  timelike_boundary,
  timelike_strict,
};

std::string to_string(ConeClass c);

/// Thresholds for eigenvalue/singular-value truncation. Relative cutoff
/// against the largest magnitude, with an absolute floor so that a
/// uniformly tiny matrix (rounding residue of an exact zero) still
/// counts as rank deficient.
struct SignatureOptions {
  double rel_tol = 1e-8;     // use 1e-5 when C comes from finite differences
  double abs_floor = 1e-12;
};

/// delta(x, y; x0, y0) = c(x,y0) + c(x0,y) - c(x,y) - c(x0,y0).
double cross_difference(const Cost& c, VecRef x, VecRef y, const BasePoint& base);

/// Assemble the pseudo-metric h at `base` from the mixed second
/// derivatives (analytic when declared, FD fallback otherwise).
PseudoMetric hessian_h(const Cost& c, const BasePoint& base,
                       const FDScheme& scheme = FDScheme{});

/// |delta0(base + t dir) - h(t dir, t dir)| for each step t.
std::vector<double> taylor_residual(const Cost& c, const BasePoint& base, VecRef direction,
                                    const std::vector<double>& steps);

/// Least-squares slope of log(residual) vs log(step), ignoring residuals
/// below `floor`; +inf when fewer than two usable points remain (the
/// expansion is exact to rounding).
double fitted_loglog_slope(const std::vector<double>& steps,
                           const std::vector<double>& residuals, double floor = 1e-13);

Signature signature(const PseudoMetric& m, const SignatureOptions& opts = {});

ConeClass cone_classify(const PseudoMetric& m, VecRef v, double tol = 1e-10);

/// omega(P, Q) = h(P, U Q) with U(dx, dy) = (dx, -dy); antisymmetric,
/// nondegenerate exactly when h has full rank.
double omega(const PseudoMetric& m, VecRef p, VecRef q);

/// One sampled point of a map G with its Jacobian, for the Lagrangian
/// graph diagnostic.
struct MapSample {
  Vec x;
  Vec gx;
  Mat jacobian;  // dim_y x dim_x
};

/// Max |omega(P,Q)| over basis pairs of the graph tangent space
/// {(e, DG e)} across the samples; zero for gradient maps under the
/// bilinear cost.
double lagrangian_defect(const Cost& c, const std::vector<MapSample>& samples,
                         const FDScheme& scheme = FDScheme{});

/// Scale h by (f+ f- / |det C|)^(1/n); requires n+ == n- and C
/// nondegenerate. Signature is unchanged.
PseudoMetric conformal_scale(const PseudoMetric& m, double f_plus, double f_minus,
                             const SignatureOptions& opts = {});

}  // namespace otgeo
