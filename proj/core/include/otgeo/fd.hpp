#pragma once

#include <array>
#include <cstdint>
#include <functional>

#include "otgeo/cost.hpp"

namespace otgeo {

/// Central finite differences with Richardson extrapolation.
///
/// Step model: the order-m derivative uses step
///     h_m = step_scale[m] * eps^(1/(m+2)) * max(1, |coordinate|),
/// which balances truncation against rounding for the plain scheme;
/// the per-order multipliers keep the high-order stencils out of the
/// rounding-dominated regime once Richardson extrapolation removes the
/// leading truncation term.
struct FDScheme {
  std::array<double, 5> step_scale{1.0, 1.0, 1.0, 2.0, 3.0};  // index = order
  int richardson_levels = 2;                                  // >= 1

  /// Base step for a derivative of total order m at coordinate scale 1.
  double step(int order) const;
};

/// Raw nested central difference of order d.order() with step h
/// (no clearance or domain checks, no Richardson).
double fd_stencil(const Cost& c, const Deriv& d, VecRef x, VecRef y, double h);

/// Checked FD partial: verifies the stencil stays inside the domain and
/// clear of the excluded set, then applies Richardson extrapolation.
double fd_partial(const Cost& c, const Deriv& d, VecRef x, VecRef y,
                  const FDScheme& scheme = FDScheme{});

/// As fd_partial but without clearance/domain guards; used by the
/// smoothness probe, which deliberately differentiates near kinks.
/// Richardson is NOT applied; the caller owns step refinement.
double fd_partial_unchecked(const Cost& c, const Deriv& d, VecRef x, VecRef y, double h);

/// Stencil half-width in coordinate units for a request at (x, y):
/// order * h * coordinate scale, the largest offset any evaluation uses.
double fd_span(const Deriv& d, VecRef x, VecRef y, double h);

/// Expected rounding noise of the order-m stencil given |f| <= fscale.
double fd_rounding_noise(int order, double h, double fscale);

/// Numerical Hessian of a scalar function of one vector argument.
/// Central differences, no extrapolation; test-oracle grade.
Mat fd_hessian(const std::function<double(VecRef)>& f, VecRef z, double h);

struct FDOrderReport {
  int order = 0;
  int checked = 0;
  double max_abs_err = 0.0;
  double max_rel_err = 0.0;   // vs max(|analytic|, abs floor)
  double worst_tolerance = 0.0;
  bool pass = true;
};

struct FDValidationReport {
  std::vector<FDOrderReport> orders;
  int samples_requested = 0;
  int samples_used = 0;
  bool pass = true;
};

/// Compare declared analytic derivatives against finite differences at
/// random interior points with stencil clearance from the excluded set.
/// Tolerance per comparison: max(rel_tol*|analytic|, abs_floor, rounding
/// noise model for the order).
FDValidationReport fd_validate(const Cost& c, const FDScheme& scheme, int sample_count,
                               std::uint64_t seed = 12345, double rel_tol = 1e-5,
                               double abs_floor = 1e-8);

}  // namespace otgeo
