#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "otgeo/box.hpp"
#include "otgeo/errors.hpp"

namespace otgeo {

struct FDScheme;

/// A mixed partial-derivative request: which x-coordinates and which
/// y-coordinates to differentiate against, e.g. ix={0,0}, iy={1} is
/// d^3 c / dx_0^2 dy_1. Total order is capped at 4.
struct Deriv {
  std::vector<int> ix;
  std::vector<int> iy;

  Deriv() = default;
  Deriv(std::vector<int> x_indices, std::vector<int> y_indices)
      : ix(std::move(x_indices)), iy(std::move(y_indices)) {}

  int order() const { return static_cast<int>(ix.size() + iy.size()); }

  /// Sort index lists; mixed partials commute so this is the canonical key.
  Deriv canonical() const;

  std::string to_string() const;
};

/// Smooth transportation cost c(x, y) on a product of coordinate boxes.
///
/// Subclasses provide the raw value and (optionally) analytic partial
/// derivatives up to `smoothness_order`. The checked entry points
/// `evaluate` / `derivative` enforce domain membership and the excluded
/// set, and fall back to finite differences when no analytic formula is
/// declared for a request.
class Cost {
 public:
  virtual ~Cost() = default;

  const std::string& name() const { return name_; }
  int dim_x() const { return domain_x_.dim(); }
  int dim_y() const { return domain_y_.dim(); }
  const Box& domain_x() const { return domain_x_; }
  const Box& domain_y() const { return domain_y_; }

  /// Highest derivative order with declared analytic formulas (0..4).
  int smoothness_order() const { return smoothness_order_; }

  /// Raw value, no domain checks. Must be finite away from the
  /// excluded set; may be non-finite on it.
  virtual double value(VecRef x, VecRef y) const = 0;

  /// Analytic partial derivative, or nullopt if no formula is declared
  /// for this request. `d` is canonical.
  virtual std::optional<double> partial(const Deriv& d, VecRef x, VecRef y) const {
    (void)d; (void)x; (void)y;
    return std::nullopt;
  }

  /// Distance-like clearance to the excluded set; <= 0 means excluded,
  /// +inf means no excluded set. Finite-difference stencils require
  /// clearance exceeding their span.
  virtual double excluded_clearance(VecRef x, VecRef y) const {
    (void)x; (void)y;
    return kInf;
  }

  bool excluded(VecRef x, VecRef y) const { return excluded_clearance(x, y) <= 0.0; }

  /// Checked evaluation: throws DomainError outside the domain or on
  /// the excluded set.
  double evaluate(VecRef x, VecRef y) const;

  /// Checked derivative: analytic when declared, else central finite
  /// differences with Richardson extrapolation. Throws OrderError above
  /// order 4, DomainError/SingularStencil when a stencil cannot fit.
  double derivative(const Deriv& d, VecRef x, VecRef y) const;
  double derivative(const Deriv& d, VecRef x, VecRef y, const FDScheme& scheme) const;

  /// Gradient in x of c(., y): the vector (c_1, ..., c_{n+}).
  Vec grad_x(VecRef x, VecRef y) const;
  /// Mixed second-derivative block C[i][j] = c_{i,j}(x, y).
  Mat cross_hessian(VecRef x, VecRef y) const;

 protected:
  Cost(std::string name, Box dx, Box dy, int smoothness_order)
      : name_(std::move(name)),
        domain_x_(std::move(dx)),
        domain_y_(std::move(dy)),
        smoothness_order_(smoothness_order) {}

  void check_point(VecRef x, VecRef y, bool check_excluded = true) const;

 private:
  std::string name_;
  Box domain_x_;
  Box domain_y_;
  int smoothness_order_;
};

using CostPtr = std::shared_ptr<const Cost>;

/// View of a cost with the roles of x and y interchanged:
/// c*(y, x) = c(x, y). Does not own the underlying cost.
class ReflectedCost final : public Cost {
 public:
  explicit ReflectedCost(const Cost& base)
      : Cost(base.name() + "*", base.domain_y(), base.domain_x(), base.smoothness_order()),
        base_(base) {}

  double value(VecRef x, VecRef y) const override { return base_.value(y, x); }
  std::optional<double> partial(const Deriv& d, VecRef x, VecRef y) const override {
    return base_.partial(Deriv{d.iy, d.ix}, y, x);
  }
  double excluded_clearance(VecRef x, VecRef y) const override {
    return base_.excluded_clearance(y, x);
  }

 private:
  const Cost& base_;
};

}  // namespace otgeo
