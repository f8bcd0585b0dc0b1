#pragma once

#include <Eigen/Core>
#include <limits>
#include <random>
#include <vector>

namespace otgeo {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using VecRef = Eigen::Ref<const Eigen::VectorXd>;

/// One coordinate axis of a domain. Periodic axes model angle charts:
/// coordinates wrap modulo (hi - lo) and never hit a boundary.
struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool periodic = false;

  double width() const { return hi - lo; }
};

/// Axis-aligned box, possibly with periodic (wrap-around) axes.
class Box {
 public:
  Box() = default;
  explicit Box(std::vector<Axis> axes) : axes_(std::move(axes)) {}

  static Box cube(int dim, double lo, double hi);
  /// [0, 2pi) periodic interval per axis.
  static Box circle(int dim = 1);

  int dim() const { return static_cast<int>(axes_.size()); }
  const Axis& axis(int i) const { return axes_[static_cast<size_t>(i)]; }
  const std::vector<Axis>& axes() const { return axes_; }

  /// True if v lies inside, with `margin` of slack required at every
  /// non-periodic boundary.
  bool contains(VecRef v, double margin = 0.0) const;

  /// Normalize periodic coordinates into [lo, lo + width).
  Vec wrap(VecRef v) const;

  /// Distance to the nearest non-periodic boundary; +inf if all axes
  /// are periodic.
  double boundary_clearance(VecRef v) const;

  /// Deterministic interior sample with the given boundary margin.
  Vec sample_interior(std::mt19937_64& rng, double margin = 0.0) const;

  /// Uniformly spaced grid: endpoints included on bounded axes,
  /// excluded on periodic ones. `counts` has one entry per axis
  /// (broadcast if a single count is given).
  std::vector<Vec> grid(const std::vector<int>& counts) const;

 private:
  std::vector<Axis> axes_;
};

/// Wrap an angle difference into (-pi, pi].
double wrap_angle(double t);

inline constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace otgeo
