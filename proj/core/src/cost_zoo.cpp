#include "otgeo/cost_zoo.hpp"

#include <cmath>

namespace otgeo {

namespace {

Box default_box(int dim) { return Box::cube(dim, -10.0, 10.0); }

/// Cost of the form c(x,y) = G(|x-y|^2). Derivatives in x and y reduce
/// to derivatives in u = x - y with a (-1) per y-index; those follow
/// from the chain rule on s = |u|^2:
///   d_a            = 2 G' u_a
///   d_ab           = 2 G' d_ab + 4 G'' u_a u_b
///   d_abc          = 4 G''(d_ab u_c + d_ac u_b + d_bc u_a) + 8 G''' u_a u_b u_c
///   d_abcd         = 4 G''(dd x3) + 8 G'''(d uu x6) + 16 G'''' u^4
class RadialCost : public Cost {
 public:
  RadialCost(std::string name, Box dx, Box dy, bool excluded_diagonal)
      : Cost(std::move(name), std::move(dx), std::move(dy), 4),
        excluded_diagonal_(excluded_diagonal) {}

  // G(s) and its first four derivatives.
  virtual void profile(double s, double g[5]) const = 0;

  double value(VecRef x, VecRef y) const override {
    double g[5];
    profile((x - y).squaredNorm(), g);
    return g[0];
  }

  double excluded_clearance(VecRef x, VecRef y) const override {
    if (!excluded_diagonal_) return kInf;
    return (x - y).norm();
  }

  std::optional<double> partial(const Deriv& d, VecRef x, VecRef y) const override {
    const Vec u = x - y;
    const double s = u.squaredNorm();
    if (excluded_diagonal_ && s == 0.0) return std::nullopt;
    double g[5];
    profile(s, g);
    std::vector<int> a = d.ix;
    a.insert(a.end(), d.iy.begin(), d.iy.end());
    const double sign = (d.iy.size() % 2 == 0) ? 1.0 : -1.0;
    auto kron = [](int i, int j) { return i == j ? 1.0 : 0.0; };
    double v = 0.0;
    switch (a.size()) {
      case 1:
        v = 2.0 * g[1] * u[a[0]];
        break;
      case 2:
        v = 2.0 * g[1] * kron(a[0], a[1]) + 4.0 * g[2] * u[a[0]] * u[a[1]];
        break;
      case 3:
        v = 4.0 * g[2] *
                (kron(a[0], a[1]) * u[a[2]] + kron(a[0], a[2]) * u[a[1]] +
                 kron(a[1], a[2]) * u[a[0]]) +
            8.0 * g[3] * u[a[0]] * u[a[1]] * u[a[2]];
        break;
      case 4:
        v = 4.0 * g[2] *
                (kron(a[0], a[1]) * kron(a[2], a[3]) + kron(a[0], a[2]) * kron(a[1], a[3]) +
                 kron(a[0], a[3]) * kron(a[1], a[2])) +
            8.0 * g[3] *
                (kron(a[0], a[1]) * u[a[2]] * u[a[3]] + kron(a[0], a[2]) * u[a[1]] * u[a[3]] +
                 kron(a[0], a[3]) * u[a[1]] * u[a[2]] + kron(a[1], a[2]) * u[a[0]] * u[a[3]] +
                 kron(a[1], a[3]) * u[a[0]] * u[a[2]] + kron(a[2], a[3]) * u[a[0]] * u[a[1]]) +
            16.0 * g[4] * u[a[0]] * u[a[1]] * u[a[2]] * u[a[3]];
        break;
      default:
        return std::nullopt;
    }
    return sign * v;
  }

 private:
  bool excluded_diagonal_;
};

class QuadraticCost final : public RadialCost {
 public:
  QuadraticCost(Box dx, Box dy)
      : RadialCost("quadratic", std::move(dx), std::move(dy), false) {}
  void profile(double s, double g[5]) const override {
    g[0] = 0.5 * s;
    g[1] = 0.5;
    g[2] = g[3] = g[4] = 0.0;
  }
};

class EuclideanCost final : public RadialCost {
 public:
  EuclideanCost(Box dx, Box dy)
      : RadialCost("euclidean", std::move(dx), std::move(dy), true) {}
  void profile(double s, double g[5]) const override {
    const double r = std::sqrt(s);
    g[0] = r;
    g[1] = 0.5 / r;
    g[2] = -0.25 / (s * r);
    g[3] = 0.375 / (s * s * r);
    g[4] = -0.9375 / (s * s * s * r);
  }
};

class LogCost final : public RadialCost {
 public:
  LogCost(Box dx, Box dy) : RadialCost("log", std::move(dx), std::move(dy), true) {}
  void profile(double s, double g[5]) const override {
    g[0] = -0.5 * std::log(s);
    g[1] = -0.5 / s;
    g[2] = 0.5 / (s * s);
    g[3] = -1.0 / (s * s * s);
    g[4] = 3.0 / (s * s * s * s);
  }
};

class PowerCost final : public RadialCost {
 public:
  PowerCost(double p, Box dx, Box dy)
      : RadialCost("power", std::move(dx), std::move(dy), excludes(p)), p_(p) {}
  static bool excludes(double p) {
    const double half = p / 2.0;
    return !(half == std::floor(half) && half >= 1.0);
  }
  void profile(double s, double g[5]) const override {
    const double e = 0.5 * p_;
    g[0] = std::pow(s, e) / p_;
    // g[k] = (1/2)(e-1)(e-2)...(e-k+1) s^(e-k); zero coefficient wins
    // over any singular power so even-integer p stays polynomial.
    double coeff = 0.5;
    for (int k = 1; k <= 4; ++k) {
      g[k] = (coeff == 0.0) ? 0.0 : coeff * std::pow(s, e - static_cast<double>(k));
      coeff *= e - static_cast<double>(k);
    }
  }

 private:
  double p_;
};

class BilinearCost final : public Cost {
 public:
  BilinearCost(Box dx, Box dy)
      : Cost("bilinear", std::move(dx), std::move(dy), 4) {}
  double value(VecRef x, VecRef y) const override { return -x.dot(y); }
  std::optional<double> partial(const Deriv& d, VecRef x, VecRef y) const override {
    if (d.order() == 1)
      return d.ix.size() == 1 ? -y[d.ix[0]] : -x[d.iy[0]];
    if (d.order() == 2 && d.ix.size() == 1 && d.iy.size() == 1)
      return d.ix[0] == d.iy[0] ? -1.0 : 0.0;
    return 0.0;
  }
};

class CircleChordCost final : public Cost {
 public:
  CircleChordCost() : Cost("circle_chord", Box::circle(), Box::circle(), 4) {}
  double value(VecRef x, VecRef y) const override { return 1.0 - std::cos(x[0] - y[0]); }
  std::optional<double> partial(const Deriv& d, VecRef x, VecRef y) const override {
    const double t = x[0] - y[0];
    const double sign = (d.iy.size() % 2 == 0) ? 1.0 : -1.0;
    switch (d.order()) {
      case 1: return sign * std::sin(t);
      case 2: return sign * std::cos(t);
      case 3: return sign * -std::sin(t);
      case 4: return sign * -std::cos(t);
      default: return std::nullopt;
    }
  }
};

class CircleGeodesicCost final : public Cost {
 public:
  explicit CircleGeodesicCost(double cut_clearance)
      : Cost("circle_geodesic", Box::circle(), Box::circle(), 4),
        cut_clearance_(cut_clearance) {}
  double value(VecRef x, VecRef y) const override {
    const double t = wrap_angle(x[0] - y[0]);
    return 0.5 * t * t;
  }
  double excluded_clearance(VecRef x, VecRef y) const override {
    const double t = wrap_angle(x[0] - y[0]);
    return (M_PI - cut_clearance_) - std::abs(t);
  }
  std::optional<double> partial(const Deriv& d, VecRef x, VecRef y) const override {
    const double t = wrap_angle(x[0] - y[0]);
    const double sign = (d.iy.size() % 2 == 0) ? 1.0 : -1.0;
    switch (d.order()) {
      case 1: return sign * t;
      case 2: return sign * 1.0;
      case 3: return 0.0;
      case 4: return 0.0;
      default: return std::nullopt;
    }
  }

 private:
  double cut_clearance_;
};

}  // namespace

std::unique_ptr<Cost> bilinear_cost(int dim, std::optional<Box> dx, std::optional<Box> dy) {
  return std::make_unique<BilinearCost>(dx.value_or(default_box(dim)),
                                        dy.value_or(default_box(dim)));
}
std::unique_ptr<Cost> quadratic_cost(int dim, std::optional<Box> dx, std::optional<Box> dy) {
  return std::make_unique<QuadraticCost>(dx.value_or(default_box(dim)),
                                         dy.value_or(default_box(dim)));
}
std::unique_ptr<Cost> euclidean_cost(int dim, std::optional<Box> dx, std::optional<Box> dy) {
  return std::make_unique<EuclideanCost>(dx.value_or(default_box(dim)),
                                         dy.value_or(default_box(dim)));
}
std::unique_ptr<Cost> log_cost(int dim, std::optional<Box> dx, std::optional<Box> dy) {
  return std::make_unique<LogCost>(dx.value_or(default_box(dim)),
                                   dy.value_or(default_box(dim)));
}
std::unique_ptr<Cost> power_cost(int dim, double p, std::optional<Box> dx,
                                 std::optional<Box> dy) {
  if (p <= 0.0) throw ConfigError("cost.p", "power cost requires p > 0");
  return std::make_unique<PowerCost>(p, dx.value_or(default_box(dim)),
                                     dy.value_or(default_box(dim)));
}
std::unique_ptr<Cost> circle_chord_cost() { return std::make_unique<CircleChordCost>(); }
std::unique_ptr<Cost> circle_geodesic_cost(double cut_clearance) {
  return std::make_unique<CircleGeodesicCost>(cut_clearance);
}

std::unique_ptr<Cost> make_cost(const CostSpec& spec) {
  if (spec.dim < 1) throw ConfigError("cost.dim", "dimension must be positive");
  if (spec.name == "bilinear") return bilinear_cost(spec.dim, spec.domain_x, spec.domain_y);
  if (spec.name == "quadratic") return quadratic_cost(spec.dim, spec.domain_x, spec.domain_y);
  if (spec.name == "euclidean") return euclidean_cost(spec.dim, spec.domain_x, spec.domain_y);
  if (spec.name == "log") return log_cost(spec.dim, spec.domain_x, spec.domain_y);
  if (spec.name == "power")
    return power_cost(spec.dim, spec.p, spec.domain_x, spec.domain_y);
  if (spec.name == "circle_chord") return circle_chord_cost();
  if (spec.name == "circle_geodesic") return circle_geodesic_cost(spec.cut_clearance);
  throw ConfigError("cost.name", "unknown cost '" + spec.name + "'");
}

const std::vector<CatalogueEntry>& cost_catalogue() {
  static const std::vector<CatalogueEntry> entries = {
      {"bilinear", "-x.y", "smooth; rank n everywhere"},
      {"quadratic", "|x-y|^2/2", "smooth; the classical quadratic cost"},
      {"euclidean", "|x-y|", "diagonal excluded; rank 0 in 1-D off-diagonal"},
      {"log", "-log|x-y|", "diagonal excluded"},
      {"power", "|x-y|^p/p", "diagonal excluded unless p is an even integer; param p"},
      {"circle_chord", "1-cos(theta-phi)", "angle charts [0,2pi); degenerate where c=1"},
      {"circle_geodesic", "wrap(theta-phi)^2/2",
       "angle charts; cut locus excluded with clearance (param, default 0.1 rad)"},
  };
  return entries;
}

}  // namespace otgeo
