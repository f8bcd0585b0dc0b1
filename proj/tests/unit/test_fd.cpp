#include <doctest.h>

#include <cmath>

#include "otgeo/cost_zoo.hpp"
#include "otgeo/fd.hpp"

using namespace otgeo;

namespace {

/// Value-only wrapper: forces the finite-difference fallback path.
class OpaqueCost final : public Cost {
 public:
  explicit OpaqueCost(std::unique_ptr<Cost> inner)
      : Cost(inner->name() + "_opaque", inner->domain_x(), inner->domain_y(), 0),
        inner_(std::move(inner)) {}
  double value(VecRef x, VecRef y) const override { return inner_->value(x, y); }
  double excluded_clearance(VecRef x, VecRef y) const override {
    return inner_->excluded_clearance(x, y);
  }
  const Cost& inner() const { return *inner_; }

 private:
  std::unique_ptr<Cost> inner_;
};

}  // namespace

TEST_CASE("fd_validate: quadratic orders 1-2 are near-exact") {
  auto quad = quadratic_cost(2, Box::cube(2, 0.0, 1.0), Box::cube(2, 0.0, 1.0));
  const auto rep = fd_validate(*quad, FDScheme{}, 100);
  REQUIRE(rep.orders.size() == 4);
  CHECK(rep.orders[0].max_abs_err < 1e-6);
  CHECK(rep.orders[1].max_abs_err < 1e-6);
  CHECK(rep.pass);
}

TEST_CASE("fd_validate: bilinear order-4 discrepancy stays below 1e-4") {
  auto bil = bilinear_cost(2);
  const auto rep = fd_validate(*bil, FDScheme{}, 100);
  REQUIRE(rep.orders.size() == 4);
  CHECK(rep.orders[3].max_abs_err < 1e-4);
  CHECK(rep.pass);
}

TEST_CASE("fd_validate: every catalogue cost passes the tolerance model") {
  std::vector<std::unique_ptr<Cost>> costs;
  costs.push_back(bilinear_cost(2));
  costs.push_back(quadratic_cost(3));
  costs.push_back(euclidean_cost(2));
  costs.push_back(log_cost(2));
  costs.push_back(power_cost(2, 3.0));
  costs.push_back(circle_chord_cost());
  costs.push_back(circle_geodesic_cost());
  for (const auto& c : costs) {
    const auto rep = fd_validate(*c, FDScheme{}, 100);
    INFO(c->name());
    CHECK(rep.pass);
    CHECK(rep.samples_used > 50);
    for (const auto& o : rep.orders) {
      INFO("order ", o.order, " max_abs_err ", o.max_abs_err);
      CHECK(o.pass);
    }
  }
}

TEST_CASE("fd fallback matches analytic derivatives") {
  OpaqueCost opaque(log_cost(2));
  const Vec x = (Vec(2) << 0.5, -0.25).finished();
  const Vec y = (Vec(2) << 2.5, 1.0).finished();
  for (const Deriv& d : {Deriv{{0}, {}}, Deriv{{0}, {1}}, Deriv{{0, 1}, {1}}}) {
    const double fd = opaque.derivative(d, x, y);
    const double an = *opaque.inner().partial(d.canonical(), x, y);
    CHECK(fd == doctest::Approx(an).epsilon(1e-6));
  }
}

TEST_CASE("fd stencil refuses to straddle the excluded set") {
  auto lg = log_cost(1);
  const Vec x = (Vec(1) << 1.0).finished();
  const Vec y = (Vec(1) << 1.0 + 1e-9).finished();
  CHECK_THROWS_AS(fd_partial(*lg, Deriv{{0}, {0}}, x, y, FDScheme{}), SingularStencil);
}

TEST_CASE("fd_hessian oracle is exact on quadratics") {
  auto f = [](VecRef z) { return 3.0 * z[0] * z[0] - 2.0 * z[0] * z[1] + 0.5 * z[1] * z[1]; };
  const Vec z = (Vec(2) << 0.7, -0.3).finished();
  const Mat H = fd_hessian(f, z, 1e-4);
  CHECK(H(0, 0) == doctest::Approx(6.0).epsilon(1e-7));
  CHECK(H(0, 1) == doctest::Approx(-2.0).epsilon(1e-7));
  CHECK(H(1, 1) == doctest::Approx(1.0).epsilon(1e-6));
}
