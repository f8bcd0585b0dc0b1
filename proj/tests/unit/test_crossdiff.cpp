#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "otgeo/cost_zoo.hpp"
#include "otgeo/crossdiff.hpp"

using namespace otgeo;

namespace {
Vec v1(double a) { return (Vec(1) << a).finished(); }
Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }
BasePoint bp(Vec x, Vec y) { return BasePoint{std::move(x), std::move(y)}; }
}  // namespace

TEST_CASE("cross-difference values and cancellation") {
  auto bil = bilinear_cost(1);
  CHECK(cross_difference(*bil, v1(1), v1(1), bp(v1(0), v1(0))) == doctest::Approx(1.0));
  auto quad = quadratic_cost(1);
  CHECK(cross_difference(*quad, v1(2), v1(1), bp(v1(0), v1(0))) == doctest::Approx(2.0));
  // x = x0 cancels pairwise for any cost
  auto lg = log_cost(2);
  CHECK(cross_difference(*lg, v2(0, 0), v2(3, 3), bp(v2(0, 0), v2(2, 1))) ==
        doctest::Approx(0.0));
}

TEST_CASE("cross-difference antisymmetry at random quadruples") {
  auto quad = quadratic_cost(2);
  std::mt19937_64 rng(31);
  for (int t = 0; t < 100; ++t) {
    const Vec x = quad->domain_x().sample_interior(rng);
    const Vec y = quad->domain_y().sample_interior(rng);
    const Vec x0 = quad->domain_x().sample_interior(rng);
    const Vec y0 = quad->domain_y().sample_interior(rng);
    const double lhs = cross_difference(*quad, x, y, bp(x0, y0));
    const double rhs = -cross_difference(*quad, x, y0, bp(x0, y));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
  }
}

TEST_CASE("pseudo-metric assembly") {
  auto bil = bilinear_cost(2);
  const PseudoMetric h = hessian_h(*bil, bp(v2(0.3, 0.1), v2(-0.2, 0.5)));
  CHECK((h.cross_block + Mat::Identity(2, 2)).norm() == doctest::Approx(0.0));
  CHECK((h.matrix.block(0, 2, 2, 2) - 0.5 * Mat::Identity(2, 2)).norm() ==
        doctest::Approx(0.0));
  CHECK(h.matrix.block(0, 0, 2, 2).norm() == 0.0);

  auto chord = circle_chord_cost();
  const PseudoMetric h0 = hessian_h(*chord, bp(v1(0), v1(0)));
  CHECK(h0.matrix(0, 1) == doctest::Approx(0.5));
  const PseudoMetric hdeg = hessian_h(*chord, bp(v1(0), v1(M_PI / 2)));
  CHECK(hdeg.matrix.cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("block-structure law: h matches the FD Hessian of the cross-difference") {
  std::vector<std::unique_ptr<Cost>> costs;
  costs.push_back(bilinear_cost(2));
  costs.push_back(quadratic_cost(2));
  costs.push_back(euclidean_cost(2));
  costs.push_back(log_cost(2));
  costs.push_back(power_cost(2, 3.0));
  costs.push_back(circle_chord_cost());
  costs.push_back(circle_geodesic_cost());
  std::mt19937_64 rng(17);
  for (const auto& c : costs) {
    int done = 0;
    while (done < 50) {
      const Vec x0 = c->domain_x().sample_interior(rng, 0.1);
      const Vec y0 = c->domain_y().sample_interior(rng, 0.1);
      if (c->excluded_clearance(x0, y0) < 0.3) continue;
      const BasePoint base = bp(x0, y0);
      const PseudoMetric h = hessian_h(*c, base);
      const int nx = c->dim_x();
      auto delta0 = [&](VecRef z) {
        return cross_difference(*c, z.head(nx), z.tail(z.size() - nx), base);
      };
      const Mat fd = 0.5 * fd_hessian(delta0, base.joint(), 1e-4);
      INFO(c->name());
      CHECK((h.matrix - fd).cwiseAbs().maxCoeff() < 1e-5);
      ++done;
    }
  }
}

TEST_CASE("taylor residuals: exact for costs with bilinear cross-difference") {
  const std::vector<double> steps{1e-1, 5e-2, 2e-2, 1e-2};
  auto bil = bilinear_cost(2);
  Vec dir(4);
  dir << 0.5, -0.5, 0.5, 0.5;
  for (double r : taylor_residual(*bil, bp(v2(0, 0), v2(0, 0)), dir, steps))
    CHECK(r < 1e-12);
  auto quad = quadratic_cost(1);
  Vec d2(2);
  d2 << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
  for (double r : taylor_residual(*quad, bp(v1(1), v1(2)), d2, steps))
    CHECK(r < 1e-12);
  CHECK(fitted_loglog_slope(steps, taylor_residual(*bil, bp(v2(0, 0), v2(0, 0)), dir, steps)) ==
        kInf);
}

TEST_CASE("taylor residual slope is cubic-or-better for the log cost") {
  auto lg = log_cost(2);
  const std::vector<double> steps{1e-1, 5e-2, 2e-2, 1e-2, 5e-3, 2e-3, 1e-3};
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss(0, 1);
  for (int t = 0; t < 5; ++t) {
    const Vec x0 = (Vec(2) << 0.2 * t - 1.0, 0.3).finished();
    const Vec y0 = (Vec(2) << 2.5, -1.0 + 0.1 * t).finished();
    Vec dir(4);
    for (int i = 0; i < 4; ++i) dir[i] = gauss(rng);
    dir.normalize();
    const auto res = taylor_residual(*lg, bp(x0, y0), dir, steps);
    CHECK(fitted_loglog_slope(steps, res) >= 2.5);
  }
}

TEST_CASE("signature of catalogue metrics") {
  auto bil = bilinear_cost(2);
  const Signature s = signature(hessian_h(*bil, bp(v2(0, 0), v2(0, 0))));
  CHECK(s.k_plus == 2);
  CHECK(s.k_zero == 0);
  CHECK(s.k_minus == 2);
  CHECK(s.rank == 4);

  auto chord = circle_chord_cost();
  const Signature sd = signature(hessian_h(*chord, bp(v1(0), v1(M_PI / 2))));
  CHECK(sd.k_plus == 0);
  CHECK(sd.k_zero == 2);
  CHECK(sd.rank == 0);

  PseudoMetric zero;
  zero.matrix = Mat::Zero(6, 6);
  zero.cross_block = Mat::Zero(3, 3);
  const Signature sz = signature(zero);
  CHECK(sz.k_plus == 0);
  CHECK(sz.k_zero == 6);
  CHECK(sz.rank == 0);
}

TEST_CASE("signature law on random separable costs") {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> dim(1, 5);
  for (int t = 0; t < 40; ++t) {
    const int nx = dim(rng), ny = dim(rng);
    std::uniform_int_distribution<int> rk(0, std::min(nx, ny));
    const int r = rk(rng);
    auto cost = testing::random_separable_cost(nx, ny, r, rng);
    const Vec x0 = cost->domain_x().sample_interior(rng, 0.5);
    const Vec y0 = cost->domain_y().sample_interior(rng, 0.5);
    const Signature s = signature(hessian_h(*cost, bp(x0, y0)));
    CHECK(s.k_plus == r);
    CHECK(s.k_minus == r);
    CHECK(s.k_zero == nx + ny - 2 * r);
    CHECK(s.rank == 2 * r);
  }
}

TEST_CASE("rank is lower-semicontinuous at the degenerate circle point") {
  auto chord = circle_chord_cost();
  const Signature deg = signature(hessian_h(*chord, bp(v1(0), v1(M_PI / 2))));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ang(0.0, 2 * M_PI);
  for (int t = 0; t < 50; ++t) {
    const double phi = ang(rng);
    const Vec dx = v1(1e-2 * std::cos(phi));
    const Vec dy = v1(1e-2 * std::sin(phi));
    const Signature near =
        signature(hessian_h(*chord, bp(v1(0) + dx, v1(M_PI / 2) + dy)));
    CHECK(deg.rank <= near.rank);
  }
}

TEST_CASE("cone classification") {
  auto bil = bilinear_cost(1);
  const PseudoMetric h = hessian_h(*bil, bp(v1(0), v1(0)));
  CHECK(h.form((Vec(2) << 1, 1).finished()) == doctest::Approx(1.0));
  CHECK(cone_classify(h, (Vec(2) << 1, 1).finished()) == ConeClass::spacelike_strict);
  CHECK(cone_classify(h, (Vec(2) << 1, -1).finished()) == ConeClass::timelike_strict);
  CHECK(cone_classify(h, (Vec(2) << 1, 0).finished()) == ConeClass::lightlike);
  CHECK(cone_classify(h, (Vec(2) << 0, -2).finished()) == ConeClass::lightlike);
  CHECK_THROWS_AS(cone_classify(h, Vec::Zero(2)), ZeroVector);
}

TEST_CASE("omega: antisymmetric pairing with the factor involution") {
  auto bil = bilinear_cost(1);
  const PseudoMetric h = hessian_h(*bil, bp(v1(0), v1(0)));
  CHECK(omega(h, (Vec(2) << 1, 0).finished(), (Vec(2) << 0, 1).finished()) ==
        doctest::Approx(-0.5));
  CHECK(omega(h, (Vec(2) << 0.3, 0.7).finished(), (Vec(2) << 0.3, 0.7).finished()) ==
        doctest::Approx(0.0));

  auto chord = circle_chord_cost();
  const PseudoMetric hdeg = hessian_h(*chord, bp(v1(0), v1(M_PI / 2)));
  CHECK(omega(hdeg, (Vec(2) << 1, 2).finished(), (Vec(2) << -1, 3).finished()) ==
        doctest::Approx(0.0));

  auto quad = quadratic_cost(2);
  const PseudoMetric h4 = hessian_h(*quad, bp(v2(0.5, 0), v2(0, 0.5)));
  std::mt19937_64 rng(13);
  std::normal_distribution<double> gauss(0, 1);
  for (int t = 0; t < 100; ++t) {
    Vec p(4), q(4);
    for (int i = 0; i < 4; ++i) {
      p[i] = gauss(rng);
      q[i] = gauss(rng);
    }
    CHECK(omega(h4, p, q) == doctest::Approx(-omega(h4, q, p)).epsilon(1e-12));
    Vec px = p, qx = q;
    px.tail(2).setZero();
    qx.tail(2).setZero();
    CHECK(omega(h4, px, qx) == doctest::Approx(0.0));  // both in the x factor
  }
}

TEST_CASE("lagrangian graph defect") {
  auto bil = bilinear_cost(2);
  // gradient of u(x) = |x|^4: G(x) = 4|x|^2 x, symmetric Jacobian
  std::vector<MapSample> grad_samples;
  std::mt19937_64 rng(23);
  for (int t = 0; t < 10; ++t) {
    const Vec x = bil->domain_x().sample_interior(rng, 9.0);
    const double r2 = x.squaredNorm();
    const Vec gx = 4.0 * r2 * x;
    const Mat J = 4.0 * (r2 * Mat::Identity(2, 2) + 2.0 * x * x.transpose());
    if (!bil->domain_y().contains(gx)) continue;
    grad_samples.push_back({x, gx, J});
  }
  REQUIRE(!grad_samples.empty());
  CHECK(lagrangian_defect(*bil, grad_samples) < 1e-10);

  // rotation by 90 degrees: antisymmetric Jacobian
  Mat rot(2, 2);
  rot << 0, -1, 1, 0;
  std::vector<MapSample> rot_samples{{v2(0.4, 0.2), rot * v2(0.4, 0.2), rot}};
  CHECK(lagrangian_defect(*bil, rot_samples) == doctest::Approx(1.0));

  auto bil1 = bilinear_cost(1);
  std::vector<MapSample> one_d{{v1(0.5), v1(0.7), Mat::Constant(1, 1, 3.0)}};
  CHECK(lagrangian_defect(*bil1, one_d) == 0.0);
}

TEST_CASE("conformal scaling") {
  auto bil = bilinear_cost(2);
  const PseudoMetric h = hessian_h(*bil, bp(v2(0, 0), v2(0, 0)));
  const PseudoMetric same = conformal_scale(h, 1.0, 1.0);
  CHECK((same.matrix - h.matrix).norm() == doctest::Approx(0.0));
  const PseudoMetric scaled = conformal_scale(h, 4.0, 1.0);
  CHECK((scaled.matrix - 2.0 * h.matrix).norm() == doctest::Approx(0.0).epsilon(1e-12));
  const Signature s = signature(scaled);
  CHECK(s.k_plus == 2);

  auto chord = circle_chord_cost();
  const PseudoMetric hdeg = hessian_h(*chord, bp(v1(0), v1(M_PI / 2)));
  CHECK_THROWS_AS(conformal_scale(hdeg, 1.0, 1.0), DegenerateMetric);

  std::mt19937_64 rng(3);
  auto rect = testing::random_separable_cost(2, 1, 1, rng);
  const PseudoMetric hr =
      hessian_h(*rect, bp(v2(0, 0), v1(0)));
  CHECK_THROWS_AS(conformal_scale(hr, 1.0, 1.0), DimensionMismatch);
}
