#include <doctest.h>

#include <cmath>
#include <random>

#include "otgeo/cost_zoo.hpp"

using namespace otgeo;

namespace {
Vec v1(double a) {
  Vec v(1);
  v[0] = a;
  return v;
}
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}
}  // namespace

TEST_CASE("catalogue evaluation") {
  auto quad = quadratic_cost(1);
  CHECK(quad->evaluate(v1(2.0), v1(1.0)) == doctest::Approx(0.5).epsilon(1e-14));

  auto bil = bilinear_cost(2);
  CHECK(bil->evaluate(v2(1, 0), v2(0, 1)) == doctest::Approx(0.0));

  // antipodal unit vectors: the chord formula gives |x-y|^2/2 = 2
  auto chord = circle_chord_cost();
  const double via_chord =
      0.5 * (v2(std::cos(0.0), std::sin(0.0)) - v2(std::cos(M_PI), std::sin(M_PI)))
                .squaredNorm();
  CHECK(chord->evaluate(v1(0.0), v1(M_PI)) == doctest::Approx(via_chord).epsilon(1e-14));
  CHECK(chord->evaluate(v1(0.0), v1(M_PI)) == doctest::Approx(2.0));
}

TEST_CASE("catalogue derivatives") {
  auto quad = quadratic_cost(1);
  CHECK(quad->derivative(Deriv{{0}, {0}}, v1(3.3), v1(-1.2)) == doctest::Approx(-1.0));

  auto chord = circle_chord_cost();
  CHECK(chord->derivative(Deriv{{0}, {0}}, v1(0.0), v1(M_PI / 2)) ==
        doctest::Approx(0.0).epsilon(1e-14));

  auto bil = bilinear_cost(2);
  CHECK(bil->derivative(Deriv{{0, 1}, {0, 1}}, v2(0.3, 0.4), v2(-0.2, 0.9)) == 0.0);
}

TEST_CASE("periodic charts wrap") {
  auto chord = circle_chord_cost();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ang(0.0, 2 * M_PI);
  for (int t = 0; t < 50; ++t) {
    const double th = ang(rng), ph = ang(rng);
    CHECK(chord->evaluate(v1(th + 2 * M_PI), v1(ph)) ==
          doctest::Approx(chord->evaluate(v1(th), v1(ph))).epsilon(1e-12));
  }
  auto geo = circle_geodesic_cost();
  CHECK(geo->evaluate(v1(0.1), v1(2 * M_PI - 0.1)) == doctest::Approx(0.5 * 0.2 * 0.2));
}

TEST_CASE("domain and excluded-set errors") {
  auto quad = quadratic_cost(1);
  CHECK_THROWS_AS(quad->evaluate(v1(100.0), v1(0.0)), DomainError);

  auto eucl = euclidean_cost(2);
  CHECK_THROWS_AS(eucl->evaluate(v2(1, 1), v2(1, 1)), DomainError);
  CHECK(eucl->evaluate(v2(0, 0), v2(3, 4)) == doctest::Approx(5.0));

  auto geo = circle_geodesic_cost(0.1);
  CHECK_THROWS_AS(geo->evaluate(v1(0.0), v1(M_PI)), DomainError);
  CHECK_THROWS_AS(geo->evaluate(v1(0.0), v1(M_PI - 0.05)), DomainError);
  CHECK(geo->evaluate(v1(0.0), v1(M_PI - 0.2)) ==
        doctest::Approx(0.5 * (M_PI - 0.2) * (M_PI - 0.2)));

  Deriv fifth{{0, 0, 0}, {0, 0}};
  CHECK_THROWS_AS(quad->derivative(fifth, v1(0), v1(1)), OrderError);
}

TEST_CASE("mixed partials commute through the public api") {
  auto lg = log_cost(2);
  const Vec x = v2(0.1, -0.4), y = v2(2.0, 1.5);
  const double a = lg->derivative(Deriv{{0, 1}, {1}}, x, y);
  const double b = lg->derivative(Deriv{{1, 0}, {1}}, x, y);
  CHECK(a == b);
  const double c1 = lg->derivative(Deriv{{1}, {0, 1}}, x, y);
  const double c2 = lg->derivative(Deriv{{1}, {1, 0}}, x, y);
  CHECK(c1 == c2);
}

TEST_CASE("power cost matches quadratic at p=2 and is polynomial at p=4") {
  auto p2 = power_cost(2, 2.0);
  auto quad = quadratic_cost(2);
  std::mt19937_64 rng(11);
  for (int t = 0; t < 20; ++t) {
    const Vec x = quad->domain_x().sample_interior(rng);
    const Vec y = quad->domain_y().sample_interior(rng);
    CHECK(p2->evaluate(x, y) == doctest::Approx(quad->evaluate(x, y)).epsilon(1e-12));
  }
  auto p4 = power_cost(1, 4.0);
  CHECK(p4->evaluate(v1(1.0), v1(1.0)) == 0.0);  // diagonal allowed: polynomial
  // d^4 (u^4/4) / dx^2 dy^2 = 24/4 = 6, independent of u
  CHECK(p4->derivative(Deriv{{0, 0}, {0, 0}}, v1(2.0), v1(0.5)) ==
        doctest::Approx(6.0).epsilon(1e-9));
}

TEST_CASE("factory and catalogue") {
  CHECK(cost_catalogue().size() == 7);
  for (const auto& entry : cost_catalogue()) {
    CostSpec spec;
    spec.name = entry.name;
    spec.dim = 2;
    auto c = make_cost(spec);
    CHECK(c->name() == entry.name);
    CHECK(c->smoothness_order() == 4);
  }
  CostSpec bad;
  bad.name = "nope";
  CHECK_THROWS_AS(make_cost(bad), ConfigError);
}
