#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "otgeo/cost_zoo.hpp"
#include "otgeo/discrete.hpp"

using namespace otgeo;
using otgeo::testing::measure_1d;

namespace {
std::pair<Vec, Vec> pair1(double x, double y) {
  return {(Vec(1) << x).finished(), (Vec(1) << y).finished()};
}
}  // namespace

TEST_CASE("spacelike support check") {
  auto quad = quadratic_cost(1);
  const std::vector<std::pair<Vec, Vec>> monotone{pair1(0, 0), pair1(0.5, 0.7),
                                                  pair1(1.0, 1.2)};
  const SpacelikeReport ok = spacelike_support_check(*quad, monotone);
  CHECK(ok.pairs_checked == 6);
  CHECK(ok.min_normalized >= 0.0);

  const std::vector<std::pair<Vec, Vec>> anti{pair1(0, 1), pair1(1, 0)};
  const SpacelikeReport bad = spacelike_support_check(*quad, anti);
  CHECK(bad.min_normalized < 0.0);
  CHECK(bad.min_raw == doctest::Approx(-1.0));

  const std::vector<std::pair<Vec, Vec>> single{pair1(0.5, 0.5)};
  const SpacelikeReport vac = spacelike_support_check(*quad, single);
  CHECK(vac.pairs_checked == 0);

  // radius restricts to local pairs
  const SpacelikeReport local = spacelike_support_check(*quad, monotone, 0.8);
  CHECK(local.pairs_checked < 6);

  // every solved plan's support is spacelike for the quadratic cost
  std::mt19937_64 rng(8);
  auto mu = testing::random_measure(rng, 20, Box::cube(1, -1.0, 1.0));
  auto nu = testing::random_measure(rng, 20, Box::cube(1, -1.0, 1.0));
  const TransportPlan plan = solve_primal(*quad, mu, nu);
  CHECK(spacelike_support_check(*quad, plan.support_points()).min_normalized >= -1e-8);
}

TEST_CASE("local PCA dimension estimates") {
  std::vector<Vec> line;
  for (int i = 0; i < 30; ++i) line.push_back((Vec(2) << 0.1 * i, 0.2 * i).finished());
  const DimensionEstimate dl = local_dimension_estimate(line, 1.5);
  CHECK(dl.max_dim == 1);

  std::vector<Vec> patch;  // 2-D grid patch embedded in R^4
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j)
      patch.push_back((Vec(4) << 0.1 * i, 0.1 * j, 0.1 * (i + j), 0.05 * (i - j)).finished());
  const DimensionEstimate dp = local_dimension_estimate(patch, 0.5);
  CHECK(dp.max_dim == 2);

  // optimal support for the quadratic cost in 1-D: the monotone pairing
  // of two equispaced grids is collinear, dimension 1 = n+ + n- - k
  auto quad = quadratic_cost(1);
  auto mu = testing::uniform_measure(Box::cube(1, 0.0, 1.0).grid({40}));
  auto nu = testing::uniform_measure(Box::cube(1, 2.0, 4.0).grid({40}));
  const TransportPlan plan = solve_primal(*quad, mu, nu);
  std::vector<Vec> support;
  for (const auto& [x, y] : plan.support_points())
    support.push_back((Vec(2) << x[0], y[0]).finished());
  const DimensionEstimate ds = local_dimension_estimate(support, 0.5);
  CHECK(ds.max_dim == 1);

  // sparse neighborhoods are skipped and counted
  std::vector<Vec> sparse{(Vec(2) << 0, 0).finished(), (Vec(2) << 5, 5).finished()};
  const DimensionEstimate dsp = local_dimension_estimate(sparse, 0.1);
  CHECK(dsp.skipped == 2);
  CHECK(dsp.per_point[0] == -1);
}

TEST_CASE("rotated coordinates lipschitz ratio") {
  CHECK(rotated_lipschitz_check_1d({pair1(0, 0), pair1(1, 1)}).max_ratio ==
        doctest::Approx(0.0));
  CHECK(rotated_lipschitz_check_1d({pair1(0, 0), pair1(1, -1)}).max_ratio == kInf);
  CHECK(rotated_lipschitz_check_1d({pair1(0, 0), pair1(1, 0)}).max_ratio ==
        doctest::Approx(1.0));

  // monotone supports stay within the unit ratio
  std::mt19937_64 rng(10);
  auto mu = testing::random_measure(rng, 30, Box::cube(1, -1.0, 1.0));
  auto nu = testing::random_measure(rng, 30, Box::cube(1, -1.0, 1.0));
  const TransportPlan plan = monotone_rearrangement_1d(mu, nu);
  CHECK(rotated_lipschitz_check_1d(plan.support_points()).max_ratio <= 1.0 + 1e-12);
}

TEST_CASE("graph/antigraph decomposition") {
  auto mu = measure_1d({0.0, 1.0}, {0.5, 0.5});
  const TransportPlan bijection(mu, mu, {{0, 0, 0.5}, {1, 1, 0.5}});
  const Decomposition d1 = graph_antigraph_decompose(bijection);
  CHECK(d1.graph.size() == 2);
  CHECK(d1.antigraph.empty());
  CHECK(d1.residual_mass == 0.0);

  // one source splits to two targets, each target otherwise single
  auto one = measure_1d({0.0}, {1.0});
  auto two = measure_1d({1.0, 2.0}, {0.4, 0.6});
  const TransportPlan split(one, two, {{0, 0, 0.4}, {0, 1, 0.6}});
  const Decomposition d2 = graph_antigraph_decompose(split);
  CHECK(d2.graph.empty());
  CHECK(d2.antigraph.size() == 2);
  CHECK(d2.residual_mass == 0.0);

  // a staircase with shared source and target has a residual
  auto m2 = measure_1d({0.0, 1.0}, {0.5, 0.5});
  auto n3 = measure_1d({0.0, 1.0, 2.0}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  const TransportPlan chain(
      m2, n3, {{0, 0, 1.0 / 3}, {0, 1, 1.0 / 6}, {1, 1, 1.0 / 6}, {1, 2, 1.0 / 3}});
  const Decomposition d3 = graph_antigraph_decompose(chain);
  CHECK(d3.residual.size() == 2);
  CHECK(d3.residual_mass == doctest::Approx(1.0 / 3));
  CHECK(d3.antigraph.size() == 2);
}

TEST_CASE("monge map extraction") {
  auto mu = measure_1d({0.0, 1.0}, {0.5, 0.5});
  const TransportPlan identity(mu, mu, {{0, 0, 0.5}, {1, 1, 0.5}});
  const MongeExtraction m1 = extract_monge_map(identity);
  REQUIRE(m1.assignment.has_value());
  CHECK((*m1.assignment)[0] == 0);
  CHECK((*m1.assignment)[1] == 1);

  auto mu3 = measure_1d({0.0, 1.0, 2.0}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  auto nu2 = measure_1d({5.0, 6.0}, {1.0 / 3, 2.0 / 3});
  const MongeExtraction m2 = extract_monge_map(monotone_rearrangement_1d(mu3, nu2));
  REQUIRE(m2.assignment.has_value());
  CHECK(*m2.assignment == std::vector<int>{0, 1, 1});

  const TransportPlan product(mu, mu,
                              {{0, 0, 0.25}, {0, 1, 0.25}, {1, 0, 0.25}, {1, 1, 0.25}});
  const MongeExtraction m3 = extract_monge_map(product);
  CHECK(!m3.assignment.has_value());
  CHECK(m3.split_sources == std::vector<int>{0, 1});
}
