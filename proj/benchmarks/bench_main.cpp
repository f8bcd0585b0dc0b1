#include <benchmark/benchmark.h>

#include <random>

#include "otgeo/cost_zoo.hpp"
#include "otgeo/discrete.hpp"
#include "otgeo/mtw.hpp"

namespace {

using namespace otgeo;

MeasurePtr random_measure(std::mt19937_64& rng, int count, const Box& box) {
  std::vector<Vec> atoms;
  std::vector<double> w;
  std::uniform_real_distribution<double> wdist(0.5, 1.5);
  for (int i = 0; i < count; ++i) {
    atoms.push_back(box.sample_interior(rng));
    w.push_back(wdist(rng));
  }
  return std::make_shared<DiscreteMeasure>(
      DiscreteMeasure::create(std::move(atoms), std::move(w)));
}

void BM_SolvePrimal(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto cost = quadratic_cost(2);
  std::mt19937_64 rng(42);
  auto mu = random_measure(rng, n, cost->domain_x());
  auto nu = random_measure(rng, n, cost->domain_y());
  const Mat costs = cost_matrix(*cost, *mu, *nu);
  for (auto _ : state) {
    auto plan = solve_primal(costs, mu, nu);
    benchmark::DoNotOptimize(plan.entries().size());
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_SolvePrimal)->Arg(16)->Arg(64)->Arg(200)->Complexity();

void BM_SignatureScan(benchmark::State& state) {
  auto chord = circle_chord_cost();
  const auto pts = Box::circle().grid({static_cast<int>(state.range(0))});
  for (auto _ : state) {
    int degenerate = 0;
    for (const auto& x0 : pts)
      for (const auto& y0 : pts) {
        const Signature s = signature(hessian_h(*chord, BasePoint{x0, y0}));
        if (s.rank == 0) ++degenerate;
      }
    benchmark::DoNotOptimize(degenerate);
  }
}
BENCHMARK(BM_SignatureScan)->Arg(32)->Arg(100);

void BM_MtwKernel(benchmark::State& state) {
  auto lg = log_cost(2);
  const BasePoint base{(Vec(2) << 0.0, 0.0).finished(), (Vec(2) << 1.0, 0.0).finished()};
  const Vec p = (Vec(2) << 1.0, 0.0).finished();
  const Vec q = (Vec(2) << 0.0, 1.0).finished();
  for (auto _ : state) {
    MtwKernel kernel(*lg, base);
    benchmark::DoNotOptimize(kernel(p, q));
  }
}
BENCHMARK(BM_MtwKernel);

void BM_CcmExact(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto quad = quadratic_cost(1);
  std::vector<std::pair<Vec, Vec>> support;
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / n;
    support.emplace_back((Vec(1) << t).finished(), (Vec(1) << t + 0.5).finished());
  }
  for (auto _ : state) {
    auto cert = check_ccm(*quad, support, 5, "exact");
    benchmark::DoNotOptimize(cert.nodes_visited);
  }
}
BENCHMARK(BM_CcmExact)->Arg(8)->Arg(12)->Arg(16);

void BM_Christoffel(benchmark::State& state) {
  auto lg = log_cost(2);
  const BasePoint base{(Vec(2) << 0.0, 0.0).finished(), (Vec(2) << 1.5, 0.5).finished()};
  for (auto _ : state) {
    auto gamma = christoffel(*lg, base);
    benchmark::DoNotOptimize(gamma.gamma.size());
  }
}
BENCHMARK(BM_Christoffel);

}  // namespace

BENCHMARK_MAIN();
