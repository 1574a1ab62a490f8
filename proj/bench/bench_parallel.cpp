// OpenMP kernels against their serial references.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "dset/diagnostics.hpp"
#include "dset/hmc.hpp"
#include "dset/models.hpp"
#include "dset/tilting.hpp"

using namespace dset;

namespace {

RelaxedPosterior robust_vmf(double rho) {
  const double s = 1.0 / std::sqrt(3.0);
  return {build_model(StudentTLocationSpec{Vector::Constant(3, s), 3.0, 0.1}),
          ConstraintSet(Sphere{Vector::Zero(3), 1.0}), SquaredDistance{rho}};
}

hmc::HmcConfig chain_config(int chains) {
  hmc::HmcConfig c;
  c.num_chains = chains;
  c.num_warmup = 200;
  c.num_samples = 200;
  c.integration_time = 1.0;
  c.target_accept = 0.95;
  return c;
}

void BM_SampleChains(benchmark::State& state) {
  const auto post = robust_vmf(1e4);
  const auto config = chain_config(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(hmc::sample_chains(post, config));
}

void BM_SampleChainsSerial(benchmark::State& state) {
  const auto post = robust_vmf(1e4);
  const auto config = chain_config(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(hmc::sample_chains_serial(post, config));
}

diag::LogDensityFn relaxed_normal() {
  const RelaxedPosterior post(build_model(GaussianLinearSpec{Matrix::Identity(2, 2), Vector::Ones(2), 1.0}),
                              ConstraintSet(Ball{Vector::Zero(2), 1.0}), SquaredDistance{100.0});
  return [post](const Vector& x) { return post.logp(x); };
}

void BM_GridDensity(benchmark::State& state) {
  const auto f = relaxed_normal();
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(diag::make_grid_density(f, 2, {-4, -4}, {4, 4}, {n, n}));
}

void BM_GridDensitySerial(benchmark::State& state) {
  const auto f = relaxed_normal();
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(diag::make_grid_density_serial(f, 2, {-4, -4}, {4, 4}, {n, n}));
}

std::vector<Vector> table_draws(int n) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.2, 0.1);
  std::vector<Vector> out(static_cast<std::size_t>(n), Vector(16));
  for (auto& v : out) {
    for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = normal(rng);
  }
  return out;
}

void BM_HalfSqDistances(benchmark::State& state) {
  const ConstraintSet set(StochasticDominance{4, 4});
  const auto draws = table_draws(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(tilting::half_sq_distances(set, draws));
}

void BM_HalfSqDistancesSerial(benchmark::State& state) {
  const ConstraintSet set(StochasticDominance{4, 4});
  const auto draws = table_draws(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(tilting::half_sq_distances_serial(set, draws));
}

}  // namespace

BENCHMARK(BM_SampleChains)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SampleChainsSerial)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_GridDensity)->Arg(500)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_GridDensitySerial)->Arg(500)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_HalfSqDistances)->Arg(20000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_HalfSqDistancesSerial)->Arg(20000)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
