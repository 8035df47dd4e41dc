// Microbenchmarks for the hot paths: per-pair kernel derivatives, system
// assembly, the direct and spectral solvers, model evaluation, and the KDE.

#include <benchmark/benchmark.h>

#include <cstdint>

#include "kexpfam/base_measure.hpp"
#include "kexpfam/fitted_model.hpp"
#include "kexpfam/kde.hpp"
#include "kexpfam/kernel.hpp"
#include "kexpfam/rng.hpp"
#include "kexpfam/score_system.hpp"
#include "kexpfam/solve.hpp"
#include "kexpfam/spectral.hpp"
#include "kexpfam/types.hpp"

namespace {

using namespace kexpfam;

Mat normal_samples(std::uint64_t seed, int n, int d) {
  Rng rng(seed);
  Mat samples(n, d);
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < d; ++i) samples(a, i) = rng.normal();
  return samples;
}

KernelSpec kernel_for(int family) {
  switch (family) {
    case 0:
      return make_gaussian(1.0);
    case 1:
      return make_gaussian_poly2(1.0, 0.1, 0.5);
    default:
      return make_imq(1.0, 0.5);
  }
}

void BM_PairDerivs(benchmark::State& state) {
  const KernelSpec spec = kernel_for(static_cast<int>(state.range(0)));
  const int d = static_cast<int>(state.range(1));
  Rng rng(1);
  Vec x(d), y(d);
  for (int i = 0; i < d; ++i) {
    x(i) = rng.normal();
    y(i) = rng.normal();
  }
  double acc = 0.0;
  for (auto _ : state) {
    const PairDerivs derivs(spec, x, y);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        acc += derivs.dxy(i, j) + derivs.dxxy(i, j) + derivs.dxxyy(i, j);
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * d * d);
}
BENCHMARK(BM_PairDerivs)
    ->ArgsProduct({{0, 1, 2}, {1, 4, 8}});

void BM_Assemble(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int d = static_cast<int>(state.range(1));
  const Mat samples = normal_samples(2, n, d);
  const KernelSpec spec = make_gaussian_poly2(1.0, 0.1, 0.5);
  const BaseMeasure base = BaseMeasure::uniform_box(Vec::Constant(d, -12.0),
                                                    Vec::Constant(d, 12.0));
  for (auto _ : state) {
    ScoreSystem sys = assemble(samples, spec, base, 0.1);
    benchmark::DoNotOptimize(sys.xi_norm2);
  }
}
BENCHMARK(BM_Assemble)->Args({100, 2})->Args({200, 4})->Args({100, 8});

void BM_SolveTikhonov(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int d = static_cast<int>(state.range(1));
  const Mat samples = normal_samples(3, n, d);
  const BaseMeasure base = BaseMeasure::uniform_box(Vec::Constant(d, -12.0),
                                                    Vec::Constant(d, 12.0));
  ScoreSystem sys =
      assemble(samples, make_gaussian_poly2(1.0, 0.1, 0.5), base, 0.01);
  for (auto _ : state) {
    TikhonovSolution sol = solve_tikhonov(sys);
    benchmark::DoNotOptimize(sol.alpha);
  }
}
BENCHMARK(BM_SolveTikhonov)->Args({100, 2})->Args({200, 4});

void BM_SolveSpectral(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int d = static_cast<int>(state.range(1));
  const Mat samples = normal_samples(4, n, d);
  const BaseMeasure base = BaseMeasure::uniform_box(Vec::Constant(d, -12.0),
                                                    Vec::Constant(d, 12.0));
  ScoreSystem sys =
      assemble(samples, make_gaussian_poly2(1.0, 0.1, 0.5), base, 0.01);
  for (auto _ : state) {
    FittedModel model =
        solve_spectral(sys, FilterSpec{FilterKind::Showalter, 0.01});
    benchmark::DoNotOptimize(model.alpha());
  }
}
BENCHMARK(BM_SolveSpectral)->Args({100, 2})->Args({200, 4});

void BM_ModelEval(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int d = static_cast<int>(state.range(1));
  const Mat samples = normal_samples(5, n, d);
  const BaseMeasure base = BaseMeasure::uniform_box(Vec::Constant(d, -12.0),
                                                    Vec::Constant(d, 12.0));
  const FittedModel model =
      fit_tikhonov(samples, make_gaussian_poly2(1.0, 0.1, 0.5), base, 0.01);
  Rng rng(6);
  Vec y(d), grad(d), lap(d);
  for (int i = 0; i < d; ++i) y(i) = rng.normal();
  double f = 0.0;
  for (auto _ : state) {
    model.eval_f_parts(y, &f, &grad, &lap);
    benchmark::DoNotOptimize(f);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ModelEval)->Args({200, 2})->Args({500, 8});

void BM_KdeLogDensity(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int d = static_cast<int>(state.range(1));
  const KdeModel kde = kde_fit(normal_samples(7, n, d), 0.5);
  Rng rng(8);
  Vec y(d);
  for (int i = 0; i < d; ++i) y(i) = rng.normal();
  for (auto _ : state) {
    benchmark::DoNotOptimize(kde_log_density(kde, y));
  }
}
BENCHMARK(BM_KdeLogDensity)->Args({500, 2})->Args({500, 8});

}  // namespace

BENCHMARK_MAIN();
