#include <benchmark/benchmark.h>

#include "equiflow/dirac_models.hpp"
#include "equiflow/eta_zeta.hpp"
#include "equiflow/generators.hpp"
#include "equiflow/maslov.hpp"
#include "equiflow/specflow.hpp"
#include "equiflow/spectra.hpp"
#include "equiflow/winding.hpp"

using namespace equiflow;

static void BM_EigHermitian(benchmark::State& state) {
  gen::Stream rng(1, 0);
  const CMatrix m = gen::random_hermitian(static_cast<int>(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(spectra::eig_hermitian(m));
}
BENCHMARK(BM_EigHermitian)->Arg(4)->Arg(16)->Arg(64);

static specflow::HermitianPath random_path(int n) {
  gen::Stream rng(2, n);
  const auto action = gen::random_cyclic_action(n, 3, rng);
  return specflow::make_path(gen::random_hermitian_path(action, rng), n, action.generator());
}

static void BM_SpectralFlowGrid(benchmark::State& state) {
  const auto path = random_path(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(specflow::spectral_flow(path));
}
BENCHMARK(BM_SpectralFlowGrid)->Arg(2)->Arg(4)->Arg(8);

static void BM_CrossingOracle(benchmark::State& state) {
  const auto path = random_path(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(specflow::crossing_oracle(path));
}
BENCHMARK(BM_CrossingOracle)->Arg(2)->Arg(4)->Arg(8);

static void BM_Getzler(benchmark::State& state) {
  const auto path = random_path(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(eta_zeta::getzler_spectral_flow(path));
}
BENCHMARK(BM_Getzler)->Arg(2)->Arg(4)->Arg(8);

static void BM_WindingNumber(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  gen::Stream rng(3, n);
  const auto action = gen::random_cyclic_action(n, 3, rng);
  const auto f = winding::make_unitary_path(gen::random_unitary_path(action, rng), n, action.generator());
  for (auto _ : state) benchmark::DoNotOptimize(winding::winding_number(f));
}
BENCHMARK(BM_WindingNumber)->Arg(2)->Arg(4)->Arg(8);

static void BM_MaslovGrid(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  gen::Stream rng(4, n);
  const auto action = gen::random_cyclic_action(n, 3, rng);
  const auto l1 = maslov::make_lagrangian_path(gen::random_unitary_path(action, rng), n, action.generator());
  const auto l2 = maslov::make_lagrangian_path(gen::random_unitary_path(action, rng), n, action.generator());
  for (auto _ : state) benchmark::DoNotOptimize(maslov::maslov_index(l1, l2, maslov::Mode::Grid));
}
BENCHMARK(BM_MaslovGrid)->Arg(2)->Arg(4);

static void BM_CircleEta(benchmark::State& state) {
  CMatrix v(1, 1);
  v(0, 0) = 0.25;
  const auto model = dirac::make_circle_model(v, CMatrix(), 3);
  dirac::EtaOptions opts;
  opts.cutoff = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(dirac::circle_eta(model, {{0, 0}, {0, 1}}, opts));
}
BENCHMARK(BM_CircleEta)->Arg(50)->Arg(200)->Arg(800);

static void BM_IntervalEta(benchmark::State& state) {
  gen::Stream rng(5, 0);
  const int m = static_cast<int>(state.range(0));
  const auto model = dirac::make_interval_model(1.0, gen::random_hermitian(m, rng));
  const auto p = symplectic::make_projection_from_unitary(gen::random_unitary(m, rng));
  const std::vector<CMatrix> ops{CMatrix::Identity(m, m)};
  dirac::EtaOptions opts;
  opts.cutoff = 100.0;
  for (auto _ : state) benchmark::DoNotOptimize(dirac::interval_eta(model, p, ops, opts));
}
BENCHMARK(BM_IntervalEta)->Arg(1)->Arg(2)->Arg(4);

BENCHMARK_MAIN();
