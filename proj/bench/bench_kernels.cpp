#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "xvac/curve.hpp"
#include "xvac/hullwhite.hpp"
#include "xvac/kernels.hpp"
#include "xvac/products.hpp"

namespace {

struct fixture {
  std::vector<double> r, df, df_i, v, v_i;
  xvac::valuator value;

  explicit fixture(std::size_t n) : r(n), df(n), df_i(n), v(n), v_i(n) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> z(0.02, 0.01);
    for (std::size_t j = 0; j < n; ++j) {
      r[j] = z(rng);
      df[j] = std::exp(-5.0 * r[j]);
      df_i[j] = df[j] * (1.0 - 1e-5);
      v[j] = 1e4 * (r[j] - 0.02);
      v_i[j] = v[j] + 0.3;
    }
    std::vector<xvac::market_instrument> inst;
    const double mats[] = {1, 2, 3, 5, 7, 10, 20, 30};
    const double quotes[] = {0.0004, 0.0016, 0.0031, 0.0081, 0.0128, 0.0162, 0.0222, 0.0230};
    for (int i = 0; i < 8; ++i) inst.push_back({i + 1, mats[i], quotes[i], 1.0});
    auto curve = std::make_shared<const xvac::yield_curve>(xvac::bootstrap(inst));
    auto model = std::make_shared<xvac::hull_white_model>(xvac::hw_params{}, curve, 0);
    xvac::swap s{1, 10000.0, 0.0222, 0.0, 20.0, 2.0};
    auto terms = std::make_shared<xvac::affine_bond_sum>(xvac::swap_terms(*model, s, 5.0));
    value = [terms](double x) { return (*terms)(x); };
  }
};

const fixture& data() {
  static const fixture f(1 << 16);
  return f;
}

void bm_evaluate_parallel(benchmark::State& state) {
  const auto& f = data();
  std::vector<double> out(f.r.size());
  for (auto _ : state) {
    xvac::kernels::evaluate(f.value, f.r, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void bm_evaluate_reference(benchmark::State& state) {
  const auto& f = data();
  std::vector<double> out(f.r.size());
  for (auto _ : state) {
    xvac::reference::evaluate(f.value, f.r, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void bm_exposure_parallel(benchmark::State& state) {
  const auto& f = data();
  for (auto _ : state) benchmark::DoNotOptimize(xvac::kernels::discounted_positive_mean(f.df, f.v));
}

void bm_exposure_reference(benchmark::State& state) {
  const auto& f = data();
  for (auto _ : state) benchmark::DoNotOptimize(xvac::reference::discounted_positive_mean(f.df, f.v));
}

void bm_sensitivity_parallel(benchmark::State& state) {
  const auto& f = data();
  for (auto _ : state) benchmark::DoNotOptimize(xvac::kernels::sensitivity_mean(f.df, f.df_i, f.v, f.v_i, 1e-4));
}

void bm_sensitivity_reference(benchmark::State& state) {
  const auto& f = data();
  for (auto _ : state) benchmark::DoNotOptimize(xvac::reference::sensitivity_mean(f.df, f.df_i, f.v, f.v_i, 1e-4));
}

}  // namespace

BENCHMARK(bm_evaluate_parallel);
BENCHMARK(bm_evaluate_reference);
BENCHMARK(bm_exposure_parallel);
BENCHMARK(bm_exposure_reference);
BENCHMARK(bm_sensitivity_parallel);
BENCHMARK(bm_sensitivity_reference);
BENCHMARK_MAIN();
