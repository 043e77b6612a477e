#include <cmath>
#include <random>

#include "doctest.h"
#include "test_util.hpp"
#include "xvac/errors.hpp"
#include "xvac/experiments.hpp"
#include "xvac/exposure.hpp"

using namespace xvac;

TEST_CASE("exact EE of a par swap: zero at inception, bounded by the absolute value") {
  const auto s = build_scenario(test_util::small_config(2000, 7), false);
  const auto& market = s.markets[0];
  const auto ee = ee_exact(market, s.exercise);
  CHECK(ee.ee[0] < 1e-10 * 10000.0);
  CHECK(ee.exact_valuations == market.paths.paths() * market.paths.dates());
  std::vector<double> v(market.paths.paths()), df(market.paths.paths());
  for (std::size_t k = 0; k < market.paths.dates(); ++k) {
    const double t = s.grid[k];
    path_values(market.paths, k, s.exercise, market.pricer->at(t, false), market.pricer->at(t, true), v);
    market.paths.discount_factors_at(k, df);
    double abs_mean = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) abs_mean += df[j] * std::abs(v[j]);
    abs_mean /= static_cast<double>(v.size());
    CHECK(ee.ee[k] >= 0.0);
    CHECK(ee.ee[k] <= abs_mean + 1e-12);
  }
}

TEST_CASE("EE vanishes after the last payment") {
  const auto s = build_scenario(test_util::small_config(500, 5, R"(, "horizon": 8)", R"([[1, 10000, 0.01, 5, 0, 2]])"),
                                false);
  const auto ee = ee_exact(s.markets[0], s.exercise);
  for (std::size_t k = 0; k < s.grid.size(); ++k)
    if (s.grid[k] >= 5.0) CHECK(ee.ee[k] == 0.0);
}

TEST_CASE("surrogate EE: counters, node consistency and convergence in N") {
  const auto s = build_scenario(test_util::small_config(4000, 7), false);
  const auto& market = s.markets[0];
  const auto exact = ee_exact(market, s.exercise);
  const std::vector<market_state> one{market};

  double previous = 1.0;
  for (std::size_t n : {3, 7, 13}) {
    const auto table = fit_surrogates(one, s.exercise, n);
    CHECK(table.valuations_at(3) == n);
    const auto approx = ee_approx(market, s.exercise, table);
    CHECK(approx.exact_valuations == n * s.grid.size());
    const double err = ee_rel_error(exact, approx, s.ee_floor());
    CHECK(err <= previous);
    previous = err;
  }
  CHECK(previous < 1e-6);

  const auto table = fit_surrogates(one, s.exercise, 7);
  for (std::size_t k : {4, 40, 79}) {
    const auto& g = *table.fits[0][k][0];
    const auto exact_fn = market.pricer->at(s.grid[k], false);
    for (std::size_t q = 0; q < g.nodes().size(); ++q)
      CHECK(std::max(g(g.nodes().nodes[q]), 0.0) == doctest::Approx(std::max(exact_fn(g.nodes().nodes[q]), 0.0)));
  }
}

TEST_CASE("relative EE error metric") {
  exposure_profile a;
  a.dates = {0.0, 1.0, 2.0};
  a.ee = {0.0, 10.0, 20.0};
  exposure_profile b = a;
  CHECK(ee_rel_error(a, b, 1e-6) == 0.0);
  b.ee[2] = 20.2;
  CHECK(ee_rel_error(a, b, 1e-6) == doctest::Approx(0.01));
  b.ee[1] = 9.0;
  CHECK(ee_rel_error(a, b, 1e-6) == doctest::Approx(0.1));
  CHECK_THROWS_AS(ee_rel_error(a, b, 100.0), undefined_metric_error);
  exposure_profile c = a;
  c.dates.pop_back();
  c.ee.pop_back();
  CHECK_THROWS_AS(ee_rel_error(a, c, 1e-6), validation_error);
}

TEST_CASE("single truncation moments against two-dimensional quadrature") {
  // Y = a + c X + s E, X ~ N(mu, sigma^2) | X < b
  const double mu = 0.01, sigma = 0.02, b = 0.015, a = 0.002, c = 0.97, s = 0.008;
  const auto m = propagated_truncated_moments(mu, sigma, b, true, a, c, s, 6);
  // raw moments of Y by Simpson in X with the Gaussian moments of E in closed form
  const int n = 20000;
  const double lo = mu - 12 * sigma, h = (b - lo) / n;
  double mass = 0.0;
  std::vector<double> raw(7, 0.0);
  for (int i = 0; i <= n; ++i) {
    const double x = lo + i * h;
    const double wgt = ((i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0)) * std::exp(-0.5 * std::pow((x - mu) / sigma, 2));
    mass += wgt;
    const double loc = a + c * x;
    const auto ym = normal_moments(loc, s, 6);
    for (int k = 0; k <= 6; ++k) raw[k] += wgt * ym[k];
  }
  for (double& r : raw) r /= mass;
  const double mean = raw[1];
  const double sd = std::sqrt(raw[2] - mean * mean);
  CHECK(m.mean == doctest::Approx(mean).epsilon(1e-10));
  CHECK(m.sd == doctest::Approx(sd).epsilon(1e-9));
  // standardized third and fourth moments
  const double m3 = (raw[3] - 3 * mean * raw[2] + 2 * std::pow(mean, 3)) / std::pow(sd, 3);
  const double m4 = (raw[4] - 4 * mean * raw[3] + 6 * mean * mean * raw[2] - 3 * std::pow(mean, 4)) / std::pow(sd, 4);
  CHECK(m.moments[0] == 1.0);
  CHECK(std::abs(m.moments[1]) < 1e-12);
  CHECK(m.moments[2] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(m.moments[3] == doctest::Approx(m3).epsilon(1e-7));
  CHECK(m.moments[4] == doctest::Approx(m4).epsilon(1e-7));
}

TEST_CASE("continuation law matches Monte Carlo of paths that never exercised") {
  const auto model = test_util::reference_model();
  exercise_boundary boundary;
  boundary.dates = {1.0, 2.0, 3.0};
  boundary.thresholds = {0.012, 0.018, 0.020};
  boundary.side = exercise_side::above;

  const auto law = continuation_law(model, boundary, 2);
  double mean = 0.0, var = 0.0;
  for (std::size_t q = 0; q < law.x.size(); ++q) mean += law.w[q] * law.x[q];
  for (std::size_t q = 0; q < law.x.size(); ++q) var += law.w[q] * std::pow(law.x[q] - mean, 2);

  const std::vector<double> grid{0.0, 1.0, 2.0, 3.0};
  const std::size_t m = 400000;
  gaussian_noise noise(31, m, 3);
  const auto paths = simulate(model, grid, m, noise);
  std::vector<double> kept;
  for (std::size_t j = 0; j < m; ++j)
    if (paths.r(j, 1) <= 0.012 && paths.r(j, 2) <= 0.018 && paths.r(j, 3) <= 0.020) kept.push_back(paths.r(j, 3));
  double mc_mean = 0.0, mc_var = 0.0;
  for (double x : kept) mc_mean += x;
  mc_mean /= kept.size();
  for (double x : kept) mc_var += (x - mc_mean) * (x - mc_mean);
  mc_var /= kept.size() - 1;
  const double se = std::sqrt(mc_var / kept.size());
  CHECK(std::abs(mean - mc_mean) < 4.0 * se);
  CHECK(std::sqrt(var) == doctest::Approx(std::sqrt(mc_var)).epsilon(0.01));

  // one date reduces to the plain truncated normal
  const auto one = continuation_law(model, boundary, 0);
  const auto l0 = model.marginal_law(1.0);
  const auto ref = truncated_normal_moments(l0.mean, l0.stddev(), 0.012, 1);
  double m1 = 0.0;
  for (std::size_t q = 0; q < one.x.size(); ++q) m1 += one.w[q] * one.x[q];
  CHECK(m1 == doctest::Approx(ref[1]).epsilon(1e-10));
}

TEST_CASE("truncated nodes before the first exercise date are the marginal rule") {
  const auto model = test_util::reference_model();
  exercise_boundary boundary;
  boundary.dates = {1.0, 2.0};
  boundary.thresholds = {0.012, 0.018};
  const auto a = truncated_nodes(model, 0.5, boundary, 7);
  const auto b = marginal_nodes(model, 0.5, 7);
  for (std::size_t k = 0; k < 7; ++k) CHECK(a.nodes[k] == doctest::Approx(b.nodes[k]).epsilon(1e-12));
  const auto c = truncated_nodes(model, 1.0, boundary, 7);
  CHECK(c.nodes.back() < 0.012);
}

TEST_CASE("exercise map") {
  exercise_map map;
  map.column = {exercise_map::npos, 3, 5};
  CHECK_FALSE(map.exercised(0, 10));
  CHECK(map.exercised(1, 3));
  CHECK_FALSE(map.exercised(2, 4));
  CHECK(map.exercised_count(5) == 2);
  const auto mask = map.mask(4);
  CHECK(mask == std::vector<unsigned char>{0, 1, 0});
  CHECK(exercise_map{}.mask(3).empty());
}
