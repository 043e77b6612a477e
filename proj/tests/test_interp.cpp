#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "doctest.h"
#include "xvac/errors.hpp"
#include "xvac/interp.hpp"

using namespace xvac;

namespace {

// Jacobi matrix of the probabilists' Hermite recurrence, solved densely.
void eigen_hermite(std::size_t n, std::vector<double>& x, std::vector<double>& w) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 1; k < n; ++k) j(k - 1, k) = j(k, k - 1) = std::sqrt(double(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  x.resize(n);
  w.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    x[k] = es.eigenvalues()(k);
    w[k] = es.eigenvectors()(0, k) * es.eigenvectors()(0, k);
  }
}

}  // namespace

TEST_CASE("golub_welsch on standard normal moments matches Gauss-Hermite") {
  for (std::size_t n : {1, 3, 5, 7, 9}) {
    const auto m = normal_moments(0.0, 1.0, 2 * n - 1);
    const auto rule = golub_welsch(m, n);
    std::vector<double> x, w;
    eigen_hermite(n, x, w);
    REQUIRE(rule.size() == n);
    for (std::size_t k = 0; k < n; ++k) {
      CHECK(std::abs(rule.nodes[k] - x[k]) < 1e-10);
      CHECK(std::abs(rule.weights[k] - w[k]) < 1e-10);
    }
  }
}

TEST_CASE("published Hermite zeros and weights") {
  const auto r3 = hermite_nodes(0.0, 1.0, 3);
  CHECK(r3.nodes[0] == doctest::Approx(-std::sqrt(3.0)).epsilon(1e-14));
  CHECK(r3.nodes[1] == 0.0);
  CHECK(r3.weights[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK(r3.weights[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));

  const double x5[] = {1.355626179974266, 2.8569700138728056};
  const double w5[] = {0.5333333333333333, 0.22207592200561257, 0.011257411327720677};
  const auto r5 = hermite_nodes(0.0, 1.0, 5);
  CHECK(std::abs(r5.nodes[3] - x5[0]) < 1e-13);
  CHECK(std::abs(r5.nodes[4] - x5[1]) < 1e-13);
  for (int k = 0; k < 3; ++k) CHECK(std::abs(r5.weights[2 + k] - w5[k]) < 1e-13);

  const double x7[] = {1.1544053947399682, 2.366759410734541, 3.7504397177257425};
  const double w7[] = {0.45714285714285714, 0.2401231786050127, 0.03075712396758652, 0.000548268855972217};
  const auto r7 = hermite_nodes(0.0, 1.0, 7);
  for (int k = 0; k < 3; ++k) CHECK(std::abs(r7.nodes[4 + k] - x7[k]) < 1e-13);
  for (int k = 0; k < 4; ++k) CHECK(std::abs(r7.weights[3 + k] - w7[k]) < 1e-13);
}

TEST_CASE("golub_welsch is affine equivariant and agrees with hermite_nodes") {
  const auto gw = golub_welsch(normal_moments(0.02, 0.015, 13), 7);
  const auto he = hermite_nodes(0.02, 0.015, 7);
  for (std::size_t k = 0; k < 7; ++k) {
    CHECK(std::abs(gw.nodes[k] - he.nodes[k]) < 1e-10);
    CHECK(std::abs(gw.weights[k] - he.weights[k]) < 1e-10);
  }
  const auto one = golub_welsch(normal_moments(0.3, 2.0, 1), 1);
  CHECK(one.nodes[0] == doctest::Approx(0.3));
  CHECK(one.weights[0] == 1.0);
}

TEST_CASE("golub_welsch integrates monomials exactly against the moments") {
  const auto m = truncated_normal_moments(0.01, 0.02, 0.015, 19);
  const auto rule = golub_welsch(m, 10);
  for (std::size_t j = 0; j < 20; ++j) {
    double acc = 0.0;
    for (std::size_t k = 0; k < rule.size(); ++k) acc += rule.weights[k] * std::pow(rule.nodes[k], double(j));
    CHECK(std::abs(acc - m[j]) <= 1e-10 * std::abs(m[j]) + 1e-300);
  }
}

TEST_CASE("golub_welsch rejects moments of no distribution") {
  std::vector<double> bad{1.0, 0.0, -1.0, 0.0};
  CHECK_THROWS_AS(golub_welsch(bad, 2), validation_error);
  std::vector<double> m{1.0, 0.0, 1.0, 0.0, 0.5, 0.0};  // kurtosis below one: minor of order 3 fails
  try {
    golub_welsch(m, 3);
    FAIL("expected validation_error");
  } catch (const validation_error& e) {
    CHECK(std::string(e.what()).find("order 3") != std::string::npos);
  }
}

TEST_CASE("truncated normal moments") {
  const auto full = truncated_normal_moments(0.4, 1.3, std::numeric_limits<double>::infinity(), 8);
  const auto plain = normal_moments(0.4, 1.3, 8);
  for (std::size_t k = 0; k <= 8; ++k) CHECK(full[k] == doctest::Approx(plain[k]).epsilon(1e-12));

  const auto half = truncated_normal_moments(0.0, 1.0, 0.0, 4);
  CHECK(half[1] == doctest::Approx(-std::sqrt(2.0 / M_PI)).epsilon(1e-12));
  CHECK(half[2] == doctest::Approx(1.0).epsilon(1e-12));

  // numerical-integration oracle, Simpson on [mu - 12 sigma, b]
  const double mu = 0.01, sigma = 0.03, b = 0.02;
  const auto m = truncated_normal_moments(mu, sigma, b, 6);
  const int n = 200000;
  const double lo = mu - 12 * sigma, h = (b - lo) / n;
  std::vector<double> acc(7, 0.0);
  for (int i = 0; i <= n; ++i) {
    const double x = lo + i * h;
    const double c = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double f = std::exp(-0.5 * (x - mu) * (x - mu) / (sigma * sigma));
    for (int k = 0; k <= 6; ++k) acc[k] += c * f * std::pow(x, k);
  }
  for (int k = 1; k <= 6; ++k) CHECK(m[k] == doctest::Approx(acc[k] / acc[0]).epsilon(1e-9));
  CHECK(m[1] < mu);
  CHECK_THROWS_AS(truncated_normal_moments(0.0, 1.0, -10.0, 3), validation_error);
}

TEST_CASE("chebyshev nodes") {
  const auto a = chebyshev_nodes(-1.0, 1.0, 3);
  CHECK(a.nodes[0] == -1.0);
  CHECK(std::abs(a.nodes[1]) < 1e-15);
  CHECK(a.nodes[2] == 1.0);
  const auto b = chebyshev_nodes(0.0, 2.0, 3);
  CHECK(b.nodes[1] == doctest::Approx(1.0));
  const auto c = chebyshev_nodes(-1.0, 1.0, 9);
  CHECK(c.nodes[1] - c.nodes[0] < c.nodes[5] - c.nodes[4]);
  CHECK(c.weights.empty());
}

TEST_CASE("nested subsets") {
  const auto full = hermite_nodes(0.0, 1.0, 7);
  const auto d5 = nested_subset(full, 5);
  const auto d6 = nested_subset(full, 6);
  REQUIRE(d5.size() == 5);
  REQUIRE(d6.size() == 6);
  for (std::size_t k = 0; k < 5; ++k) CHECK(d5.nodes[k] == full.nodes[k + 1]);
  for (std::size_t k = 0; k < 6; ++k) CHECK(d6.nodes[k] == full.nodes[k]);
  CHECK(nested_subset(full, 7).nodes == full.nodes);
  CHECK_THROWS_AS(nested_subset(full, 8), validation_error);
  // nestedness for every d <= d'
  for (std::size_t d = 1; d <= 7; ++d)
    for (std::size_t e = d; e <= 7; ++e) {
      const auto small = nested_subset(full, d), big = nested_subset(full, e);
      for (double x : small.nodes) CHECK(std::find(big.nodes.begin(), big.nodes.end(), x) != big.nodes.end());
    }
}

TEST_CASE("interpolation reproduces polynomials and counts calls") {
  const auto nodes = hermite_nodes(0.5, 0.3, 7);
  valuation_counter counter;
  auto poly = [](double x) { return 1.0 - 2.0 * x + 0.5 * x * x * x - 0.1 * std::pow(x, 6); };
  const auto g = fit(nodes, poly, &counter);
  CHECK(counter.count() == 7);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    const double x = u(rng);
    CHECK(g(x) == doctest::Approx(poly(x)).epsilon(1e-9));
  }
  for (std::size_t k = 0; k < 7; ++k) CHECK(g(nodes.nodes[k]) == g.values()[k]);
  const auto c = fit(nodes, [](double) { return 4.2; });
  CHECK(c(13.0) == doctest::Approx(4.2));
  const auto id = fit(node_set{{0.0, 1.0}, {}, "pair"}, [](double x) { return x; });
  CHECK(id(-7.5) == doctest::Approx(-7.5));
  CHECK(g.extrapolates(10.0));
  CHECK_THROWS_AS(polynomial_approx(node_set{{0.0, 0.0}, {}, "dup"}, {1.0, 2.0}), validation_error);
}

TEST_CASE("barycentric and Lagrange forms agree") {
  const auto nodes = hermite_nodes(0.0, 1.0, 7);
  auto runge = [](double x) { return 1.0 / (1.0 + 25.0 * x * x); };
  const auto g = fit(nodes, runge);
  CHECK(std::abs(g(0.0) - lagrange_evaluate(nodes.nodes, g.values(), 0.0)) < 1e-12);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v(7);
    for (double& x : v) x = z(rng);
    const polynomial_approx p(nodes, v);
    for (int i = 0; i < 10; ++i) {
      const double x = 2.0 * z(rng);
      const double ref = lagrange_evaluate(nodes.nodes, v, x);
      CHECK(std::abs(p(x) - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
    }
  }
}

TEST_CASE("difference surrogates") {
  const auto nodes = hermite_nodes(0.0, 1.0, 7);
  auto v = [](double x) { return std::exp(0.3 * x); };
  auto vi = [](double x) { return std::exp(0.31 * x) + 0.01; };
  auto g = std::make_shared<const polynomial_approx>(fit(nodes, v));

  valuation_counter counter;
  const auto full = fit_difference(g, nodes, vi, &counter);
  CHECK(counter.count() == 7);
  const auto direct = fit(nodes, vi);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  for (int i = 0; i < 100; ++i) {
    const double x = z(rng);
    CHECK(full(x) == doctest::Approx(direct(x)).epsilon(1e-9));
  }

  const auto null_shock = fit_difference(g, nested_subset(nodes, 3), v);
  for (double x : {-2.0, 0.1, 1.7}) CHECK(std::abs(null_shock.correction()(x)) < 1e-12);

  const auto d2 = nested_subset(nodes, 2);
  const auto lin = fit_difference(g, d2, vi);
  const double x0 = d2.nodes[0], x1 = d2.nodes[1];
  const double y0 = vi(x0) - (*g)(x0), y1 = vi(x1) - (*g)(x1);
  for (double x : {-1.0, 0.0, 2.5}) CHECK(lin.correction()(x) == doctest::Approx(y0 + (y1 - y0) * (x - x0) / (x1 - x0)));
  for (double x : d2.nodes) CHECK(lin(x) == doctest::Approx(vi(x)).epsilon(1e-13));
}

TEST_CASE("Hermite nodes beat Chebyshev nodes in L2 under the normal law") {
  auto f = [](double x) { return std::exp(x); };
  const auto gh = fit(hermite_nodes(0.0, 1.0, 5), f);
  const auto ch = fit(chebyshev_nodes(-4.0, 4.0, 5), f);
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> z;
  const int m = 1000000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < m; ++i) {
    const double x = z(rng);
    const double d = std::pow(ch(x) - f(x), 2) - std::pow(gh(x) - f(x), 2);
    s += d;
    s2 += d * d;
  }
  const double mean = s / m;
  const double se = std::sqrt((s2 / m - mean * mean) / m);
  CHECK(mean > 3.0 * se);
}
