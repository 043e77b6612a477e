#include <cmath>

#include "doctest.h"
#include "test_util.hpp"
#include "xvac/curve.hpp"
#include "xvac/errors.hpp"

using namespace xvac;

namespace {

// Par rate from discount factors, written out independently of the library.
double par_from_discounts(const yield_curve& c, double maturity, double freq) {
  double annuity = 0.0;
  const int n = static_cast<int>(std::lround(maturity * freq));
  for (int k = 1; k <= n; ++k) annuity += c.discount(k / freq) / freq;
  return (1.0 - c.discount(maturity)) / annuity;
}

}  // namespace

TEST_CASE("bootstrap reprices every instrument") {
  const auto instruments = test_util::reference_instruments();
  const auto curve = bootstrap(instruments);
  for (const auto& q : instruments) {
    CHECK(std::abs(par_from_discounts(curve, q.maturity, q.frequency) - q.quote) < 1e-10);
    CHECK(std::abs(par_swap_rate(curve, 0.0, q.maturity, q.frequency) - q.quote) < 1e-10);
  }
  CHECK(curve.discount(0.0) == doctest::Approx(1.0));
  CHECK(curve.t0() == 0.0);
  CHECK(curve.last_time() == 30.0);
}

TEST_CASE("discount factors decrease and are log-linear between knots") {
  const auto curve = bootstrap(test_util::reference_instruments());
  double prev = 1.0;
  for (double t = 0.1; t <= 30.0; t += 0.1) {
    const double p = curve.discount(t);
    CHECK(p <= prev + 1e-15);
    prev = p;
  }
  const double a = std::log(curve.discount(10.0));
  const double b = std::log(curve.discount(20.0));
  CHECK(std::log(curve.discount(13.0)) == doctest::Approx(a + 0.3 * (b - a)).epsilon(1e-13));
  CHECK(curve.instantaneous_forward(13.0) == doctest::Approx(-(b - a) / 10.0).epsilon(1e-12));
}

TEST_CASE("extension continues the last forward flat") {
  const auto curve = bootstrap(test_util::reference_instruments());
  const double f = curve.forward_extended(40.0);
  CHECK(f == doctest::Approx(curve.instantaneous_forward(29.9)).epsilon(1e-12));
  CHECK(curve.log_discount_extended(35.0) ==
        doctest::Approx(std::log(curve.discount(30.0)) - 5.0 * f).epsilon(1e-12));
  CHECK_THROWS_AS(curve.discount(30.5), domain_error);
}

TEST_CASE("a quote shock only moves the curve from the previous knot on") {
  const auto base = bootstrap(test_util::reference_instruments());
  const auto shocked = shocked_curve(test_util::reference_instruments(), {5, 1e-4});
  REQUIRE(shocked.shock().has_value());
  CHECK(shocked.shock()->index == 5);
  for (double t : {0.5, 1.0, 3.0, 5.0}) CHECK(shocked.discount(t) == doctest::Approx(base.discount(t)).epsilon(1e-14));
  CHECK(shocked.discount(7.0) < base.discount(7.0));
  CHECK(std::abs(par_swap_rate(shocked, 0.0, 7.0, 2.0) - 0.0129) < 1e-10);
}

TEST_CASE("twenty year par rate of the reference curve") {
  const auto curve = bootstrap(test_util::reference_instruments());
  CHECK(std::abs(par_swap_rate(curve, 0.0, 20.0, 2.0) - 0.02226) < 5e-4);
}

TEST_CASE("payment schedule and validation") {
  const auto s = payment_schedule(1.0, 3.0, 2.0);
  REQUIRE(s.size() == 4);
  CHECK(s.front() == doctest::Approx(1.5));
  CHECK(s.back() == doctest::Approx(3.0));
  std::vector<market_instrument> bad{{1, 2.0, 0.01, 1.0}, {2, 1.0, 0.01, 1.0}};
  CHECK_THROWS_AS(bootstrap(bad), validation_error);
  CHECK_THROWS_AS(shocked_curve(test_util::reference_instruments(), {9, 1e-4}), validation_error);
}
