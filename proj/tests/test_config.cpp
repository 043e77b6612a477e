#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "test_util.hpp"
#include "xvac/config.hpp"

using namespace xvac;

namespace {

std::string with(const std::string& extra) {
  return R"({"instruments": [[1,1,0.04],[2,2,0.16]], "portfolio": [[1, 100, "par", 2, 0, 2]])" + extra + "}";
}

void expect_field(const std::string& text, const std::string& field) {
  try {
    parse_config(text);
    FAIL("expected config_error for " << field);
  } catch (const config_error& e) {
    CHECK_MESSAGE(std::string(e.what()).find(field) != std::string::npos, e.what());
  }
}

}  // namespace

TEST_CASE("defaults and parsing") {
  const auto cfg = parse_config(with(""));
  CHECK(cfg.paths == 20000);
  CHECK(cfg.nodes == 7);
  CHECK(cfg.low_orders == std::vector<std::size_t>{6, 5});
  CHECK(cfg.shift == 1e-4);
  CHECK(cfg.dates_per_year == 4.0);
  CHECK(cfg.model.mean_reversion == 0.01);
  CHECK(cfg.model.volatility == 0.02);
  REQUIRE(cfg.instruments.size() == 2);
  CHECK(cfg.instruments[1].quote == doctest::Approx(0.0016));
  REQUIRE(cfg.portfolio.size() == 1);
  CHECK(cfg.portfolio[0].par);
  CHECK(cfg.portfolio[0].terms.payments_per_year == 2.0);
  CHECK_FALSE(cfg.hazard.has_value());
}

TEST_CASE("comments are allowed") {
  const auto cfg = parse_config(R"({
    // curve
    "instruments": [[1, 1, 0.04]],
    /* book */ "portfolio": [[-1, 5, 0.01, 1, 0, 1]]
  })");
  CHECK(cfg.portfolio[0].terms.sign == -1);
  CHECK(cfg.portfolio[0].terms.fixed_rate == 0.01);
}

TEST_CASE("field-level errors") {
  expect_field(with(R"(, "pathz": 3)"), "pathz");
  expect_field(with(R"(, "paths": 0)"), "paths");
  expect_field(with(R"(, "paths": "many")"), "paths");
  expect_field(with(R"(, "nodes": 5, "low_orders": [6])"), "low_orders");
  expect_field(with(R"(, "paths": -5)"), "paths");
  expect_field(with(R"(, "nodes": 7.5)"), "nodes");
  expect_field(with(R"(, "low_orders": [-1])"), "low_orders[0]");
  CHECK_THROWS_AS(parse_config("{\"shift\": 1e400}"), config_error);
  expect_field(with(R"(, "volatility": -0.1)"), "volatility");
  expect_field(with(R"(, "shocks": [3])"), "shocks");
  expect_field(with(R"(, "hazard": {"rho": 2})"), "hazard");
  expect_field(with(R"(, "hazard": {"rhoo": 0.1})"), "hazard.rhoo");
  expect_field(with(R"(, "bermudan": {"exercise_dates": [1]})"), "bermudan.underlying");
  expect_field(R"({"instruments": [[1,1,0.04],[3,2,0.1]], "portfolio": [[1,1,0.01,1,0,1]]})", "instruments[1]");
  expect_field(R"({"instruments": [[1,1,0.04]], "portfolio": [[1,1,"atm",1,0,1]]})", "portfolio[0]");
  expect_field(R"({"portfolio": [[1,1,0.01,1,0,1]]})", "instruments");
  expect_field(R"({"instruments": [[1,1,0.04]]})", "portfolio");
  CHECK_THROWS_AS(parse_config("{ not json"), config_error);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), config_error);
}

TEST_CASE("resolved config round-trips") {
  const auto cfg = parse_config(with(R"(, "hazard": {"rho": 0.3}, "horizon": 1.5, "seed": 9)"));
  const auto again = parse_config(resolved_config(cfg));
  CHECK(resolved_config(again) == resolved_config(cfg));
  CHECK(again.seed == 9);
  CHECK(*again.horizon == 1.5);
  CHECK(again.hazard->rho == 0.3);
}

TEST_CASE("shipped configs parse") {
  for (const auto& entry : std::filesystem::directory_iterator(XVAC_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(load_config(entry.path()));
  }
}
