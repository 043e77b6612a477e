#pragma once

#include <memory>
#include <vector>

#include "xvac/config.hpp"
#include "xvac/curve.hpp"
#include "xvac/experiments.hpp"
#include "xvac/hullwhite.hpp"

namespace test_util {

// Par quotes of the eight-instrument reference curve, semiannual fixed legs.
inline std::vector<xvac::market_instrument> reference_instruments() {
  const double mats[] = {1, 2, 3, 5, 7, 10, 20, 30};
  const double quotes[] = {0.0004, 0.0016, 0.0031, 0.0081, 0.0128, 0.0162, 0.0222, 0.0230};
  std::vector<xvac::market_instrument> out;
  for (int i = 0; i < 8; ++i) out.push_back({i + 1, mats[i], quotes[i], 2.0});
  return out;
}

inline std::shared_ptr<const xvac::yield_curve> reference_curve() {
  static const auto curve = std::make_shared<const xvac::yield_curve>(xvac::bootstrap(reference_instruments()));
  return curve;
}

inline std::shared_ptr<const xvac::yield_curve> shocked_reference_curve(int index, double shift = 1e-4) {
  return std::make_shared<const xvac::yield_curve>(xvac::shocked_curve(reference_instruments(), {index, shift}));
}

inline xvac::hull_white_model reference_model(double eta = 0.02) {
  return xvac::hull_white_model({0.01, eta}, reference_curve());
}

inline std::vector<double> quarterly_grid(double horizon) {
  std::vector<double> g;
  for (int k = 0; k <= static_cast<int>(horizon * 4 + 0.5); ++k) g.push_back(k / 4.0);
  return g;
}

// Reference curve and one payer par swap; small enough for unit tests.
inline const char* single_swap_rows() { return R"([[1, 10000, "par", 20, 0, 2]])"; }

inline xvac::run_config small_config(std::size_t paths, std::size_t nodes, const std::string& extra = "",
                                     const std::string& portfolio = single_swap_rows()) {
  const std::string text = R"({
    "seed": 7, "paths": )" + std::to_string(paths) + R"(, "nodes": )" + std::to_string(nodes) + R"(,
    "low_orders": [], "instrument_frequency": 2,
    "instruments": [[1,1,0.04],[2,2,0.16],[3,3,0.31],[4,5,0.81],[5,7,1.28],[6,10,1.62],[7,20,2.22],[8,30,2.30]],
    "portfolio": )" + portfolio + extra + "}";
  return xvac::parse_config(text);
}

}  // namespace test_util
