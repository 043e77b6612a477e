#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "xvac/curve.hpp"
#include "xvac/errors.hpp"
#include "xvac/hullwhite.hpp"
#include "xvac/products.hpp"
#include "xvac/xva.hpp"

namespace xvac {

/// Config file problem; message names the offending field.
class config_error : public validation_error {
 public:
  using validation_error::validation_error;
};

/// Swap row with a fixed rate that may still be "par".
struct swap_row {
  swap terms;
  bool par = false;
};

struct bermudan_config {
  std::vector<double> exercise_dates;
  swap_row underlying;
  std::size_t training_paths = 5000;
  std::uint64_t training_seed = 0;  // 0: derived from the run seed
  std::size_t basis_degree = 2;
  std::size_t inner_paths = 1000;   // nested Monte Carlo cross-check only
};

struct run_config {
  std::string name = "run";
  std::uint64_t seed = 20240517;
  std::size_t paths = 20000;
  std::size_t nodes = 7;
  std::vector<std::size_t> low_orders{6, 5};
  double shift = 1e-4;
  hw_params model;
  double dates_per_year = 4.0;
  std::optional<double> horizon;
  double instrument_frequency = 2.0;
  std::vector<market_instrument> instruments;
  std::vector<int> shocks;  // empty: every instrument
  std::vector<swap_row> portfolio;
  std::optional<bermudan_config> bermudan;
  std::optional<hazard_model> hazard;
  std::vector<std::size_t> table_orders;  // d rows of the kappa table; empty: 2..N
  double nodes_date = 2.0;                // date of the node dump
  double ee_floor_fraction = 1e-8;        // times total notional
  double sens_floor_fraction = 1e-3;      // times the largest |exact sensitivity|
};

run_config load_config(const std::filesystem::path& file);
run_config parse_config(const std::string& text, const std::string& origin = "<string>");

/// Every field after defaults were applied, as JSON.
std::string resolved_config(const run_config& cfg);

}  // namespace xvac
