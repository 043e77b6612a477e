#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "xvac/config.hpp"
#include "xvac/exposure.hpp"
#include "xvac/sensitivity.hpp"
#include "xvac/xva.hpp"

namespace xvac {

/// Markets, paths and pricers built from a config.
struct scenario {
  run_config cfg;
  std::vector<std::shared_ptr<const yield_curve>> curves;  // [0] unshocked
  portfolio book;
  std::vector<double> grid;
  std::vector<market_state> markets;  // [0] unshocked, then one per shocked quote
  exercise_map exercise;
  std::optional<exercise_boundary> boundary;

  double ee_floor() const { return cfg.ee_floor_fraction * book.total_notional(); }
  const exercise_boundary* boundary_ptr() const { return boundary ? &*boundary : nullptr; }
};

/// t0 = 0 to `horizon` in steps of 1/per_year, plus the `extra` dates.
std::vector<double> monitoring_grid(double horizon, double per_year, std::span<const double> extra = {});

/// Replaces "par" fixed rates with the curve's par rate.
swap resolve(const swap_row& row, const yield_curve& curve);

/// Without shocks only the unshocked market is simulated.
scenario build_scenario(const run_config& cfg, bool with_shocks);

struct ee_run {
  exposure_profile exact;
  exposure_profile approx;
  surrogate_table table;
  double rel_error = 0.0;
};

ee_run run_ee(const scenario& s, std::size_t nodes);

struct sensitivity_run {
  sensitivity_profile exact;
  surrogate_table full_table;
  sensitivity_profile full;
  std::vector<std::size_t> orders;
  std::vector<difference_table> low_tables;
  std::vector<sensitivity_profile> low;
};

/// Exact, full-order and one low-order profile per d in `orders`.
sensitivity_run run_sensitivities(const scenario& s, std::size_t nodes, std::span<const std::size_t> orders);

struct cva_run {
  double independent = 0.0;
  double independent_error = 0.0;  // triangle-inequality bound from per-date errors
  sample_mean wwr_exact;
  sample_mean wwr_surrogate;
};

cva_run run_cva(const run_config& cfg);

/// CLI entry: runs one subcommand, writes its CSVs and the resolved config into
/// `out`, and prints a short summary. Throws on failure.
void run_subcommand(const std::string& command, const run_config& cfg, const std::filesystem::path& out,
                    bool dump_paths, std::ostream& log);

}  // namespace xvac
