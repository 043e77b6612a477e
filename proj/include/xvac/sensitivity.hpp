#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "xvac/exposure.hpp"

namespace xvac {

/// Per date and shocked quote: d EE(t) / d K_i by forward difference.
struct sensitivity_profile {
  std::vector<double> dates;
  std::vector<int> shocks;           // instrument indices, 1-based
  std::vector<double> values;        // [date][shock], row-major
  std::vector<double> std_error;
  std::string method;
  double shift = 1e-4;
  std::vector<std::size_t> valuations_per_date;  // exact valuations, all markets

  std::size_t rows() const { return dates.size(); }
  std::size_t cols() const { return shocks.size(); }
  double at(std::size_t k, std::size_t i) const { return values[k * shocks.size() + i]; }
};

/// Shocked-market surrogates g~_i = g + h_i, h_i fitted on d nested nodes.
struct difference_table {
  std::size_t order = 0;  // d
  std::vector<std::vector<std::array<std::shared_ptr<const difference_approx>, 2>>> fits;  // [market][date]
  std::vector<std::size_t> valuations_per_date;  // base fit plus n*d per active branch
};

difference_table fit_low_order(std::span<const market_state> markets, const exercise_map& exercise,
                               const surrogate_table& full, std::size_t d);

/// markets[0] is the unshocked market; every other entry carries one quote shock and
/// must share the base market's simulated noise.
sensitivity_profile psi_exact(std::span<const market_state> markets, const exercise_map& exercise, double shift);

sensitivity_profile psi_full_order(std::span<const market_state> markets, const exercise_map& exercise,
                                   const surrogate_table& full, double shift);

sensitivity_profile psi_low_order(std::span<const market_state> markets, const exercise_map& exercise,
                                  const surrogate_table& full, const difference_table& low, double shift);

/// Entrywise (candidate - exact) / exact; NaN where |exact| <= floor.
struct relative_error_matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  double floor = 0.0;
  std::size_t undefined = 0;
  double max_abs = 0.0;  // over defined entries

  bool defined(std::size_t k, std::size_t i) const { return values[k * cols + i] == values[k * cols + i]; }
  double at(std::size_t k, std::size_t i) const { return values[k * cols + i]; }
};

/// The floor is floor_fraction times the largest |exact| entry.
relative_error_matrix rel_error_profile(const sensitivity_profile& candidate, const sensitivity_profile& exact,
                                        double floor_fraction = 1e-3);

/// zeta_i = int |cand - exact| dt and kappa_i = zeta_i / int |exact| dt, trapezoid rule.
struct integrated_error_result {
  std::vector<double> zeta;
  std::vector<double> kappa;
};

integrated_error_result integrated_error(const sensitivity_profile& candidate, const sensitivity_profile& exact);

struct cost_row {
  std::string method;
  std::size_t valuations_per_date = 0;
  double share_of_full_order = 0.0;
};

/// One row per profile with the largest per-date count (counts vary by date only
/// when a Bermudan branch is unused). The share column is relative to the first
/// profile tagged "full-*".
std::vector<cost_row> cost_report(std::span<const sensitivity_profile* const> profiles);

struct bound_record {
  double t = 0.0;
  int shock = 0;
  double c1 = 0.0;
  double c2_fd = 0.0;              // from pathwise discount-factor differences
  double c2_decomposition = 0.0;   // C1 times the derivative of the integrated shift
  double eps0 = 0.0;
  double eps_i = 0.0;
  double delta0 = 0.0;
  double delta_i = 0.0;
  double bound = 0.0;
  double observed = 0.0;
  double roundoff = 0.0;  // floating-point resolution of observed and bound
  bool holds = true;
};

/// Empirical check of |Psi - Psi_{d,N}| <= C2 eps0 + C1/dK (eps0 + eps_i + delta0 + delta_i)
/// with every norm an L2 norm over the simulated paths.
std::vector<bound_record> bound_diagnostics(std::span<const market_state> markets, const exercise_map& exercise,
                                            const surrogate_table& full, const difference_table& low,
                                            double shift);

void write_sens_csv(const std::filesystem::path& file, const sensitivity_profile& exact,
                    const sensitivity_profile& full, const sensitivity_profile& low);
void write_kappa_csv(const std::filesystem::path& file, std::span<const std::size_t> orders,
                     std::span<const integrated_error_result> rows, std::span<const double> maturities);
void write_cost_csv(const std::filesystem::path& file, std::span<const cost_row> rows);

}  // namespace xvac
