#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "xvac/hullwhite.hpp"
#include "xvac/interp.hpp"
#include "xvac/products.hpp"

namespace xvac {

/// Per path, the grid column at which the Bermudan was exercised (npos if never).
/// An empty map means the portfolio carries no optionality.
struct exercise_map {
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> column;

  bool empty() const { return column.empty(); }
  bool exercised(std::size_t j, std::size_t k) const { return !column.empty() && column[j] <= k; }
  /// 1 where path j is in the exercised branch at column k; empty for an empty map.
  std::vector<unsigned char> mask(std::size_t k) const;
  std::size_t exercised_count(std::size_t k) const;
};

exercise_map make_exercise_map(const path_set& paths, const exercise_boundary& boundary);

/// One market: its model, exact pricer and the simulated paths (sharing the
/// base market's noise).
struct market_state {
  hull_white_model model;
  std::shared_ptr<const portfolio_pricer> pricer;
  path_set paths;

  int shock_index() const;  // 0 for the unshocked market
};

/// Which valuation function applies on a path: `live` is the portfolio as held
/// (swaps plus unexercised optionality), `exercised` has the Bermudan replaced by
/// its underlying.
enum class branch : std::size_t { live = 0, exercised = 1 };

using branch_pair = std::array<std::shared_ptr<const polynomial_approx>, 2>;

/// Collocation surrogates g(t_k, .) per market, date and branch.
struct surrogate_table {
  std::size_t order = 0;
  std::vector<std::vector<branch_pair>> fits;             // [market][date]
  std::vector<std::vector<std::size_t>> valuations;       // [market][date], exact calls spent fitting

  std::size_t valuations_at(std::size_t k) const;  // summed over markets
};

/// Hermite nodes of r(t) in `model` (stddev floored at 1e-4 so t0 still gets N distinct nodes).
node_set marginal_nodes(const hull_white_model& model, double t, std::size_t order);

/// Gauss nodes of r(t) on paths that have not exercised: the continuation law at
/// the latest exercise date S_k <= t carried to t by the exact OU transition.
/// Before the first exercise date this is the marginal rule.
node_set truncated_nodes(const hull_white_model& model, double t, const exercise_boundary& boundary,
                         std::size_t order);

/// Discrete measure (points and weights summing to one).
struct weighted_points {
  std::vector<double> x;
  std::vector<double> w;
};

/// N(mu, sigma^2) restricted to one side of b, as a composite Gauss-Legendre measure.
weighted_points truncated_normal_points(double mu, double sigma, double b, bool keep_below);

/// Law of r(S_last) on paths that continued at every exercise date up to and
/// including S_last, propagated through the exact OU transitions.
weighted_points continuation_law(const hull_white_model& model, const exercise_boundary& boundary,
                                 std::size_t last);

/// Standardized moments m_0..m_order of (Y - mean)/sd for Y = a + c X + s E,
/// X given as a discrete measure and E standard normal.
struct standardized_moments {
  double mean = 0.0;
  double sd = 1.0;
  std::vector<double> moments;
};
standardized_moments affine_gaussian_moments(const weighted_points& law, double a, double c, double s,
                                             std::size_t order);

/// Single-truncation special case of the above.
standardized_moments propagated_truncated_moments(double mu, double sigma, double b, bool keep_below, double a,
                                                  double c, double s, std::size_t order);

/// Fits every (market, date, branch) that some path uses. With a boundary the
/// live branch uses truncated nodes, otherwise marginal Hermite nodes.
surrogate_table fit_surrogates(std::span<const market_state> markets, const exercise_map& exercise,
                               std::size_t order, const exercise_boundary* boundary = nullptr);

struct exposure_profile {
  std::vector<double> dates;
  std::vector<double> ee;
  std::vector<double> std_error;
  std::string method;
  std::size_t exact_valuations = 0;
  std::size_t extrapolations = 0;
};

/// Portfolio value of every path at column k: live or exercised valuator per path.
void path_values(const path_set& paths, std::size_t k, const exercise_map& exercise, const valuator& live,
                 const valuator& exercised, std::span<double> out);

exposure_profile ee_exact(const market_state& market, const exercise_map& exercise);

/// Same estimator with g+ in place of V+; `market` indexes the surrogate table.
exposure_profile ee_approx(const market_state& state, const exercise_map& exercise, const surrogate_table& table,
                           std::size_t market = 0);

/// max_t |EE~ - EE| / EE over dates with EE above `floor`.
double ee_rel_error(const exposure_profile& exact, const exposure_profile& approx, double floor);

void write_ee_csv(const std::filesystem::path& file, const exposure_profile& exact, const exposure_profile& approx,
                  double floor);

}  // namespace xvac
