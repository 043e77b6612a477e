#include "xvac/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

#include "xvac/errors.hpp"
#include "xvac/kernels.hpp"

namespace xvac {

namespace {

void validate_markets(std::span<const market_state> markets, double shift) {
  if (markets.size() < 2) throw validation_error("sensitivity: need the base market and at least one shock");
  if (shift == 0.0) throw validation_error("sensitivity: shock size must be non-zero");
  const auto& base = markets.front().paths;
  if (markets.front().shock_index() != 0) throw validation_error("sensitivity: first market must be unshocked");
  for (std::size_t m = 1; m < markets.size(); ++m) {
    const auto& p = markets[m].paths;
    if (p.dates() != base.dates() || p.paths() != base.paths())
      throw validation_error("sensitivity: markets simulated on different grids");
    if (!p.shares_noise_with(base)) throw validation_error("sensitivity: markets do not share simulated noise");
    if (markets[m].shock_index() <= 0) throw validation_error("sensitivity: shocked market without a shock");
  }
}

valuator wrap(const std::shared_ptr<const polynomial_approx>& g) {
  if (!g) return {};
  return [g](double x) { return g->evaluate(x); };
}

valuator wrap(const std::shared_ptr<const difference_approx>& g) {
  if (!g) return {};
  return [g](double x) { return g->evaluate(x); };
}

void require_branches(const valuator& live, const valuator& exercised, const exercise_map& exercise, std::size_t k,
                      std::size_t paths) {
  const std::size_t ex = exercise.empty() ? 0 : exercise.exercised_count(k);
  if (ex < paths && !live) throw validation_error("sensitivity: missing surrogate for the live branch");
  if (ex > 0 && !exercised) throw validation_error("sensitivity: missing surrogate for the exercised branch");
}

// Source returns the valuator of (market, date, branch).
template <class Source>
sensitivity_profile estimate(std::span<const market_state> markets, const exercise_map& exercise, double shift,
                             Source&& source, std::string method) {
  validate_markets(markets, shift);
  const auto& base = markets.front().paths;
  const auto grid = base.grid();
  const std::size_t paths = base.paths();
  const std::size_t n = markets.size() - 1;

  sensitivity_profile out;
  out.method = std::move(method);
  out.shift = shift;
  out.dates.assign(grid.begin(), grid.end());
  for (std::size_t m = 1; m < markets.size(); ++m) out.shocks.push_back(markets[m].shock_index());
  out.values.assign(grid.size() * n, 0.0);
  out.std_error.assign(grid.size() * n, 0.0);

  std::vector<double> v(paths), df(paths), v_i(paths), df_i(paths);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const valuator live = source(0, k, 0);
    const valuator exercised = exercise.empty() ? valuator{} : source(0, k, 1);
    require_branches(live, exercised, exercise, k, paths);
    path_values(base, k, exercise, live, exercised, v);
    base.discount_factors_at(k, df);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& shocked = markets[i + 1].paths;
      const valuator live_i = source(i + 1, k, 0);
      const valuator exercised_i = exercise.empty() ? valuator{} : source(i + 1, k, 1);
      require_branches(live_i, exercised_i, exercise, k, paths);
      path_values(shocked, k, exercise, live_i, exercised_i, v_i);
      shocked.discount_factors_at(k, df_i);
      const auto est = kernels::sensitivity_mean(df, df_i, v, v_i, shift);
      out.values[k * n + i] = est.value;
      out.std_error[k * n + i] = est.std_error;
    }
  }
  return out;
}

double trapezoid(std::span<const double> t, std::span<const double> y) {
  double acc = 0.0;
  for (std::size_t k = 1; k < t.size(); ++k) acc += 0.5 * (t[k] - t[k - 1]) * (y[k] + y[k - 1]);
  return acc;
}

}  // namespace

difference_table fit_low_order(std::span<const market_state> markets, const exercise_map& exercise,
                               const surrogate_table& full, std::size_t d) {
  if (d == 0) throw validation_error("fit_low_order: d must be positive");
  if (d > full.order) throw validation_error("fit_low_order: d exceeds N");
  if (full.fits.size() != markets.size()) throw validation_error("fit_low_order: surrogate table does not match markets");
  const std::size_t dates = full.fits.front().size();
  difference_table table;
  table.order = d;
  table.fits.assign(markets.size(), std::vector<std::array<std::shared_ptr<const difference_approx>, 2>>(dates));
  std::vector<std::vector<std::size_t>> spent(markets.size(), std::vector<std::size_t>(dates, 0));
  const auto grid = markets.front().paths.grid();
  (void)exercise;

  kernels::parallel_for((markets.size() - 1) * dates, [&](std::size_t cell) {
    const std::size_t m = 1 + cell / dates;
    const std::size_t k = cell % dates;
    valuation_counter counter;
    for (std::size_t b = 0; b < 2; ++b) {
      const auto& g_i = full.fits[m][k][b];
      if (!g_i) continue;
      const auto& g = full.fits[0][k][b];
      if (!g) throw validation_error("fit_low_order: shocked branch without an unshocked surrogate");
      const auto nodes = nested_subset(g_i->nodes(), d);
      table.fits[m][k][b] = std::make_shared<const difference_approx>(
          fit_difference(g, nodes, markets[m].pricer->at(grid[k], b == 1), &counter));
    }
    spent[m][k] = counter.count();
  });
  table.valuations_per_date.assign(dates, 0);
  for (std::size_t k = 0; k < dates; ++k) {
    table.valuations_per_date[k] = full.valuations[0][k];
    for (std::size_t m = 1; m < markets.size(); ++m) table.valuations_per_date[k] += spent[m][k];
  }
  return table;
}

sensitivity_profile psi_exact(std::span<const market_state> markets, const exercise_map& exercise, double shift) {
  auto out = estimate(markets, exercise, shift,
                      [&](std::size_t m, std::size_t k, std::size_t b) {
                        return markets[m].pricer->at(markets[m].paths.grid()[k], b == 1);
                      },
                      "exact");
  out.valuations_per_date.assign(out.dates.size(), markets.front().paths.paths() * markets.size());
  return out;
}

sensitivity_profile psi_full_order(std::span<const market_state> markets, const exercise_map& exercise,
                                   const surrogate_table& full, double shift) {
  if (full.fits.size() != markets.size()) throw validation_error("psi_full_order: surrogate table does not match markets");
  auto out = estimate(markets, exercise, shift,
                      [&](std::size_t m, std::size_t k, std::size_t b) { return wrap(full.fits[m].at(k)[b]); },
                      "full-" + std::to_string(full.order));
  for (std::size_t k = 0; k < out.dates.size(); ++k) out.valuations_per_date.push_back(full.valuations_at(k));
  return out;
}

sensitivity_profile psi_low_order(std::span<const market_state> markets, const exercise_map& exercise,
                                  const surrogate_table& full, const difference_table& low, double shift) {
  if (full.fits.size() != markets.size() || low.fits.size() != markets.size())
    throw validation_error("psi_low_order: surrogate tables do not match markets");
  auto out = estimate(markets, exercise, shift,
                      [&](std::size_t m, std::size_t k, std::size_t b) {
                        return m == 0 ? wrap(full.fits[0].at(k)[b]) : wrap(low.fits[m].at(k)[b]);
                      },
                      "low-" + std::to_string(low.order) + "-" + std::to_string(full.order));
  out.valuations_per_date = low.valuations_per_date;
  return out;
}

relative_error_matrix rel_error_profile(const sensitivity_profile& candidate, const sensitivity_profile& exact,
                                        double floor_fraction) {
  if (candidate.values.size() != exact.values.size() || candidate.cols() != exact.cols())
    throw validation_error("rel_error_profile: profiles have different shapes");
  relative_error_matrix out;
  out.rows = exact.rows();
  out.cols = exact.cols();
  double scale = 0.0;
  for (double v : exact.values) scale = std::max(scale, std::abs(v));
  out.floor = floor_fraction * scale;
  out.values.resize(exact.values.size());
  for (std::size_t q = 0; q < exact.values.size(); ++q) {
    if (std::abs(exact.values[q]) <= out.floor) {
      out.values[q] = std::numeric_limits<double>::quiet_NaN();
      ++out.undefined;
      continue;
    }
    out.values[q] = (candidate.values[q] - exact.values[q]) / exact.values[q];
    out.max_abs = std::max(out.max_abs, std::abs(out.values[q]));
  }
  return out;
}

integrated_error_result integrated_error(const sensitivity_profile& candidate, const sensitivity_profile& exact) {
  if (candidate.values.size() != exact.values.size() || candidate.dates != exact.dates)
    throw validation_error("integrated_error: profiles on different grids");
  integrated_error_result out;
  std::vector<double> diff(exact.rows()), mag(exact.rows());
  for (std::size_t i = 0; i < exact.cols(); ++i) {
    for (std::size_t k = 0; k < exact.rows(); ++k) {
      diff[k] = std::abs(candidate.at(k, i) - exact.at(k, i));
      mag[k] = std::abs(exact.at(k, i));
    }
    const double zeta = trapezoid(exact.dates, diff);
    const double norm = trapezoid(exact.dates, mag);
    if (!(norm > 0.0))
      throw undefined_metric_error("integrated_error: exact sensitivity to quote " + std::to_string(exact.shocks[i]) +
                                   " integrates to zero");
    out.zeta.push_back(zeta);
    out.kappa.push_back(zeta / norm);
  }
  return out;
}

std::vector<cost_row> cost_report(std::span<const sensitivity_profile* const> profiles) {
  std::vector<cost_row> rows;
  double full = 0.0;
  for (const auto* p : profiles) {
    cost_row row;
    row.method = p->method;
    for (std::size_t c : p->valuations_per_date) row.valuations_per_date = std::max(row.valuations_per_date, c);
    if (full == 0.0 && p->method.rfind("full", 0) == 0) full = static_cast<double>(row.valuations_per_date);
    rows.push_back(row);
  }
  for (auto& row : rows) row.share_of_full_order = full > 0.0 ? static_cast<double>(row.valuations_per_date) / full : 0.0;
  return rows;
}

std::vector<bound_record> bound_diagnostics(std::span<const market_state> markets, const exercise_map& exercise,
                                            const surrogate_table& full, const difference_table& low,
                                            double shift) {
  validate_markets(markets, shift);
  const auto& base = markets.front().paths;
  const auto grid = base.grid();
  const std::size_t paths = base.paths();
  std::vector<bound_record> out;

  std::vector<double> df(paths), df_i(paths), ddf(paths);
  std::vector<double> v(paths), g(paths), v_i(paths), g_i(paths), gt_i(paths), p0(paths), p_i(paths), g_at_i(paths);
  std::vector<double> exact_terms(paths), low_terms(paths);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double t = grid[k];
    const auto& fits0 = full.fits[0].at(k);
    path_values(base, k, exercise, markets[0].pricer->at(t, false),
                exercise.empty() ? valuator{} : markets[0].pricer->at(t, true), v);
    path_values(base, k, exercise, wrap(fits0[0]), wrap(fits0[1]), g);
    base.discount_factors_at(k, df);
    const double c1 = kernels::rms(df);
    const double eps0 = kernels::rms_difference(v, g);

    for (std::size_t m = 1; m < markets.size(); ++m) {
      const auto& shocked = markets[m].paths;
      const auto& fits_i = full.fits[m].at(k);
      const auto& diff_i = low.fits[m].at(k);
      shocked.discount_factors_at(k, df_i);
      for (std::size_t j = 0; j < paths; ++j) ddf[j] = (df_i[j] - df[j]) / shift;

      // Interpolants of g and g_i on the nested shocked nodes.
      std::array<valuator, 2> p0_fn, pi_fn;
      for (std::size_t b = 0; b < 2; ++b) {
        if (!diff_i[b]) continue;
        const auto& nodes = diff_i[b]->correction().nodes();
        auto pg = std::make_shared<const polynomial_approx>(fit(nodes, wrap(fits0[b])));
        auto pgi = std::make_shared<const polynomial_approx>(fit(nodes, wrap(fits_i[b])));
        p0_fn[b] = wrap(pg);
        pi_fn[b] = wrap(pgi);
      }
      path_values(shocked, k, exercise, markets[m].pricer->at(t, false),
                  exercise.empty() ? valuator{} : markets[m].pricer->at(t, true), v_i);
      path_values(shocked, k, exercise, wrap(fits_i[0]), wrap(fits_i[1]), g_i);
      path_values(shocked, k, exercise, wrap(diff_i[0]), wrap(diff_i[1]), gt_i);
      path_values(shocked, k, exercise, wrap(fits0[0]), wrap(fits0[1]), g_at_i);
      path_values(shocked, k, exercise, p0_fn[0], p0_fn[1], p0);
      path_values(shocked, k, exercise, pi_fn[0], pi_fn[1], p_i);

      bound_record rec;
      rec.t = t;
      rec.shock = markets[m].shock_index();
      rec.c1 = c1;
      rec.c2_fd = kernels::rms(ddf);
      rec.c2_decomposition = c1 * std::abs(shocked.integral(0, k) - base.integral(0, k)) / std::abs(shift);
      rec.eps0 = eps0;
      rec.eps_i = kernels::rms_difference(v_i, g_i);
      rec.delta0 = kernels::rms_difference(g_at_i, p0);
      rec.delta_i = kernels::rms_difference(g_i, p_i);
      rec.bound = rec.c2_fd * rec.eps0 + rec.c1 / std::abs(shift) * (rec.eps0 + rec.eps_i + rec.delta0 + rec.delta_i);
      const auto exact = kernels::sensitivity_mean(df, df_i, v, v_i, shift);
      const auto approx = kernels::sensitivity_mean(df, df_i, g, gt_i, shift);
      rec.observed = std::abs(exact.value - approx.value);
      // Both sides are differences of stored doubles divided by the shift; below
      // that resolution the comparison carries no information.
      const double magnitude = kernels::rms(v) + kernels::rms(v_i) + kernels::rms(g_at_i) + kernels::rms(gt_i);
      rec.roundoff = 16.0 * std::numeric_limits<double>::epsilon() * c1 * magnitude / std::abs(shift);
      rec.holds = rec.observed <= rec.bound * (1.0 + 1e-9) + rec.roundoff;
      out.push_back(rec);
    }
  }
  return out;
}

void write_sens_csv(const std::filesystem::path& file, const sensitivity_profile& exact,
                    const sensitivity_profile& full, const sensitivity_profile& low) {
  if (full.values.size() != exact.values.size() || low.values.size() != exact.values.size())
    throw validation_error("write_sens_csv: profiles have different shapes");
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << std::setprecision(15) << "t,i,psi_exact,psi_full,psi_low\n";
  for (std::size_t k = 0; k < exact.rows(); ++k)
    for (std::size_t i = 0; i < exact.cols(); ++i)
      out << exact.dates[k] << ',' << exact.shocks[i] << ',' << exact.at(k, i) << ',' << full.at(k, i) << ','
          << low.at(k, i) << '\n';
}

void write_kappa_csv(const std::filesystem::path& file, std::span<const std::size_t> orders,
                     std::span<const integrated_error_result> rows, std::span<const double> maturities) {
  if (orders.size() != rows.size()) throw validation_error("write_kappa_csv: one row per order expected");
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << std::setprecision(6) << "d";
  for (double m : maturities) out << ",T=" << m;
  out << '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out << orders[r];
    for (double k : rows[r].kappa) out << ',' << k;
    out << '\n';
  }
}

void write_cost_csv(const std::filesystem::path& file, std::span<const cost_row> rows) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "method,exact_valuations_per_date,share_of_full_order\n";
  out << std::fixed << std::setprecision(4);
  for (const auto& r : rows) out << r.method << ',' << r.valuations_per_date << ',' << r.share_of_full_order << '\n';
}

}  // namespace xvac
