#include "xvac/xva.hpp"

#include <algorithm>
#include <cmath>

#include "xvac/errors.hpp"

namespace xvac {

namespace {

double euler_step(const hazard_model& h, double y, double dt, double db) {
  const double yp = std::max(y, 0.0);
  return y + h.kappa * (h.level - yp) * dt + h.volatility * std::sqrt(yp) * db;
}

}  // namespace

void validate(const hazard_model& h) {
  if (!(h.lgd >= 0.0 && h.lgd <= 1.0)) throw validation_error("hazard: LGD must lie in [0,1]");
  if (!(std::abs(h.rho) <= 1.0)) throw validation_error("hazard: correlation must lie in [-1,1]");
  if (!(h.kappa >= 0.0)) throw validation_error("hazard: mean reversion must be non-negative");
  if (!(h.volatility >= 0.0)) throw validation_error("hazard: volatility must be non-negative");
  if (!(h.initial >= 0.0) || !(h.level >= 0.0)) throw validation_error("hazard: intensity levels must be non-negative");
}

joint_paths simulate_joint(const hw_params& params, const hazard_model& hazard, std::span<const double> grid,
                           std::size_t paths, std::uint64_t seed) {
  validate(hazard);
  validate_grid(grid, grid.empty() ? 0.0 : grid.front());
  const std::size_t steps = grid.size() - 1;
  const gaussian_noise noise(seed, paths, steps, 4);
  joint_paths out;
  out.rates = simulate_ou(params, grid, noise, true);
  const std::size_t dates = grid.size();
  out.y.assign(paths * dates, 0.0);
  out.int_y.assign(paths * dates, 0.0);
  const double orth = std::sqrt(std::max(1.0 - hazard.rho * hazard.rho, 0.0));
  const auto n = static_cast<long long>(paths);
#pragma omp parallel for schedule(static)
  for (long long jj = 0; jj < n; ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    const auto z = noise.path(j);
    const double* w = out.rates->w.data() + j * dates;
    double* y = out.y.data() + j * dates;
    double* iy = out.int_y.data() + j * dates;
    y[0] = hazard.initial;
    for (std::size_t k = 0; k < steps; ++k) {
      const double h = grid[k + 1] - grid[k];
      const double db = hazard.rho * (w[k + 1] - w[k]) + orth * std::sqrt(h) * z[4 * k + 3];
      y[k + 1] = euler_step(hazard, y[k], h, db);
      iy[k + 1] = iy[k] + 0.5 * h * (std::max(y[k], 0.0) + std::max(y[k + 1], 0.0));
    }
  }
  return out;
}

std::vector<double> deterministic_survival(const hazard_model& hazard, std::span<const double> grid) {
  validate(hazard);
  std::vector<double> s(grid.size(), 1.0);
  double y = hazard.initial;
  double integral = 0.0;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double h = grid[k] - grid[k - 1];
    const double next = y + hazard.kappa * (hazard.level - std::max(y, 0.0)) * h;
    integral += 0.5 * h * (std::max(y, 0.0) + std::max(next, 0.0));
    y = next;
    s[k] = std::exp(-integral);
  }
  return s;
}

double cva_independent(const exposure_profile& ee, std::span<const double> survival, double lgd) {
  if (!(lgd >= 0.0 && lgd <= 1.0)) throw validation_error("cva_independent: LGD must lie in [0,1]");
  if (survival.size() != ee.ee.size()) throw validation_error("cva_independent: survival curve does not match the grid");
  double total = 0.0;
  double pd_sum = 0.0;
  for (std::size_t k = 1; k < survival.size(); ++k) {
    const double pd = survival[k - 1] - survival[k];
    if (pd < 0.0) throw validation_error("cva_independent: negative default probability increment");
    pd_sum += pd;
    total += ee.ee[k] * pd;
  }
  if (pd_sum > 1.0 + 1e-12) throw validation_error("cva_independent: default probabilities exceed one");
  return lgd * total;
}

sample_mean cva_wwr(const joint_paths& joint, const market_state& market, const exercise_map& exercise, double lgd,
                    const surrogate_table* surrogates) {
  if (!(lgd >= 0.0 && lgd <= 1.0)) throw validation_error("cva_wwr: LGD must lie in [0,1]");
  if (&market.paths.shared() != joint.rates.get())
    throw validation_error("cva_wwr: exposure paths are not the jointly simulated rate paths");
  const auto& paths = market.paths;
  const auto grid = paths.grid();
  const std::size_t m = paths.paths();
  std::vector<double> per_path(m, 0.0), v(m), df(m), previous(m, 0.0);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    valuator live, exercised;
    if (surrogates) {
      const auto& fits = surrogates->fits.at(0).at(k);
      if (fits[0]) live = [g = fits[0]](double x) { return g->evaluate(x); };
      if (fits[1]) exercised = [g = fits[1]](double x) { return g->evaluate(x); };
    } else {
      live = market.pricer->at(grid[k], false);
      if (!exercise.empty()) exercised = market.pricer->at(grid[k], true);
    }
    path_values(paths, k, exercise, live, exercised, v);
    paths.discount_factors_at(k, df);
    const double h = k == 0 ? 0.0 : grid[k] - grid[k - 1];
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t q = j * grid.size() + k;
      const double density = std::exp(-joint.int_y[q]) * std::max(joint.y[q], 0.0);
      const double term = df[j] * density * std::max(v[j], 0.0);
      if (k > 0) per_path[j] += 0.5 * h * (previous[j] + term);
      previous[j] = term;
    }
  }
  auto est = kernels::mean_and_stderr(per_path);
  est.value *= lgd;
  est.std_error *= lgd;
  return est;
}

}  // namespace xvac
