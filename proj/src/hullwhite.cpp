#include "xvac/hullwhite.hpp"

#include <cmath>
#include <random>
#include <string>

#include "xvac/errors.hpp"

namespace xvac {

namespace {

// x - 2(1-e^{-x}) + (1-e^{-2x})/2, i.e. lambda^3/eta^2 times Var(int_0^h u).
double integral_variance_shape(double x) {
  if (x < 1e-2) {
    const double x2 = x * x;
    const double x3 = x2 * x;
    return x3 * (1.0 / 3.0 + x * (-1.0 / 4.0 + x * (7.0 / 60.0 + x * (-1.0 / 24.0 + x * 31.0 / 2520.0))));
  }
  return x + 2.0 * std::expm1(-x) - 0.5 * std::expm1(-2.0 * x);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void validate_params(const hw_params& p) {
  if (!(p.mean_reversion > 0.0)) throw validation_error("hull_white: mean reversion must be positive");
  if (!(p.volatility > 0.0)) throw validation_error("hull_white: volatility must be positive");
}

}  // namespace

double normal_law::stddev() const { return std::sqrt(variance); }

ou_step make_ou_step(const hw_params& params, double h) {
  const double lambda = params.mean_reversion;
  const double eta2 = params.volatility * params.volatility;
  const double x = lambda * h;
  const double a1 = -std::expm1(-x);
  const double a2 = -std::expm1(-2.0 * x);
  const double f = integral_variance_shape(x);

  ou_step s;
  s.decay = std::exp(-x);
  s.integral_gain = a1 / lambda;
  s.var_u = eta2 * a2 / (2.0 * lambda);
  s.cov = eta2 * a1 * a1 / (2.0 * lambda * lambda);
  s.var_int = eta2 * f / (lambda * lambda * lambda);
  s.sd_u = std::sqrt(s.var_u);
  s.int_load = s.sd_u > 0.0 ? s.cov / s.sd_u : 0.0;
  const double resid = eta2 / (lambda * lambda * lambda) * (f - a1 * a1 * a1 * a1 / (2.0 * a2));
  s.sd_int_resid = std::sqrt(std::max(resid, 0.0));
  s.cov_u_w = params.volatility * a1 / lambda;
  s.cov_int_w = params.volatility * (x - a1) / (lambda * lambda);
  return s;
}

hull_white_model::hull_white_model(hw_params params, std::shared_ptr<const yield_curve> curve, int market)
    : params_(params), curve_(std::move(curve)), market_(market) {
  validate_params(params_);
  if (!curve_) throw validation_error("hull_white: curve is null");
}

double hull_white_model::initial_rate() const { return psi(t0()); }

double hull_white_model::psi(double t) const {
  const double lambda = params_.mean_reversion;
  const double eta = params_.volatility;
  const double a = -std::expm1(-lambda * (t - t0()));
  return curve_->forward_extended(t) + eta * eta / (2.0 * lambda * lambda) * a * a;
}

double hull_white_model::integrated_psi(double t) const {
  const double lambda = params_.mean_reversion;
  const double eta = params_.volatility;
  const double convexity =
      eta * eta / (2.0 * lambda * lambda * lambda) * integral_variance_shape(lambda * (t - t0()));
  return -curve_->log_discount_extended(t) + convexity;
}

normal_law hull_white_model::marginal_law(double t) const {
  if (t < t0()) throw domain_error("hull_white: marginal law before t0");
  const double lambda = params_.mean_reversion;
  const double eta = params_.volatility;
  const double dt = t - t0();
  normal_law law;
  law.mean = psi(t) + (initial_rate() - psi(t0())) * std::exp(-lambda * dt);
  law.variance = eta * eta * (-std::expm1(-2.0 * lambda * dt)) / (2.0 * lambda);
  return law;
}

bond_coefficients hull_white_model::bond(double t, double maturity) const {
  const double lambda = params_.mean_reversion;
  const double eta = params_.volatility;
  const double b = -std::expm1(-lambda * (maturity - t)) / lambda;
  const double var_t = -std::expm1(-2.0 * lambda * (t - t0()));
  bond_coefficients c;
  c.b = b;
  c.log_a = curve_->log_discount_extended(maturity) - curve_->log_discount_extended(t) +
            b * curve_->forward_extended(t) - eta * eta / (4.0 * lambda) * var_t * b * b;
  return c;
}

double hull_white_model::zcb_price(double t, double maturity, double r) const {
  if (t < t0()) throw domain_error("zcb_price: t precedes t0");
  if (maturity < t) throw domain_error("zcb_price: maturity precedes t");
  if (maturity == t) return 1.0;
  const auto c = bond(t, maturity);
  return std::exp(c.log_a - c.b * r);
}

gaussian_noise::gaussian_noise(std::uint64_t seed, std::size_t paths, std::size_t steps, std::size_t per_step)
    : seed_(seed), paths_(paths), steps_(steps), per_step_(per_step), draws_(paths * steps * per_step) {
  if (paths == 0) throw validation_error("gaussian_noise: need at least one path");
  if (per_step == 0) throw validation_error("gaussian_noise: need at least one draw per step");
  const auto n = static_cast<long long>(paths);
  const std::size_t stride = steps * per_step;
#pragma omp parallel for schedule(static)
  for (long long j = 0; j < n; ++j) {
    std::mt19937_64 engine(splitmix64(seed_ ^ splitmix64(static_cast<std::uint64_t>(j))));
    std::normal_distribution<double> normal(0.0, 1.0);
    double* out = draws_.data() + static_cast<std::size_t>(j) * stride;
    for (std::size_t q = 0; q < stride; ++q) out[q] = normal(engine);
  }
}

void validate_grid(std::span<const double> grid, double t0) {
  if (grid.empty()) throw validation_error("grid is empty");
  if (std::abs(grid.front() - t0) > 1e-12) throw validation_error("grid must start at t0");
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (!(grid[k] > grid[k - 1])) throw validation_error("grid must be strictly increasing");
}

std::shared_ptr<const ou_paths> simulate_ou(const hw_params& params, std::span<const double> grid,
                                            const gaussian_noise& noise, bool track_brownian) {
  validate_params(params);
  validate_grid(grid, grid.empty() ? 0.0 : grid.front());
  const std::size_t steps = grid.size() - 1;
  if (noise.steps() != steps)
    throw validation_error("simulate: noise has " + std::to_string(noise.steps()) + " steps, grid needs " +
                           std::to_string(steps));
  if (noise.per_step() < 2) throw validation_error("simulate: need two normals per path-step");
  if (track_brownian && noise.per_step() < 3)
    throw validation_error("simulate: Brownian tracking needs three normals per path-step");

  std::vector<ou_step> transitions;
  transitions.reserve(steps);
  for (std::size_t k = 0; k < steps; ++k) transitions.push_back(make_ou_step(params, grid[k + 1] - grid[k]));

  auto out = std::make_shared<ou_paths>();
  out->grid.assign(grid.begin(), grid.end());
  out->paths = noise.paths();
  out->seed = noise.seed();
  const std::size_t dates = grid.size();
  out->u.assign(out->paths * dates, 0.0);
  out->int_u.assign(out->paths * dates, 0.0);
  if (track_brownian) out->w.assign(out->paths * dates, 0.0);

  const auto n = static_cast<long long>(out->paths);
  const std::size_t per_step = noise.per_step();
#pragma omp parallel for schedule(static)
  for (long long jj = 0; jj < n; ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    const auto z = noise.path(j);
    double* u = out->u.data() + j * dates;
    double* iu = out->int_u.data() + j * dates;
    double* w = track_brownian ? out->w.data() + j * dates : nullptr;
    for (std::size_t k = 0; k < steps; ++k) {
      const auto& s = transitions[k];
      const double z1 = z[k * per_step];
      const double z2 = z[k * per_step + 1];
      u[k + 1] = u[k] * s.decay + s.sd_u * z1;
      iu[k + 1] = iu[k] + u[k] * s.integral_gain + s.int_load * z1 + s.sd_int_resid * z2;
      if (w) {
        const double h = grid[k + 1] - grid[k];
        const double c1 = s.sd_u > 0.0 ? s.cov_u_w / s.sd_u : 0.0;
        const double c2 = s.sd_int_resid > 0.0 ? (s.cov_int_w - c1 * s.int_load) / s.sd_int_resid : 0.0;
        const double c3 = std::sqrt(std::max(h - c1 * c1 - c2 * c2, 0.0));
        w[k + 1] = w[k] + c1 * z1 + c2 * z2 + c3 * z[k * per_step + 2];
      }
    }
  }
  return out;
}

path_set::path_set(std::shared_ptr<const ou_paths> shared, std::vector<double> psi_at_grid,
                   std::vector<double> int_psi_at_grid, int market)
    : shared_(std::move(shared)), psi_(std::move(psi_at_grid)), int_psi_(std::move(int_psi_at_grid)), market_(market) {
  if (!shared_) throw validation_error("path_set: no simulated paths");
  if (psi_.size() != dates() || int_psi_.size() != dates())
    throw validation_error("path_set: deterministic columns do not match the grid");
}

double path_set::discount_factor(std::size_t j, std::size_t k) const {
  if (j >= paths() || k >= dates()) throw validation_error("discount_factor: index out of range");
  if (k == 0) return 1.0;
  return std::exp(-integral(j, k));
}

void path_set::rates_at(std::size_t k, std::span<double> out) const {
  const std::size_t d = dates();
  for (std::size_t j = 0; j < paths(); ++j) out[j] = shared_->u[j * d + k] + psi_[k];
}

void path_set::discount_factors_at(std::size_t k, std::span<double> out) const {
  const std::size_t d = dates();
  if (k == 0) {
    std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(paths()), 1.0);
    return;
  }
  for (std::size_t j = 0; j < paths(); ++j) out[j] = std::exp(-(shared_->int_u[j * d + k] + int_psi_[k]));
}

path_set attach_market(const hull_white_model& model, std::shared_ptr<const ou_paths> shared) {
  if (!shared) throw validation_error("attach_market: no simulated paths");
  validate_grid(shared->grid, model.t0());
  std::vector<double> psi(shared->grid.size());
  std::vector<double> int_psi(shared->grid.size());
  const double base = model.integrated_psi(shared->grid.front());
  for (std::size_t k = 0; k < shared->grid.size(); ++k) {
    psi[k] = model.psi(shared->grid[k]);
    int_psi[k] = model.integrated_psi(shared->grid[k]) - base;
  }
  int_psi[0] = 0.0;
  return path_set(std::move(shared), std::move(psi), std::move(int_psi), model.market());
}

path_set simulate(const hull_white_model& model, std::span<const double> grid, std::size_t paths,
                  const gaussian_noise& noise) {
  if (paths == 0) throw validation_error("simulate: M must be at least 1");
  if (noise.paths() != paths) throw validation_error("simulate: noise path count does not match M");
  validate_grid(grid, model.t0());
  return attach_market(model, simulate_ou(model.params(), grid, noise));
}

std::vector<path_set> simulate_markets(std::span<const hull_white_model> models, std::span<const double> grid,
                                       const gaussian_noise& noise) {
  if (models.empty()) throw validation_error("simulate_markets: no models");
  for (const auto& m : models) {
    if (m.params().mean_reversion != models.front().params().mean_reversion ||
        m.params().volatility != models.front().params().volatility)
      throw validation_error("simulate_markets: shared noise requires identical lambda and eta");
  }
  validate_grid(grid, models.front().t0());
  auto shared = simulate_ou(models.front().params(), grid, noise);
  std::vector<path_set> out;
  out.reserve(models.size());
  for (const auto& m : models) out.push_back(attach_market(m, shared));
  return out;
}

double discount_factor(const path_set& paths, std::size_t j, std::size_t k) { return paths.discount_factor(j, k); }

}  // namespace xvac
