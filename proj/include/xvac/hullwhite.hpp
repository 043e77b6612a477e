#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "xvac/curve.hpp"

namespace xvac {

struct hw_params {
  double mean_reversion = 0.01;  // lambda, 1/years
  double volatility = 0.02;      // eta, absolute
};

struct normal_law {
  double mean = 0.0;
  double variance = 0.0;
  double stddev() const;
};

/// Coefficients of the affine bond price P(t,T) = exp(log_a - b * r).
struct bond_coefficients {
  double log_a = 0.0;
  double b = 0.0;
};

/// Exact one-step law of the OU factor u and its time integral over a step of length h.
/// u(t+h) = u e^{-lambda h} + sd_u Z1,  int u = u (1-e^{-lambda h})/lambda + cov/sd_u Z1 + sd_int_resid Z2.
struct ou_step {
  double decay = 1.0;       // e^{-lambda h}
  double integral_gain = 0.0;  // (1 - e^{-lambda h}) / lambda
  double var_u = 0.0;
  double var_int = 0.0;
  double cov = 0.0;
  double sd_u = 0.0;
  double int_load = 0.0;    // cov / sd_u
  double sd_int_resid = 0.0;
  // Brownian increment W(t+h)-W(t) joint with (u, int u)
  double cov_u_w = 0.0;
  double cov_int_w = 0.0;
};

ou_step make_ou_step(const hw_params& params, double h);

/// Hull-White one-factor model r(t) = u(t) + psi(t) fitted to a yield curve.
class hull_white_model {
 public:
  hull_white_model(hw_params params, std::shared_ptr<const yield_curve> curve, int market = 0);

  const hw_params& params() const { return params_; }
  const yield_curve& curve() const { return *curve_; }
  std::shared_ptr<const yield_curve> curve_ptr() const { return curve_; }
  int market() const { return market_; }
  double t0() const { return curve_->t0(); }
  double initial_rate() const;

  double psi(double t) const;
  /// Integral of psi over [t0, t], analytic.
  double integrated_psi(double t) const;
  normal_law marginal_law(double t) const;
  double zcb_price(double t, double maturity, double r) const;
  /// Also valid for maturity < t (used for accrued floating legs).
  bond_coefficients bond(double t, double maturity) const;

 private:
  hw_params params_;
  std::shared_ptr<const yield_curve> curve_;
  int market_;
};

/// Standard normal draws, M paths x R steps x 2 per step, reproducible from the seed.
/// Each path has its own substream so any subset can be regenerated independently.
class gaussian_noise {
 public:
  gaussian_noise(std::uint64_t seed, std::size_t paths, std::size_t steps, std::size_t per_step = 2);

  std::uint64_t seed() const { return seed_; }
  std::size_t paths() const { return paths_; }
  std::size_t steps() const { return steps_; }
  std::size_t per_step() const { return per_step_; }
  std::span<const double> path(std::size_t j) const {
    return {draws_.data() + j * steps_ * per_step_, steps_ * per_step_};
  }

 private:
  std::uint64_t seed_;
  std::size_t paths_;
  std::size_t steps_;
  std::size_t per_step_;
  std::vector<double> draws_;
};

/// Market-independent stochastic part: u(s_k) and int_{t0}^{s_k} u, path-major.
struct ou_paths {
  std::vector<double> grid;
  std::size_t paths = 0;
  std::vector<double> u;
  std::vector<double> int_u;
  std::vector<double> w;  // Brownian level W(s_k); filled only when requested
  std::uint64_t seed = 0;
};

/// Simulated short-rate paths of one market over the monitoring grid.
///
/// r(s_k; w_j) = u(s_k; w_j) + psi(s_k); the u part is shared by reference
/// between markets simulated from the same noise.
class path_set {
 public:
  path_set(std::shared_ptr<const ou_paths> shared, std::vector<double> psi_at_grid,
           std::vector<double> int_psi_at_grid, int market);

  std::size_t paths() const { return shared_->paths; }
  std::size_t dates() const { return shared_->grid.size(); }
  std::span<const double> grid() const { return shared_->grid; }
  std::uint64_t seed() const { return shared_->seed; }
  int market() const { return market_; }
  const ou_paths& shared() const { return *shared_; }
  bool shares_noise_with(const path_set& other) const { return shared_ == other.shared_; }

  double r(std::size_t j, std::size_t k) const { return shared_->u[j * dates() + k] + psi_[k]; }
  double integral(std::size_t j, std::size_t k) const {
    return shared_->int_u[j * dates() + k] + int_psi_[k];
  }
  double discount_factor(std::size_t j, std::size_t k) const;

  /// Column k over all paths.
  void rates_at(std::size_t k, std::span<double> out) const;
  void discount_factors_at(std::size_t k, std::span<double> out) const;

 private:
  std::shared_ptr<const ou_paths> shared_;
  std::vector<double> psi_;
  std::vector<double> int_psi_;
  int market_;
};

void validate_grid(std::span<const double> grid, double t0);

/// Exact joint OU transition driven by `noise` (two normals per path-step).
std::shared_ptr<const ou_paths> simulate_ou(const hw_params& params, std::span<const double> grid,
                                            const gaussian_noise& noise, bool track_brownian = false);

path_set simulate(const hull_white_model& model, std::span<const double> grid, std::size_t paths,
                  const gaussian_noise& noise);

/// All markets from one noise realisation; every result shares the same u paths.
std::vector<path_set> simulate_markets(std::span<const hull_white_model> models,
                                       std::span<const double> grid, const gaussian_noise& noise);

/// Attach another market's deterministic part to already simulated u paths.
path_set attach_market(const hull_white_model& model, std::shared_ptr<const ou_paths> shared);

double discount_factor(const path_set& paths, std::size_t j, std::size_t k);

}  // namespace xvac
