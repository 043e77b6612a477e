#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "xvac/exposure.hpp"
#include "xvac/kernels.hpp"

namespace xvac {

/// Counterparty intensity dy = kappa (y_bar - y) dt + eta sqrt(y+) dB, d<B, W> = rho dt,
/// W the short rate's Brownian driver. Euler with full truncation on the monitoring grid.
struct hazard_model {
  double kappa = 0.5;
  double level = 0.02;
  double volatility = 0.0;
  double initial = 0.02;
  double rho = 0.0;
  double lgd = 0.6;
};

void validate(const hazard_model& h);

/// Rate paths (u, int u, W) plus intensity paths on the same grid and noise.
struct joint_paths {
  std::shared_ptr<const ou_paths> rates;
  std::vector<double> y;      // path-major, y(s_k)
  std::vector<double> int_y;  // trapezoid of y+ from t0 to s_k

  std::size_t paths() const { return rates->paths; }
  std::size_t dates() const { return rates->grid.size(); }
  double survival(std::size_t j, std::size_t k) const { return std::exp(-int_y[j * dates() + k]); }
};

/// Four normals per path-step: two for (u, int u), one completing W, one for the
/// intensity's independent part.
joint_paths simulate_joint(const hw_params& params, const hazard_model& hazard, std::span<const double> grid,
                           std::size_t paths, std::uint64_t seed);

/// Survival curve of the hazard model with its volatility switched off, using the
/// same time stepping as `simulate_joint`.
std::vector<double> deterministic_survival(const hazard_model& hazard, std::span<const double> grid);

/// LGD * sum_k EE(t_k) (S(t_{k-1}) - S(t_k)).
double cva_independent(const exposure_profile& ee, std::span<const double> survival, double lgd);

/// LGD * int E[DF(s) exp(-int y) y(s) V+(s)] ds by trapezoid over the grid, per path,
/// then averaged. `market.paths` must be built on `joint.rates`. With a surrogate
/// table, g+ replaces V+.
sample_mean cva_wwr(const joint_paths& joint, const market_state& market, const exercise_map& exercise, double lgd,
                    const surrogate_table* surrogates = nullptr);

}  // namespace xvac
