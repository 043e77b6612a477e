#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xvac/hullwhite.hpp"
#include "xvac/interp.hpp"

namespace xvac {

/// Fixed-for-floating swap; sign +1 pays fixed (payer), -1 receives fixed.
struct swap {
  int sign = 1;
  double notional = 1.0;
  double fixed_rate = 0.0;
  double start = 0.0;
  double maturity = 1.0;
  double payments_per_year = 1.0;

  std::vector<double> schedule() const;
  /// Latest reset date not after t (the start before the first period).
  double reset_date(double t) const;
};

void validate(const swap& s);

/// Physically settled Bermudan swaption on `underlying`.
struct bermudan_swaption {
  std::vector<double> exercise_dates;
  swap underlying;
  bool physical_settlement = true;
};

enum class exercise_side { above, below };

/// Per exercise date threshold r*(S_k). Payer underlyings exercise when r > r*,
/// receiver underlyings when r < r*. Never-exercise is an infinite threshold.
struct exercise_boundary {
  std::vector<double> dates;
  std::vector<double> thresholds;
  exercise_side side = exercise_side::above;
  double estimated_value = 0.0;  // LSMC value at t0 on the training paths
  double std_error = 0.0;
  std::vector<std::string> warnings;

  bool triggers(std::size_t k, double r) const {
    return side == exercise_side::above ? r > thresholds[k] : r < thresholds[k];
  }
  static double never(exercise_side side) {
    return side == exercise_side::above ? std::numeric_limits<double>::infinity()
                                        : -std::numeric_limits<double>::infinity();
  }
};

struct portfolio {
  std::vector<swap> swaps;
  std::optional<bermudan_swaption> bermudan;

  double total_notional() const;
  double horizon() const;
};

/// Sum of c_k P(t, T_k) for one date and market, as a function of r(t).
class affine_bond_sum {
 public:
  affine_bond_sum() = default;
  void add(const hull_white_model& model, double t, double maturity, double coefficient);
  void add(const affine_bond_sum& other);
  double operator()(double r) const;
  std::size_t terms() const { return coef_.size(); }

 private:
  std::vector<double> maturity_;
  std::vector<double> coef_;
  std::vector<double> log_a_;
  std::vector<double> b_;
};

affine_bond_sum swap_terms(const hull_white_model& model, const swap& s, double t);

double swap_value(const hull_white_model& model, const swap& s, double t, double r);

struct mc_estimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Deterministic value of following `boundary` from an unexercised state:
/// exact Gaussian transitions between exercise dates integrated by Gauss-Legendre
/// quadrature, exercise and continuation values tabulated per exercise date.
class bermudan_policy_valuer {
 public:
  bermudan_policy_valuer(const hull_white_model& model, const bermudan_swaption& option,
                         const exercise_boundary& boundary);

  double value(double t, double r) const;
  double exercise_value(std::size_t k, double r) const;

 private:
  struct table {
    double lo = 0.0;
    double step = 0.0;
    std::vector<double> values;
    double operator()(double x) const;
  };
  double step_expectation(double t, double r, std::size_t next) const;
  double payoff(std::size_t k, double y) const;

  hull_white_model model_;
  bermudan_swaption option_;
  exercise_boundary boundary_;
  std::vector<affine_bond_sum> exercise_sums_;
  std::vector<table> exercise_tables_;
  std::vector<table> continuation_tables_;
  std::vector<double> quad_nodes_;
  std::vector<double> quad_weights_;
};

/// Nested Monte Carlo value from (t, r) under `boundary`; the inner noise is
/// seeded by `seed` so repeated calls share it.
mc_estimate bermudan_value_exact(const hull_white_model& model, const bermudan_swaption& option, double t,
                                 double r, const exercise_boundary& boundary, std::size_t inner_paths,
                                 std::uint64_t seed);

/// Same as above but forcing exercise at the first remaining date.
mc_estimate bermudan_value_forced(const hull_white_model& model, const bermudan_swaption& option, double t,
                                  double r, std::size_t inner_paths, std::uint64_t seed);

struct lsmc_options {
  std::size_t basis_degree = 2;
  std::size_t min_itm_per_basis = 10;
};

/// Backward induction on the training paths; continuation regressed on {1, r, ..., r^deg}
/// over in-the-money paths, threshold by bisection of exercise minus continuation.
exercise_boundary lsmc_boundary(const hull_white_model& model, const bermudan_swaption& option,
                                const path_set& training, const lsmc_options& options = {});

/// European value of exercising only at S_k, per k, on the given paths.
std::vector<mc_estimate> european_values(const hull_white_model& model, const bermudan_swaption& option,
                                         const path_set& paths);

/// Grid index where each path exercises, or npos.
std::vector<std::size_t> exercise_indices(const path_set& paths, const exercise_boundary& boundary);

enum class exercise_state { none, unexercised, exercised };

/// Swaps plus the Bermudan branch selected by `state`. The unexercised branch
/// needs a policy valuer.
double portfolio_value(const hull_white_model& model, const portfolio& p, double t, double r,
                       exercise_state state, const bermudan_policy_valuer* optionality = nullptr);

/// Exact valuators of one market, per date and branch; precomputes bond terms.
class portfolio_pricer {
 public:
  portfolio_pricer(const hull_white_model& model, const portfolio& p,
                   std::shared_ptr<const bermudan_policy_valuer> optionality = nullptr);

  bool has_optionality() const { return portfolio_.bermudan.has_value(); }
  const hull_white_model& model() const { return model_; }
  valuator at(double t, bool exercised) const;

 private:
  hull_white_model model_;
  portfolio portfolio_;
  std::shared_ptr<const bermudan_policy_valuer> optionality_;
};

}  // namespace xvac
