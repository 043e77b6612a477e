#include "xvac/products.hpp"

#include <algorithm>
#include <cmath>

#include "xvac/errors.hpp"

namespace xvac {

std::vector<double> swap::schedule() const { return payment_schedule(start, maturity, payments_per_year); }

double swap::reset_date(double t) const {
  if (t < start) return start;
  double reset = start;
  for (double d : schedule()) {
    if (d <= t) reset = d;
    else break;
  }
  return reset;
}

void validate(const swap& s) {
  if (s.sign != 1 && s.sign != -1) throw validation_error("swap: sign must be +1 or -1");
  if (!(s.start < s.maturity)) throw validation_error("swap: start must precede maturity");
  if (!(s.payments_per_year > 0.0)) throw validation_error("swap: payments per year must be positive");
  if (!(s.notional >= 0.0)) throw validation_error("swap: notional must be non-negative");
}

double portfolio::total_notional() const {
  double total = 0.0;
  for (const auto& s : swaps) total += s.notional;
  if (bermudan) total += bermudan->underlying.notional;
  return total;
}

double portfolio::horizon() const {
  double h = 0.0;
  for (const auto& s : swaps) h = std::max(h, s.maturity);
  if (bermudan) h = std::max(h, bermudan->underlying.maturity);
  return h;
}

void affine_bond_sum::add(const hull_white_model& model, double t, double maturity, double coefficient) {
  for (std::size_t k = 0; k < maturity_.size(); ++k) {
    if (maturity_[k] == maturity) {
      coef_[k] += coefficient;
      return;
    }
  }
  const auto c = model.bond(t, maturity);
  maturity_.push_back(maturity);
  coef_.push_back(coefficient);
  log_a_.push_back(c.log_a);
  b_.push_back(c.b);
}

void affine_bond_sum::add(const affine_bond_sum& other) {
  for (std::size_t k = 0; k < other.coef_.size(); ++k) {
    bool merged = false;
    for (std::size_t q = 0; q < maturity_.size(); ++q) {
      if (maturity_[q] == other.maturity_[k] && b_[q] == other.b_[k]) {
        coef_[q] += other.coef_[k];
        merged = true;
        break;
      }
    }
    if (!merged) {
      maturity_.push_back(other.maturity_[k]);
      coef_.push_back(other.coef_[k]);
      log_a_.push_back(other.log_a_[k]);
      b_.push_back(other.b_[k]);
    }
  }
}

double affine_bond_sum::operator()(double r) const {
  double acc = 0.0;
  for (std::size_t k = 0; k < coef_.size(); ++k) acc += coef_[k] * std::exp(log_a_[k] - b_[k] * r);
  return acc;
}

affine_bond_sum swap_terms(const hull_white_model& model, const swap& s, double t) {
  affine_bond_sum sum;
  if (t >= s.maturity) return sum;
  const double scale = s.sign * s.notional;
  sum.add(model, t, s.reset_date(t), scale);
  sum.add(model, t, s.maturity, -scale);
  double previous = s.start;
  for (double d : s.schedule()) {
    if (d > t) sum.add(model, t, d, -scale * s.fixed_rate * (d - previous));
    previous = d;
  }
  return sum;
}

double swap_value(const hull_white_model& model, const swap& s, double t, double r) {
  if (t >= s.maturity) return 0.0;
  return swap_terms(model, s, t)(r);
}

namespace {

constexpr std::size_t kTablePoints = 2001;
constexpr double kTableWidth = 12.0;     // marginal standard deviations each side
constexpr double kQuadratureWidth = 10.0;
constexpr std::size_t kQuadraturePoints = 64;
constexpr double kDateTolerance = 1e-9;

exercise_side side_of(const bermudan_swaption& option) {
  return option.underlying.sign > 0 ? exercise_side::above : exercise_side::below;
}

void validate(const bermudan_swaption& option) {
  validate(option.underlying);
  if (option.exercise_dates.empty()) throw validation_error("bermudan: no exercise dates");
  if (!option.physical_settlement) throw validation_error("bermudan: only physical settlement is supported");
  const auto sched = option.underlying.schedule();
  double previous = -std::numeric_limits<double>::infinity();
  for (double s : option.exercise_dates) {
    if (!(s > previous)) throw validation_error("bermudan: exercise dates must increase");
    if (!(s < option.underlying.maturity)) throw validation_error("bermudan: exercise after underlying maturity");
    if (s > option.underlying.start + kDateTolerance) {
      const bool aligned = std::any_of(sched.begin(), sched.end(),
                                       [&](double d) { return std::abs(d - s) < kDateTolerance; });
      if (!aligned) throw validation_error("bermudan: exercise date not on the underlying schedule");
    }
    previous = s;
  }
}

std::vector<affine_bond_sum> exercise_sums(const hull_white_model& model, const bermudan_swaption& option) {
  std::vector<affine_bond_sum> sums;
  for (double s : option.exercise_dates) sums.push_back(swap_terms(model, option.underlying, s));
  return sums;
}

std::size_t first_date_after(std::span<const double> dates, double t) {
  std::size_t k = 0;
  while (k < dates.size() && dates[k] <= t + 1e-12) ++k;
  return k;
}

// Least squares on a monomial basis in the scaled variable (y - shift) / scale.
struct poly_regression {
  double shift = 0.0;
  double scale = 1.0;
  std::vector<double> coef;
  double operator()(double y) const {
    const double z = (y - shift) / scale;
    double acc = 0.0;
    for (std::size_t k = coef.size(); k-- > 0;) acc = acc * z + coef[k];
    return acc;
  }
};

poly_regression regress(std::span<const double> x, std::span<const double> y, std::size_t degree) {
  poly_regression fit;
  const auto n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  fit.shift = mean;
  fit.scale = var > 0.0 ? std::sqrt(var / n) : 1.0;
  const std::size_t p = degree + 1;
  std::vector<double> a(p * p, 0.0), rhs(p, 0.0), basis(p);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double z = (x[i] - fit.shift) / fit.scale;
    basis[0] = 1.0;
    for (std::size_t k = 1; k < p; ++k) basis[k] = basis[k - 1] * z;
    for (std::size_t r = 0; r < p; ++r) {
      rhs[r] += basis[r] * y[i];
      for (std::size_t c = 0; c < p; ++c) a[r * p + c] += basis[r] * basis[c];
    }
  }
  // Gaussian elimination, partial pivoting.
  for (std::size_t col = 0; col < p; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < p; ++r)
      if (std::abs(a[r * p + col]) > std::abs(a[piv * p + col])) piv = r;
    if (a[piv * p + col] == 0.0) throw arithmetic_error("lsmc: singular regression matrix");
    if (piv != col) {
      for (std::size_t c = 0; c < p; ++c) std::swap(a[col * p + c], a[piv * p + c]);
      std::swap(rhs[col], rhs[piv]);
    }
    for (std::size_t r = col + 1; r < p; ++r) {
      const double f = a[r * p + col] / a[col * p + col];
      for (std::size_t c = col; c < p; ++c) a[r * p + c] -= f * a[col * p + c];
      rhs[r] -= f * rhs[col];
    }
  }
  fit.coef.assign(p, 0.0);
  for (std::size_t r = p; r-- > 0;) {
    double acc = rhs[r];
    for (std::size_t c = r + 1; c < p; ++c) acc -= a[r * p + c] * fit.coef[c];
    fit.coef[r] = acc / a[r * p + r];
  }
  return fit;
}

template <class F>
double bisect(F&& f, double lo, double hi) {
  double flo = f(lo);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Threshold of {D > 0} on [lo, hi] for the given side, infinite when D keeps its sign.
template <class F>
double threshold_of(F&& excess, double lo, double hi, exercise_side side) {
  const double dlo = excess(lo);
  const double dhi = excess(hi);
  if (side == exercise_side::above) {
    if (dhi <= 0.0) return exercise_boundary::never(side);
    if (dlo > 0.0) return -std::numeric_limits<double>::infinity();
  } else {
    if (dlo <= 0.0) return exercise_boundary::never(side);
    if (dhi > 0.0) return std::numeric_limits<double>::infinity();
  }
  return bisect(excess, lo, hi);
}

std::size_t grid_index(std::span<const double> grid, double t) {
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (std::abs(grid[k] - t) < kDateTolerance) return k;
  throw validation_error("exercise date " + std::to_string(t) + " is not on the simulation grid");
}

mc_estimate summarize(std::span<const double> samples) {
  const auto n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  return {mean, samples.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0};
}

template <class Exercise>
mc_estimate nested_value(const hull_white_model& model, const bermudan_swaption& option, double t, double r,
                         std::size_t inner_paths, std::uint64_t seed, Exercise&& exercise) {
  validate(option);
  if (inner_paths == 0) throw validation_error("bermudan: need at least one inner path");
  const auto& dates = option.exercise_dates;
  const std::size_t first = first_date_after(dates, t);
  if (first == dates.size()) return {0.0, 0.0};
  const std::size_t steps = dates.size() - first;
  const gaussian_noise noise(seed, inner_paths, steps, 2);
  std::vector<ou_step> transitions;
  double previous = t;
  for (std::size_t k = first; k < dates.size(); ++k) {
    transitions.push_back(make_ou_step(model.params(), dates[k] - previous));
    previous = dates[k];
  }
  const auto sums = exercise_sums(model, option);
  const double u0 = r - model.psi(t);
  const double int_psi_t = model.integrated_psi(t);
  std::vector<double> psi_at(dates.size()), int_psi_at(dates.size());
  for (std::size_t k = 0; k < dates.size(); ++k) {
    psi_at[k] = model.psi(dates[k]);
    int_psi_at[k] = model.integrated_psi(dates[k]) - int_psi_t;
  }
  std::vector<double> payoff(inner_paths, 0.0);
  const auto n = static_cast<long long>(inner_paths);
#pragma omp parallel for schedule(static)
  for (long long jj = 0; jj < n; ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    const auto z = noise.path(j);
    double u = u0;
    double int_u = 0.0;
    for (std::size_t s = 0; s < steps; ++s) {
      const auto& st = transitions[s];
      const double z1 = z[2 * s];
      const double z2 = z[2 * s + 1];
      int_u += u * st.integral_gain + st.int_load * z1 + st.sd_int_resid * z2;
      u = u * st.decay + st.sd_u * z1;
      const std::size_t k = first + s;
      const double rk = u + psi_at[k];
      if (exercise(k, rk, s == 0)) {
        payoff[j] = std::exp(-(int_u + int_psi_at[k])) * sums[k](rk);
        break;
      }
    }
  }
  return summarize(payoff);
}

}  // namespace

double bermudan_policy_valuer::table::operator()(double x) const {
  const std::size_t n = values.size();
  const double pos = (x - lo) / step;
  if (pos <= 0.0) return values[0] + pos * (values[1] - values[0]);
  if (pos >= static_cast<double>(n - 1)) {
    const double over = pos - static_cast<double>(n - 1);
    return values[n - 1] + over * (values[n - 1] - values[n - 2]);
  }
  auto i = static_cast<std::size_t>(pos);
  i = std::clamp<std::size_t>(i, 1, n - 3);
  const double s = pos - static_cast<double>(i);
  // cubic through i-1, i, i+1, i+2 at offsets -1, 0, 1, 2
  const double f0 = values[i - 1], f1 = values[i], f2 = values[i + 1], f3 = values[i + 2];
  return -f0 * s * (s - 1.0) * (s - 2.0) / 6.0 + f1 * (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0 -
         f2 * (s + 1.0) * s * (s - 2.0) / 2.0 + f3 * (s + 1.0) * s * (s - 1.0) / 6.0;
}

bermudan_policy_valuer::bermudan_policy_valuer(const hull_white_model& model, const bermudan_swaption& option,
                                               const exercise_boundary& boundary)
    : model_(model), option_(option), boundary_(boundary) {
  validate(option_);
  if (boundary_.thresholds.size() != option_.exercise_dates.size())
    throw validation_error("bermudan_policy_valuer: boundary does not match the exercise dates");
  exercise_sums_ = exercise_sums(model_, option_);

  std::vector<double> alpha(kQuadraturePoints, 0.0), beta(kQuadraturePoints);
  beta[0] = 2.0;
  for (std::size_t k = 1; k < kQuadraturePoints; ++k) {
    const double kk = static_cast<double>(k);
    beta[k] = kk * kk / (4.0 * kk * kk - 1.0);
  }
  const auto legendre = gauss_from_recurrence(alpha, beta);
  quad_nodes_ = legendre.nodes;
  quad_weights_ = legendre.weights;

  const std::size_t count = option_.exercise_dates.size();
  exercise_tables_.resize(count);
  continuation_tables_.resize(count);
  for (std::size_t k = count; k-- > 0;) {
    const double s = option_.exercise_dates[k];
    const auto law = model_.marginal_law(s);
    const double sd = std::max(law.stddev(), 1e-4);
    table ex;
    ex.lo = law.mean - kTableWidth * sd;
    ex.step = 2.0 * kTableWidth * sd / static_cast<double>(kTablePoints - 1);
    ex.values.resize(kTablePoints);
    for (std::size_t q = 0; q < kTablePoints; ++q) ex.values[q] = exercise_sums_[k](ex.lo + ex.step * static_cast<double>(q));
    exercise_tables_[k] = ex;
    if (k + 1 < count) {
      table cont = ex;
      for (std::size_t q = 0; q < kTablePoints; ++q)
        cont.values[q] = step_expectation(s, cont.lo + cont.step * static_cast<double>(q), k + 1);
      continuation_tables_[k] = std::move(cont);
    }
  }
}

double bermudan_policy_valuer::exercise_value(std::size_t k, double r) const { return exercise_sums_[k](r); }

double bermudan_policy_valuer::payoff(std::size_t k, double y) const {
  if (boundary_.triggers(k, y)) return exercise_tables_[k](y);
  if (k + 1 == option_.exercise_dates.size()) return 0.0;
  return continuation_tables_[k](y);
}

double bermudan_policy_valuer::step_expectation(double t, double r, std::size_t next) const {
  const double s = option_.exercise_dates[next];
  const auto st = make_ou_step(model_.params(), s - t);
  const double u = r - model_.psi(t);
  // Discounting tilts the Gaussian law of u(S) by -cov (forward measure to S).
  const double log_bond = -(model_.integrated_psi(s) - model_.integrated_psi(t)) - u * st.integral_gain + 0.5 * st.var_int;
  const double mean = model_.psi(s) + u * st.decay - st.cov;
  const double sd = st.sd_u;
  if (sd == 0.0) return std::exp(log_bond) * payoff(next, mean);

  const double lo = mean - kQuadratureWidth * sd;
  const double hi = mean + kQuadratureWidth * sd;
  const double cut = boundary_.thresholds[next];
  std::vector<std::pair<double, double>> pieces;
  if (std::isfinite(cut) && cut > lo && cut < hi) {
    pieces = {{lo, cut}, {cut, hi}};
  } else {
    pieces = {{lo, hi}};
  }
  const double norm = 1.0 / (sd * std::sqrt(2.0 * M_PI));
  double acc = 0.0;
  for (const auto& [a, b] : pieces) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (std::size_t q = 0; q < quad_nodes_.size(); ++q) {
      const double y = mid + half * quad_nodes_[q];
      const double z = (y - mean) / sd;
      acc += half * quad_weights_[q] * norm * std::exp(-0.5 * z * z) * payoff(next, y);
    }
  }
  return std::exp(log_bond) * acc;
}

double bermudan_policy_valuer::value(double t, double r) const {
  const std::size_t next = first_date_after(option_.exercise_dates, t);
  if (next == option_.exercise_dates.size()) return 0.0;
  return step_expectation(t, r, next);
}

mc_estimate bermudan_value_exact(const hull_white_model& model, const bermudan_swaption& option, double t,
                                 double r, const exercise_boundary& boundary, std::size_t inner_paths,
                                 std::uint64_t seed) {
  if (boundary.thresholds.size() != option.exercise_dates.size())
    throw validation_error("bermudan_value_exact: boundary does not match the exercise dates");
  return nested_value(model, option, t, r, inner_paths, seed,
                      [&](std::size_t k, double rk, bool) { return boundary.triggers(k, rk); });
}

mc_estimate bermudan_value_forced(const hull_white_model& model, const bermudan_swaption& option, double t,
                                  double r, std::size_t inner_paths, std::uint64_t seed) {
  return nested_value(model, option, t, r, inner_paths, seed, [](std::size_t, double, bool first) { return first; });
}

exercise_boundary lsmc_boundary(const hull_white_model& model, const bermudan_swaption& option,
                                const path_set& training, const lsmc_options& options) {
  validate(option);
  const auto grid = training.grid();
  const auto& dates = option.exercise_dates;
  std::vector<std::size_t> index(dates.size());
  for (std::size_t k = 0; k < dates.size(); ++k) index[k] = grid_index(grid, dates[k]);
  const auto sums = exercise_sums(model, option);

  exercise_boundary boundary;
  boundary.dates = dates;
  boundary.side = side_of(option);
  boundary.thresholds.assign(dates.size(), exercise_boundary::never(boundary.side));

  const std::size_t m = training.paths();
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<double> cash(m, 0.0);
  std::vector<std::size_t> tau(m, kNone);
  std::vector<double> rates(m), exercise(m);
  const std::size_t basis = options.basis_degree + 1;

  for (std::size_t k = dates.size(); k-- > 0;) {
    const std::size_t col = index[k];
    training.rates_at(col, rates);
    double lo = rates[0], hi = rates[0];
    for (std::size_t j = 0; j < m; ++j) {
      exercise[j] = sums[k](rates[j]);
      lo = std::min(lo, rates[j]);
      hi = std::max(hi, rates[j]);
    }

    if (k + 1 == dates.size()) {
      boundary.thresholds[k] = threshold_of([&](double y) { return sums[k](y); }, lo, hi, boundary.side);
    } else {
      std::vector<double> x, y;
      for (std::size_t j = 0; j < m; ++j) {
        if (exercise[j] <= 0.0) continue;
        x.push_back(rates[j]);
        y.push_back(tau[j] == kNone ? 0.0
                                    : cash[j] * std::exp(-(training.integral(j, tau[j]) - training.integral(j, col))));
      }
      if (x.size() < options.min_itm_per_basis * basis) {
        boundary.thresholds[k] = exercise_boundary::never(boundary.side);
        boundary.warnings.push_back("exercise date " + std::to_string(dates[k]) + ": only " +
                                    std::to_string(x.size()) + " in-the-money paths, never exercising");
        continue;
      }
      const auto continuation = regress(x, y, options.basis_degree);
      boundary.thresholds[k] = threshold_of([&](double v) { return sums[k](v) - continuation(v); }, lo, hi,
                                            boundary.side);
    }
    for (std::size_t j = 0; j < m; ++j) {
      if (boundary.triggers(k, rates[j]) && exercise[j] > 0.0) {
        cash[j] = exercise[j];
        tau[j] = col;
      }
    }
  }

  std::vector<double> discounted(m, 0.0);
  for (std::size_t j = 0; j < m; ++j)
    if (tau[j] != kNone) discounted[j] = cash[j] * std::exp(-training.integral(j, tau[j]));
  const auto est = summarize(discounted);
  boundary.estimated_value = est.value;
  boundary.std_error = est.std_error;
  return boundary;
}

std::vector<mc_estimate> european_values(const hull_white_model& model, const bermudan_swaption& option,
                                         const path_set& paths) {
  validate(option);
  const auto sums = exercise_sums(model, option);
  std::vector<mc_estimate> out;
  std::vector<double> sample(paths.paths());
  for (std::size_t k = 0; k < option.exercise_dates.size(); ++k) {
    const std::size_t col = grid_index(paths.grid(), option.exercise_dates[k]);
    for (std::size_t j = 0; j < paths.paths(); ++j)
      sample[j] = paths.discount_factor(j, col) * std::max(sums[k](paths.r(j, col)), 0.0);
    out.push_back(summarize(sample));
  }
  return out;
}

std::vector<std::size_t> exercise_indices(const path_set& paths, const exercise_boundary& boundary) {
  std::vector<std::size_t> cols(boundary.dates.size());
  for (std::size_t k = 0; k < boundary.dates.size(); ++k) cols[k] = grid_index(paths.grid(), boundary.dates[k]);
  std::vector<std::size_t> out(paths.paths(), static_cast<std::size_t>(-1));
  for (std::size_t j = 0; j < paths.paths(); ++j) {
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (boundary.triggers(k, paths.r(j, cols[k]))) {
        out[j] = cols[k];
        break;
      }
    }
  }
  return out;
}

double portfolio_value(const hull_white_model& model, const portfolio& p, double t, double r, exercise_state state,
                       const bermudan_policy_valuer* optionality) {
  double total = 0.0;
  for (const auto& s : p.swaps) total += swap_value(model, s, t, r);
  if (!p.bermudan) return total;
  switch (state) {
    case exercise_state::none:
      throw validation_error("portfolio_value: exercise state required for a Bermudan position");
    case exercise_state::exercised:
      return total + swap_value(model, p.bermudan->underlying, t, r);
    case exercise_state::unexercised:
      if (!optionality) throw validation_error("portfolio_value: unexercised Bermudan needs a valuer");
      return total + optionality->value(t, r);
  }
  return total;
}

portfolio_pricer::portfolio_pricer(const hull_white_model& model, const portfolio& p,
                                   std::shared_ptr<const bermudan_policy_valuer> optionality)
    : model_(model), portfolio_(p), optionality_(std::move(optionality)) {
  for (const auto& s : portfolio_.swaps) validate(s);
  if (portfolio_.bermudan) validate(portfolio_.bermudan->underlying);
}

valuator portfolio_pricer::at(double t, bool exercised) const {
  affine_bond_sum sum;
  for (const auto& s : portfolio_.swaps) sum.add(swap_terms(model_, s, t));
  if (!portfolio_.bermudan) return [sum](double r) { return sum(r); };
  if (exercised) {
    sum.add(swap_terms(model_, portfolio_.bermudan->underlying, t));
    return [sum](double r) { return sum(r); };
  }
  if (!optionality_) throw validation_error("portfolio_pricer: unexercised Bermudan needs a valuer");
  auto opt = optionality_;
  return [sum, opt, t](double r) { return sum(r) + opt->value(t, r); };
}

}  // namespace xvac
