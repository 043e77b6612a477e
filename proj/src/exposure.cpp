#include "xvac/exposure.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "xvac/errors.hpp"
#include "xvac/kernels.hpp"

namespace xvac {

namespace {

constexpr double kSigmaFloor = 1e-4;
constexpr double kDateTolerance = 1e-12;

// Composite Gauss-Legendre rule used for the truncated moments.
struct legendre_rule {
  std::vector<double> x;
  std::vector<double> w;
};

const legendre_rule& legendre16() {
  static const legendre_rule rule = [] {
    constexpr std::size_t n = 16;
    std::vector<double> alpha(n, 0.0), beta(n);
    beta[0] = 2.0;
    for (std::size_t k = 1; k < n; ++k) {
      const double kk = static_cast<double>(k);
      beta[k] = kk * kk / (4.0 * kk * kk - 1.0);
    }
    const auto g = gauss_from_recurrence(alpha, beta);
    return legendre_rule{g.nodes, g.weights};
  }();
  return rule;
}

constexpr double kLawRange = 12.0;
constexpr std::size_t kLawPanels = 32;

// Composite Gauss-Legendre points on [lo, hi] carrying the rule's weights.
weighted_points composite_points(double lo, double hi) {
  const auto& rule = legendre16();
  weighted_points out;
  const double width = (hi - lo) / static_cast<double>(kLawPanels);
  for (std::size_t p = 0; p < kLawPanels; ++p) {
    const double mid = lo + width * (static_cast<double>(p) + 0.5);
    for (std::size_t q = 0; q < rule.x.size(); ++q) {
      out.x.push_back(mid + 0.5 * width * rule.x[q]);
      out.w.push_back(0.5 * width * rule.w[q]);
    }
  }
  return out;
}

void normalize(weighted_points& pts) {
  double mass = 0.0;
  for (double w : pts.w) mass += w;
  if (!(mass > 1e-300)) throw domain_error("continuation law: probability mass vanished");
  for (double& w : pts.w) w /= mass;
}

double double_factorial_odd(std::size_t k) {  // (k-1)!! for even k, the k-th standard normal moment
  double r = 1.0;
  for (std::size_t q = k - 1; q >= 1 && q < k; q -= 2) r *= static_cast<double>(q);
  return r;
}

}  // namespace

std::vector<unsigned char> exercise_map::mask(std::size_t k) const {
  std::vector<unsigned char> out(column.size());
  for (std::size_t j = 0; j < column.size(); ++j) out[j] = column[j] <= k ? 1 : 0;
  return out;
}

std::size_t exercise_map::exercised_count(std::size_t k) const {
  return static_cast<std::size_t>(std::count_if(column.begin(), column.end(), [k](std::size_t c) { return c <= k; }));
}

exercise_map make_exercise_map(const path_set& paths, const exercise_boundary& boundary) {
  exercise_map map;
  map.column = exercise_indices(paths, boundary);
  return map;
}

int market_state::shock_index() const {
  const auto& shock = model.curve().shock();
  return shock ? shock->index : 0;
}

std::size_t surrogate_table::valuations_at(std::size_t k) const {
  std::size_t total = 0;
  for (const auto& per_market : valuations) total += per_market.at(k);
  return total;
}

node_set marginal_nodes(const hull_white_model& model, double t, std::size_t order) {
  const auto law = model.marginal_law(t);
  auto nodes = hermite_nodes(law.mean, std::max(law.stddev(), kSigmaFloor), order);
  nodes.distribution = "normal";
  return nodes;
}

weighted_points truncated_normal_points(double mu, double sigma, double b, bool keep_below) {
  if (!(sigma > 0.0)) throw domain_error("truncated normal: standard deviation must be positive");
  double lo = mu - kLawRange * sigma;
  double hi = mu + kLawRange * sigma;
  if (std::isfinite(b)) {
    if (keep_below) hi = std::min(hi, b);
    else lo = std::max(lo, b);
  } else if ((b > 0.0) != keep_below) {
    throw domain_error("truncated normal: no probability mass on the continuation side");
  }
  if (!(hi > lo)) throw domain_error("truncated normal: no probability mass on the continuation side");
  auto pts = composite_points(lo, hi);
  const double norm = 1.0 / (sigma * std::sqrt(2.0 * M_PI));
  for (std::size_t q = 0; q < pts.x.size(); ++q) {
    const double z = (pts.x[q] - mu) / sigma;
    pts.w[q] *= norm * std::exp(-0.5 * z * z);
  }
  normalize(pts);
  return pts;
}

weighted_points continuation_law(const hull_white_model& model, const exercise_boundary& boundary,
                                 std::size_t last) {
  if (last >= boundary.dates.size()) throw validation_error("continuation_law: exercise index out of range");
  const bool keep_below = boundary.side == exercise_side::above;
  auto law0 = model.marginal_law(boundary.dates[0]);
  weighted_points pts =
      truncated_normal_points(law0.mean, std::max(law0.stddev(), kSigmaFloor), boundary.thresholds[0], keep_below);
  for (std::size_t k = 1; k <= last; ++k) {
    const double s0 = boundary.dates[k - 1];
    const double s1 = boundary.dates[k];
    const auto step = make_ou_step(model.params(), s1 - s0);
    const double shift = model.psi(s1) - model.psi(s0) * step.decay;
    const auto law = model.marginal_law(s1);
    const double sd = std::max(law.stddev(), kSigmaFloor);
    double lo = law.mean - kLawRange * sd;
    double hi = law.mean + kLawRange * sd;
    const double b = boundary.thresholds[k];
    if (std::isfinite(b)) {
      if (keep_below) hi = std::min(hi, b);
      else lo = std::max(lo, b);
    } else if ((b > 0.0) != keep_below) {
      throw domain_error("continuation_law: every path exercises at " + std::to_string(s1));
    }
    if (!(hi > lo)) throw domain_error("continuation_law: no probability mass on the continuation side");
    auto next = composite_points(lo, hi);
    const double s = step.sd_u;
    const double norm = 1.0 / (s * std::sqrt(2.0 * M_PI));
    for (std::size_t q = 0; q < next.x.size(); ++q) {
      double density = 0.0;
      for (std::size_t i = 0; i < pts.x.size(); ++i) {
        const double z = (next.x[q] - shift - step.decay * pts.x[i]) / s;
        density += pts.w[i] * std::exp(-0.5 * z * z);
      }
      next.w[q] *= norm * density;
    }
    normalize(next);
    pts = std::move(next);
  }
  return pts;
}

standardized_moments affine_gaussian_moments(const weighted_points& law, double a, double c, double s,
                                             std::size_t order) {
  // Central moments of X taken directly from the points; going through raw
  // moments would cancel catastrophically at the orders needed here.
  double center = 0.0;
  for (std::size_t q = 0; q < law.x.size(); ++q) center += law.w[q] * law.x[q];
  std::vector<double> central(order + 1, 0.0);
  for (std::size_t q = 0; q < law.x.size(); ++q) {
    const double d = law.x[q] - center;
    double pw = law.w[q];
    for (std::size_t k = 0; k <= order; ++k) {
      central[k] += pw;
      pw *= d;
    }
  }
  const double var_x = order >= 2 ? central[2] : 0.0;

  standardized_moments out;
  out.mean = a + c * center;
  out.sd = std::sqrt(c * c * var_x + s * s);
  if (!(out.sd > 0.0)) throw domain_error("truncated moments: degenerate distribution");
  const double alpha = c / out.sd;
  const double eps = s / out.sd;

  out.moments.assign(order + 1, 0.0);
  for (std::size_t k = 0; k <= order; ++k) {
    double acc = 0.0;
    double binom = 1.0;
    for (std::size_t j = 0; j <= k; ++j) {
      const std::size_t rest = k - j;
      if (rest % 2 == 0) {
        const double xpart = j == 0 ? 1.0 : std::pow(alpha, static_cast<double>(j)) * central[j];
        const double epart = rest == 0 ? 1.0 : std::pow(eps, static_cast<double>(rest)) * double_factorial_odd(rest);
        acc += binom * xpart * epart;
      }
      binom = binom * static_cast<double>(k - j) / static_cast<double>(j + 1);
    }
    out.moments[k] = acc;
  }
  out.moments[0] = 1.0;
  return out;
}

standardized_moments propagated_truncated_moments(double mu, double sigma, double b, bool keep_below, double a,
                                                  double c, double s, std::size_t order) {
  return affine_gaussian_moments(truncated_normal_points(mu, sigma, b, keep_below), a, c, s, order);
}

node_set truncated_nodes(const hull_white_model& model, double t, const exercise_boundary& boundary,
                         std::size_t order) {
  std::size_t last = boundary.dates.size();
  for (std::size_t k = 0; k < boundary.dates.size(); ++k)
    if (boundary.dates[k] <= t + kDateTolerance) last = k;
  if (last == boundary.dates.size()) return marginal_nodes(model, t, order);

  const double s_date = boundary.dates[last];
  double a = 0.0, c = 1.0, s = 0.0;
  if (t > s_date + kDateTolerance) {
    const auto step = make_ou_step(model.params(), t - s_date);
    a = model.psi(t) - model.psi(s_date) * step.decay;
    c = step.decay;
    s = step.sd_u;
  }
  const auto m = affine_gaussian_moments(continuation_law(model, boundary, last), a, c, s, 2 * order - 1);
  auto rule = golub_welsch(m.moments, order);
  for (auto& x : rule.nodes) x = m.mean + m.sd * x;
  rule.distribution = "truncated-normal";
  return rule;
}

surrogate_table fit_surrogates(std::span<const market_state> markets, const exercise_map& exercise,
                               std::size_t order, const exercise_boundary* boundary) {
  if (markets.empty()) throw validation_error("fit_surrogates: no markets");
  if (order == 0) throw validation_error("fit_surrogates: need at least one node");
  const auto grid = markets.front().paths.grid();
  const std::size_t dates = grid.size();
  const std::size_t paths = markets.front().paths.paths();
  surrogate_table table;
  table.order = order;
  table.fits.assign(markets.size(), std::vector<branch_pair>(dates));
  table.valuations.assign(markets.size(), std::vector<std::size_t>(dates, 0));

  std::vector<std::size_t> exercised(dates, 0);
  for (std::size_t k = 0; k < dates; ++k) exercised[k] = exercise.empty() ? 0 : exercise.exercised_count(k);

  kernels::parallel_for(markets.size() * dates, [&](std::size_t cell) {
    const std::size_t m = cell / dates;
    const std::size_t k = cell % dates;
    const auto& state = markets[m];
    const double t = grid[k];
    valuation_counter counter;
    if (exercise.empty() || exercised[k] < paths) {
      const auto nodes = boundary ? truncated_nodes(state.model, t, *boundary, order)
                                  : marginal_nodes(state.model, t, order);
      table.fits[m][k][0] = std::make_shared<const polynomial_approx>(fit(nodes, state.pricer->at(t, false), &counter));
    }
    if (!exercise.empty() && exercised[k] > 0) {
      const auto nodes = marginal_nodes(state.model, t, order);
      table.fits[m][k][1] = std::make_shared<const polynomial_approx>(fit(nodes, state.pricer->at(t, true), &counter));
    }
    table.valuations[m][k] = counter.count();
  });
  return table;
}

void path_values(const path_set& paths, std::size_t k, const exercise_map& exercise, const valuator& live,
                 const valuator& exercised, std::span<double> out) {
  std::vector<double> r(paths.paths());
  paths.rates_at(k, r);
  if (exercise.empty()) {
    kernels::evaluate(live, r, out);
    return;
  }
  const auto mask = exercise.mask(k);
  kernels::evaluate_branches(live, exercised, mask, r, out);
}

exposure_profile ee_exact(const market_state& market, const exercise_map& exercise) {
  const auto& paths = market.paths;
  const auto grid = paths.grid();
  exposure_profile out;
  out.method = "exact";
  out.dates.assign(grid.begin(), grid.end());
  std::vector<double> v(paths.paths()), df(paths.paths());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const valuator live = market.pricer->at(grid[k], false);
    const valuator exercised = exercise.empty() ? valuator{} : market.pricer->at(grid[k], true);
    path_values(paths, k, exercise, live, exercised, v);
    paths.discount_factors_at(k, df);
    const auto est = kernels::discounted_positive_mean(df, v);
    out.ee.push_back(est.value);
    out.std_error.push_back(est.std_error);
    out.exact_valuations += paths.paths();
  }
  return out;
}

exposure_profile ee_approx(const market_state& state, const exercise_map& exercise, const surrogate_table& table,
                           std::size_t market) {
  const auto& paths = state.paths;
  const auto grid = paths.grid();
  if (market >= table.fits.size() || table.fits[market].size() != grid.size())
    throw validation_error("ee_approx: surrogate table does not cover the grid");
  exposure_profile out;
  out.method = "approx-" + std::to_string(table.order);
  out.dates.assign(grid.begin(), grid.end());
  std::vector<double> r(paths.paths()), v(paths.paths()), df(paths.paths());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto& fits = table.fits[market][k];
    const auto mask = exercise.empty() ? std::vector<unsigned char>{} : exercise.mask(k);
    paths.rates_at(k, r);
    for (std::size_t j = 0; j < r.size(); ++j) {
      const std::size_t b = (!mask.empty() && mask[j]) ? 1 : 0;
      if (!fits[b]) throw validation_error("ee_approx: missing surrogate at t=" + std::to_string(grid[k]));
      if (fits[b]->extrapolates(r[j])) ++out.extrapolations;
    }
    const valuator live = fits[0] ? valuator([g = fits[0]](double x) { return g->evaluate(x); }) : valuator{};
    const valuator exercised = fits[1] ? valuator([g = fits[1]](double x) { return g->evaluate(x); }) : valuator{};
    path_values(paths, k, exercise, live, exercised, v);
    paths.discount_factors_at(k, df);
    const auto est = kernels::discounted_positive_mean(df, v);
    out.ee.push_back(est.value);
    out.std_error.push_back(est.std_error);
    out.exact_valuations += table.valuations[market][k];
  }
  return out;
}

double ee_rel_error(const exposure_profile& exact, const exposure_profile& approx, double floor) {
  if (exact.ee.size() != approx.ee.size()) throw validation_error("ee_rel_error: profiles on different grids");
  double worst = -1.0;
  for (std::size_t k = 0; k < exact.ee.size(); ++k) {
    if (std::abs(exact.ee[k]) <= floor) continue;
    worst = std::max(worst, std::abs((approx.ee[k] - exact.ee[k]) / exact.ee[k]));
  }
  if (worst < 0.0) throw undefined_metric_error("ee_rel_error: every date is below the exposure floor");
  return worst;
}

void write_ee_csv(const std::filesystem::path& file, const exposure_profile& exact, const exposure_profile& approx,
                  double floor) {
  if (exact.ee.size() != approx.ee.size()) throw validation_error("write_ee_csv: profiles on different grids");
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << std::setprecision(15);
  out << "t,EE_exact,EE_approx,rel_err\n";
  for (std::size_t k = 0; k < exact.ee.size(); ++k) {
    out << exact.dates[k] << ',' << exact.ee[k] << ',' << approx.ee[k] << ',';
    if (std::abs(exact.ee[k]) > floor) out << (approx.ee[k] - exact.ee[k]) / exact.ee[k];
    else out << "nan";
    out << '\n';
  }
}

}  // namespace xvac
