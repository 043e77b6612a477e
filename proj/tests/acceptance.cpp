// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "xvac/experiments.hpp"

using namespace xvac;

namespace {

struct outcome {
  bool pass = false;
  std::string detail;
};

std::string config_path(const char* name) { return std::string(XVAC_CONFIG_DIR) + "/" + name; }

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(4);
  os << x;
  return os.str();
}

double max_defined(const relative_error_matrix& m) { return m.max_abs; }

// Scenarios shared between criteria.
struct single_swap_run {
  scenario s;
  ee_run ee;
  sensitivity_run sens;
};

const single_swap_run& single_swap() {
  static const single_swap_run run = [] {
    single_swap_run r{build_scenario(load_config(config_path("single_swap.json")), true), {}, {}};
    r.ee = run_ee(r.s, r.s.cfg.nodes);
    r.sens = run_sensitivities(r.s, r.s.cfg.nodes, r.s.cfg.low_orders);
    return r;
  }();
  return run;
}

double single_swap_full_max() {
  const auto& r = single_swap();
  return max_defined(rel_error_profile(r.sens.full, r.sens.exact, r.s.cfg.sens_floor_fraction));
}

outcome quadrature() {
  outcome o{true, ""};
  double worst = 0.0;
  // published zeros of He_N (positive half) as a second, independent oracle
  const std::vector<std::vector<double>> zeros = {
      {0.0}, {0.0, std::sqrt(3.0)}, {0.0, 1.355626179974266, 2.8569700138728056},
      {0.0, 1.1544053947399682, 2.366759410734541, 3.7504397177257425}};
  const std::size_t orders[] = {1, 3, 5, 7};
  for (std::size_t q = 0; q < 4; ++q) {
    const std::size_t n = orders[q];
    const auto rule = golub_welsch(normal_moments(0.0, 1.0, 2 * n - 1), n);
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t k = 1; k < n; ++k) jac(k - 1, k) = jac(k, k - 1) = std::sqrt(static_cast<double>(k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
    for (std::size_t k = 0; k < n; ++k) {
      const double w = es.eigenvectors()(0, k) * es.eigenvectors()(0, k);
      worst = std::max({worst, std::abs(rule.nodes[k] - es.eigenvalues()(k)), std::abs(rule.weights[k] - w)});
      const std::size_t half = k >= n / 2 ? k - n / 2 : n / 2 - k;
      worst = std::max(worst, std::abs(std::abs(rule.nodes[k]) - zeros[q][half]));
    }
  }
  o.pass = worst < 1e-10;
  o.detail = "max deviation " + fmt(worst);
  return o;
}

outcome bootstrap_round_trip() {
  const auto cfg = load_config(config_path("single_swap.json"));
  const auto curve = bootstrap(cfg.instruments);
  double worst = 0.0;
  for (const auto& m : cfg.instruments)
    worst = std::max(worst, std::abs(par_swap_rate(curve, 0.0, m.maturity, m.frequency) - m.quote));
  const double par = par_swap_rate(curve, 0.0, 20.0, 2.0);
  return {worst < 1e-10 && std::abs(par - 0.02226) < 5e-4,
          "repricing " + fmt(worst) + ", 20y par " + fmt(par)};
}

outcome martingale() {
  const auto& r = single_swap();
  const auto& paths = r.s.markets[0].paths;
  const auto& curve = *r.s.curves[0];
  std::vector<double> df(paths.paths());
  double worst = 0.0;
  for (std::size_t k = 1; k < paths.dates(); ++k) {
    paths.discount_factors_at(k, df);
    const auto est = kernels::mean_and_stderr(df);
    worst = std::max(worst, std::abs(est.value - curve.discount(paths.grid()[k])) / est.std_error);
  }
  return {worst < 4.0 && paths.paths() == 20000, "max deviation " + fmt(worst) + " standard errors"};
}

outcome ee_accuracy() {
  const double e = single_swap().ee.rel_error;
  return {e < 1e-4, "eps_EE " + fmt(e)};
}

outcome full_and_low_order() {
  const auto& r = single_swap();
  const double floor = r.s.cfg.sens_floor_fraction;
  const double full = single_swap_full_max();
  double d6 = std::numeric_limits<double>::infinity(), d5 = d6;
  for (std::size_t q = 0; q < r.sens.orders.size(); ++q) {
    const double e = max_defined(rel_error_profile(r.sens.low[q], r.sens.exact, floor));
    if (r.sens.orders[q] == 6) d6 = e;
    if (r.sens.orders[q] == 5) d5 = e;
  }
  return {full <= 5e-3 && d6 <= 1.5e-2 && d5 <= 0.1,
          "full " + fmt(full) + ", d=6 " + fmt(d6) + ", d=5 " + fmt(d5)};
}

outcome coincidence() {
  const auto& r = single_swap();
  const auto low_table = fit_low_order(r.s.markets, r.s.exercise, r.sens.full_table, r.s.cfg.nodes);
  const auto low = psi_low_order(r.s.markets, r.s.exercise, r.sens.full_table, low_table, r.s.cfg.shift);
  double scale = 0.0;
  for (double v : r.sens.full.values) scale = std::max(scale, std::abs(v));
  // relative comparison where the relative-error metric is defined; below the
  // floor, the same 1e-9 applied to the floor itself
  const double floor = r.s.cfg.sens_floor_fraction * scale;
  double worst = 0.0;
  for (std::size_t e = 0; e < low.values.size(); ++e)
    worst = std::max(worst, std::abs(low.values[e] - r.sens.full.values[e]) /
                                std::max(std::abs(r.sens.full.values[e]), floor));
  return {worst <= 1e-9, "max relative difference " + fmt(worst)};
}

struct large_run {
  scenario s;
  sensitivity_run sens;
  std::vector<integrated_error_result> kappa;
};

const large_run& large_portfolio() {
  static const large_run run = [] {
    large_run r{build_scenario(load_config(config_path("large_portfolio.json")), true), {}, {}};
    std::vector<std::size_t> orders;
    for (std::size_t d = 2; d <= r.s.cfg.nodes; ++d) orders.push_back(d);
    r.sens = run_sensitivities(r.s, r.s.cfg.nodes, orders);
    for (const auto& low : r.sens.low) r.kappa.push_back(integrated_error(low, r.sens.exact));
    return r;
  }();
  return run;
}

outcome integrated_error_table() {
  const auto& r = large_portfolio();
  const auto row = [&](std::size_t d) -> const std::vector<double>& { return r.kappa[d - 2].kappa; };
  const std::size_t shocks = row(7).size();
  double d7 = 0.0, d2_min = 1e300, d2_max = 0.0, d13 = 0.0, worst_ratio = 0.0;
  for (std::size_t i = 0; i < shocks; ++i) {
    d7 = std::max(d7, row(7)[i]);
    d2_min = std::min(d2_min, row(2)[i]);
    d2_max = std::max(d2_max, row(2)[i]);
    d13 = std::max(d13, row(13)[i]);
    for (std::size_t d = 2; d < 13; ++d) worst_ratio = std::max(worst_ratio, row(d + 1)[i] / row(d)[i]);
  }
  const bool pass = d7 < 1e-2 && worst_ratio <= 3.0 && d2_min >= 1e-2 && d2_max <= 1e1 && d13 <= 1e-4;
  return {pass, "max kappa d=7 " + fmt(d7) + ", d=2 in [" + fmt(d2_min) + ", " + fmt(d2_max) + "], max d=13 " +
                    fmt(d13) + ", worst kappa_{d+1}/kappa_d " + fmt(worst_ratio)};
}

outcome cost_accounting() {
  const auto& r = large_portfolio();
  std::vector<const sensitivity_profile*> rows{&r.sens.exact, &r.sens.full};
  for (std::size_t q = 0; q < r.sens.orders.size(); ++q)
    if (r.sens.orders[q] >= 7 && r.sens.orders[q] <= 12) rows.push_back(&r.sens.low[q]);
  const auto report = cost_report(rows);
  const std::vector<std::size_t> expected{180000, 117, 69, 77, 85, 93, 101, 109};
  bool pass = report.size() == expected.size();
  std::string detail;
  for (std::size_t q = 0; q < report.size(); ++q) {
    pass = pass && report[q].valuations_per_date == expected[q];
    detail += (q ? "/" : "") + std::to_string(report[q].valuations_per_date);
    // the count must hold at every date, not only at the maximum
    for (auto v : rows[q]->valuations_per_date) pass = pass && v == expected[q];
  }
  return {pass, detail};
}

outcome error_bound() {
  const auto& r = single_swap();
  std::size_t violations = 0, records = 0;
  for (const auto& table : r.sens.low_tables) {
    const auto b = bound_diagnostics(r.s.markets, r.s.exercise, r.sens.full_table, table, r.s.cfg.shift);
    records += b.size();
    violations += std::count_if(b.begin(), b.end(), [](const bound_record& x) { return !x.holds; });
  }
  return {violations == 0 && records > 0, std::to_string(violations) + " violations in " + std::to_string(records)};
}

outcome stressed() {
  const auto s = build_scenario(load_config(config_path("stressed.json")), true);
  const auto ee = run_ee(s, s.cfg.nodes);
  const std::vector<std::size_t> none;
  const auto sens = run_sensitivities(s, s.cfg.nodes, none);
  const double full = max_defined(rel_error_profile(sens.full, sens.exact, s.cfg.sens_floor_fraction));
  const double reference = single_swap_full_max();
  return {ee.rel_error < 1e-4 && full <= 2.0 * reference,
          "eps_EE " + fmt(ee.rel_error) + ", full " + fmt(full) + " vs unstressed " + fmt(reference)};
}

outcome bermudan() {
  const auto s = build_scenario(load_config(config_path("bermudan.json")), true);
  const auto ee = run_ee(s, s.cfg.nodes);
  const auto sens = run_sensitivities(s, s.cfg.nodes, s.cfg.low_orders);
  bool finite = true, consistent = true;
  std::size_t mismatches = 0;
  for (double v : sens.full.values) finite = finite && std::isfinite(v);
  for (const auto& low : sens.low)
    for (std::size_t e = 0; e < low.values.size(); ++e) {
      finite = finite && std::isfinite(low.values[e]);
      if (low.values[e] * sens.full.values[e] < 0.0) {
        consistent = false;
        ++mismatches;
      }
    }
  return {ee.rel_error < 5e-4 && finite && consistent,
          "eps_EE " + fmt(ee.rel_error) + ", finite " + (finite ? "yes" : "no") + ", sign mismatches " +
              std::to_string(mismatches)};
}

outcome wrong_way_limit() {
  auto cfg = load_config(config_path("cva.json"));
  cfg.hazard->rho = 0.0;
  cfg.hazard->volatility = 0.0;
  const auto r = run_cva(cfg);
  const double gap = std::abs(r.wwr_exact.value - r.independent);
  return {gap < 3.0 * r.wwr_exact.std_error,
          "CVA2 " + fmt(r.wwr_exact.value) + " vs CVA1 " + fmt(r.independent) + ", gap " +
              fmt(gap / r.wwr_exact.std_error) + " standard errors"};
}

}  // namespace

int main() {
  struct criterion {
    const char* name;
    std::function<outcome()> run;
  };
  const std::vector<criterion> criteria = {
      {"quadrature correctness", quadrature},
      {"bootstrap round-trip", bootstrap_round_trip},
      {"Hull-White martingale", martingale},
      {"EE accuracy", ee_accuracy},
      {"full- and low-order sensitivities", full_and_low_order},
      {"coincidence d=N", coincidence},
      {"integrated-error table", integrated_error_table},
      {"cost accounting", cost_accounting},
      {"error bound", error_bound},
      {"stressed scenario", stressed},
      {"Bermudan", bermudan},
      {"wrong-way limit", wrong_way_limit},
  };
  int failed = 0;
  for (std::size_t c = 0; c < criteria.size(); ++c) {
    const auto start = std::chrono::steady_clock::now();
    outcome o;
    try {
      o = criteria[c].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failed;
    std::printf("%s %2zu %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c + 1, criteria[c].name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
