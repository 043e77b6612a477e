#include "xvac/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "xvac/errors.hpp"

namespace xvac {

namespace {

constexpr double kGridTolerance = 1e-9;

class summary {
 public:
  template <class T>
  void add(const std::string& key, const T& value) {
    std::ostringstream s;
    s << std::setprecision(10) << value;
    lines_.emplace_back(key, s.str());
  }
  void write(const std::filesystem::path& file, std::ostream& log) const {
    std::ofstream out(file);
    for (const auto& [k, v] : lines_) {
      out << k << ": " << v << '\n';
      log << k << ": " << v << '\n';
    }
  }

 private:
  std::vector<std::pair<std::string, std::string>> lines_;
};

std::ofstream open_csv(const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << std::setprecision(15);
  return out;
}

void write_curve_csv(const std::filesystem::path& file, const yield_curve& curve, double per_year) {
  std::vector<double> times = monitoring_grid(curve.last_time(), per_year);
  for (double t : curve.knot_times()) times.push_back(t);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end(), [](double a, double b) { return std::abs(a - b) < kGridTolerance; }),
              times.end());
  auto out = open_csv(file);
  out << "T,discount_factor,zero_yield\n";
  for (double t : times) {
    const double s = std::min(t, curve.last_time());
    out << s << ',' << curve.discount(s) << ',' << curve.zero_yield(s) << '\n';
  }
}

void write_nodes_csv(const std::filesystem::path& file, const node_set& nodes) {
  auto out = open_csv(file);
  out << "node,weight\n";
  for (std::size_t k = 0; k < nodes.size(); ++k)
    out << nodes.nodes[k] << ',' << (nodes.weights.empty() ? 0.0 : nodes.weights[k]) << '\n';
}

void write_paths_csv(const std::filesystem::path& file, const path_set& paths) {
  auto out = open_csv(file);
  out << "path_id,date,r,int_r\n";
  const auto grid = paths.grid();
  for (std::size_t j = 0; j < paths.paths(); ++j)
    for (std::size_t k = 0; k < grid.size(); ++k)
      out << j << ',' << grid[k] << ',' << paths.r(j, k) << ',' << paths.integral(j, k) << '\n';
}

void write_bounds_csv(const std::filesystem::path& file, std::span<const bound_record> records) {
  auto out = open_csv(file);
  out << "t,i,C1,C2_fd,C2_decomposition,eps0,eps_i,delta0,delta_i,bound,observed,roundoff,holds\n";
  for (const auto& r : records)
    out << r.t << ',' << r.shock << ',' << r.c1 << ',' << r.c2_fd << ',' << r.c2_decomposition << ',' << r.eps0 << ','
        << r.eps_i << ',' << r.delta0 << ',' << r.delta_i << ',' << r.bound << ',' << r.observed << ',' << r.roundoff << ','
        << (r.holds ? 1 : 0) << '\n';
}

std::size_t nearest_index(std::span<const double> grid, double t) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (std::abs(grid[k] - t) < std::abs(grid[best] - t)) best = k;
  return best;
}

std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<std::size_t> default_orders(std::size_t n) {
  std::vector<std::size_t> out;
  for (std::size_t d = 2; d <= n; ++d) out.push_back(d);
  return out;
}

}  // namespace

std::vector<double> monitoring_grid(double horizon, double per_year, std::span<const double> extra) {
  if (!(horizon > 0.0) || !(per_year > 0.0)) throw validation_error("monitoring_grid: horizon and density must be positive");
  const auto steps = static_cast<long long>(std::ceil(horizon * per_year - kGridTolerance));
  std::vector<double> grid;
  for (long long k = 0; k <= steps; ++k) grid.push_back(std::min(static_cast<double>(k) / per_year, horizon));
  for (double t : extra)
    if (t > 0.0 && t <= horizon + kGridTolerance) grid.push_back(t);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end(), [](double a, double b) { return std::abs(a - b) < kGridTolerance; }),
             grid.end());
  return grid;
}

swap resolve(const swap_row& row, const yield_curve& curve) {
  swap s = row.terms;
  if (row.par) s.fixed_rate = par_swap_rate(curve, s.start, s.maturity, s.payments_per_year);
  return s;
}

scenario build_scenario(const run_config& cfg, bool with_shocks) {
  scenario s;
  s.cfg = cfg;
  const auto base = std::make_shared<const yield_curve>(bootstrap(cfg.instruments));
  s.curves.push_back(base);
  if (with_shocks) {
    std::vector<int> shocks = cfg.shocks;
    if (shocks.empty())
      for (const auto& m : cfg.instruments) shocks.push_back(m.index);
    for (int i : shocks)
      s.curves.push_back(std::make_shared<const yield_curve>(shocked_curve(cfg.instruments, {i, cfg.shift})));
  }

  for (const auto& row : cfg.portfolio) s.book.swaps.push_back(resolve(row, *base));
  std::vector<double> exercise_dates;
  if (cfg.bermudan) {
    bermudan_swaption option;
    option.exercise_dates = cfg.bermudan->exercise_dates;
    option.underlying = resolve(cfg.bermudan->underlying, *base);
    s.book.bermudan = option;
    exercise_dates = option.exercise_dates;
  }
  double horizon = cfg.horizon.value_or(s.book.horizon());
  if (!exercise_dates.empty()) horizon = std::max(horizon, exercise_dates.back());
  s.grid = monitoring_grid(horizon, cfg.dates_per_year, exercise_dates);

  std::vector<hull_white_model> models;
  for (std::size_t m = 0; m < s.curves.size(); ++m) models.emplace_back(cfg.model, s.curves[m], static_cast<int>(m));
  const gaussian_noise noise(cfg.seed, cfg.paths, s.grid.size() - 1, 2);
  auto paths = simulate_markets(models, s.grid, noise);

  std::vector<std::shared_ptr<const bermudan_policy_valuer>> valuers(models.size());
  if (s.book.bermudan) {
    const auto& bc = *cfg.bermudan;
    const std::uint64_t seed = bc.training_seed ? bc.training_seed : derived_seed(cfg.seed, 1);
    const gaussian_noise training_noise(seed, bc.training_paths, s.grid.size() - 1, 2);
    const auto training = simulate(models[0], s.grid, bc.training_paths, training_noise);
    lsmc_options options;
    options.basis_degree = bc.basis_degree;
    s.boundary = lsmc_boundary(models[0], *s.book.bermudan, training, options);
    for (std::size_t m = 0; m < models.size(); ++m)
      valuers[m] = std::make_shared<const bermudan_policy_valuer>(models[m], *s.book.bermudan, *s.boundary);
    s.exercise = make_exercise_map(paths[0], *s.boundary);
  }
  for (std::size_t m = 0; m < models.size(); ++m) {
    auto pricer = std::make_shared<const portfolio_pricer>(models[m], s.book, valuers[m]);
    s.markets.push_back(market_state{models[m], pricer, paths[m]});
  }
  return s;
}

ee_run run_ee(const scenario& s, std::size_t nodes) {
  ee_run out;
  const std::span<const market_state> base(s.markets.data(), 1);
  out.table = fit_surrogates(base, s.exercise, nodes, s.boundary_ptr());
  out.exact = ee_exact(s.markets[0], s.exercise);
  out.approx = ee_approx(s.markets[0], s.exercise, out.table);
  out.rel_error = ee_rel_error(out.exact, out.approx, s.ee_floor());
  return out;
}

sensitivity_run run_sensitivities(const scenario& s, std::size_t nodes, std::span<const std::size_t> orders) {
  sensitivity_run out;
  out.exact = psi_exact(s.markets, s.exercise, s.cfg.shift);
  out.full_table = fit_surrogates(s.markets, s.exercise, nodes, s.boundary_ptr());
  out.full = psi_full_order(s.markets, s.exercise, out.full_table, s.cfg.shift);
  for (std::size_t d : orders) {
    out.orders.push_back(d);
    out.low_tables.push_back(fit_low_order(s.markets, s.exercise, out.full_table, d));
    out.low.push_back(psi_low_order(s.markets, s.exercise, out.full_table, out.low_tables.back(), s.cfg.shift));
  }
  return out;
}

cva_run run_cva(const run_config& cfg) {
  if (!cfg.hazard) throw config_error("config field 'hazard': required by the cva subcommand");
  if (cfg.bermudan) throw config_error("config field 'bermudan': the cva subcommand supports swap portfolios only");
  const auto curve = std::make_shared<const yield_curve>(bootstrap(cfg.instruments));
  portfolio book;
  for (const auto& row : cfg.portfolio) book.swaps.push_back(resolve(row, *curve));
  const auto grid = monitoring_grid(cfg.horizon.value_or(book.horizon()), cfg.dates_per_year);
  const hull_white_model model(cfg.model, curve, 0);
  const auto joint = simulate_joint(cfg.model, *cfg.hazard, grid, cfg.paths, cfg.seed);
  const market_state state{model, std::make_shared<const portfolio_pricer>(model, book), attach_market(model, joint.rates)};
  const exercise_map none;
  const auto table = fit_surrogates(std::span<const market_state>(&state, 1), none, cfg.nodes);

  cva_run out;
  const auto ee = ee_exact(state, none);
  const auto survival = deterministic_survival(*cfg.hazard, grid);
  out.independent = cva_independent(ee, survival, cfg.hazard->lgd);
  for (std::size_t k = 1; k < grid.size(); ++k)
    out.independent_error += cfg.hazard->lgd * (survival[k - 1] - survival[k]) * ee.std_error[k];
  out.wwr_exact = cva_wwr(joint, state, none, cfg.hazard->lgd);
  out.wwr_surrogate = cva_wwr(joint, state, none, cfg.hazard->lgd, &table);
  return out;
}

void run_subcommand(const std::string& command, const run_config& cfg, const std::filesystem::path& out,
                    bool dump_paths, std::ostream& log) {
  static const std::set<std::string> known = {"bootstrap", "ee", "sens", "bermudan", "cva", "tables"};
  if (!known.count(command)) throw config_error("unknown subcommand '" + command + "'");
  std::filesystem::create_directories(out);
  {
    std::ofstream echo(out / "resolved_config.json");
    echo << resolved_config(cfg);
  }
  summary sum;
  sum.add("command", command);
  sum.add("config", cfg.name);

  if (command == "bootstrap") {
    const auto curve = bootstrap(cfg.instruments);
    write_curve_csv(out / "curve.csv", curve, cfg.dates_per_year);
    double worst = 0.0;
    for (const auto& m : cfg.instruments)
      worst = std::max(worst, std::abs(par_swap_rate(curve, 0.0, m.maturity, m.frequency) - m.quote));
    sum.add("max_repricing_error", worst);
    for (const auto& row : cfg.portfolio)
      if (row.par) sum.add("par_rate_" + std::to_string(row.terms.maturity), resolve(row, curve).fixed_rate);
    sum.write(out / "summary.txt", log);
    return;
  }

  if (command == "cva") {
    const auto r = run_cva(cfg);
    auto csv = open_csv(out / "cva.csv");
    csv << "method,value,std_error\n";
    csv << "independent," << r.independent << ',' << r.independent_error << '\n';
    csv << "wrong_way_exact," << r.wwr_exact.value << ',' << r.wwr_exact.std_error << '\n';
    csv << "wrong_way_surrogate," << r.wwr_surrogate.value << ',' << r.wwr_surrogate.std_error << '\n';
    sum.add("cva_independent", r.independent);
    sum.add("cva_wwr_exact", r.wwr_exact.value);
    sum.add("cva_wwr_exact_se", r.wwr_exact.std_error);
    sum.add("cva_wwr_surrogate", r.wwr_surrogate.value);
    sum.write(out / "summary.txt", log);
    return;
  }

  const bool shocks = command != "ee";
  const auto s = build_scenario(cfg, shocks);
  if (dump_paths) write_paths_csv(out / "paths.csv", s.markets[0].paths);
  {
    const double t = s.grid[nearest_index(s.grid, cfg.nodes_date)];
    const auto nodes = s.boundary ? truncated_nodes(s.markets[0].model, t, *s.boundary, cfg.nodes)
                                  : marginal_nodes(s.markets[0].model, t, cfg.nodes);
    write_nodes_csv(out / "nodes.csv", nodes);
    sum.add("nodes_date", t);
  }

  const auto ee = run_ee(s, cfg.nodes);
  write_ee_csv(out / "ee.csv", ee.exact, ee.approx, s.ee_floor());
  sum.add("eps_ee", ee.rel_error);
  sum.add("ee_extrapolations", ee.approx.extrapolations);
  if (command == "ee") {
    sum.add("exact_valuations", ee.exact.exact_valuations);
    sum.add("surrogate_valuations", ee.approx.exact_valuations);
    sum.write(out / "summary.txt", log);
    return;
  }

  if (s.boundary) {
    auto csv = open_csv(out / "boundary.csv");
    csv << "exercise_date,threshold\n";
    for (std::size_t k = 0; k < s.boundary->dates.size(); ++k)
      csv << s.boundary->dates[k] << ',' << s.boundary->thresholds[k] << '\n';
    for (const auto& w : s.boundary->warnings) log << "warning: " << w << '\n';
    sum.add("lsmc_value", s.boundary->estimated_value);
    sum.add("lsmc_std_error", s.boundary->std_error);
    const auto& model = s.markets[0].model;
    const bermudan_policy_valuer valuer(model, *s.book.bermudan, *s.boundary);
    sum.add("policy_value_t0", valuer.value(0.0, model.initial_rate()));
    const auto nested = bermudan_value_exact(model, *s.book.bermudan, 0.0, model.initial_rate(), *s.boundary,
                                             cfg.bermudan->inner_paths, derived_seed(cfg.seed, 2));
    sum.add("nested_mc_value_t0", nested.value);
    sum.add("nested_mc_std_error", nested.std_error);
  }

  std::vector<std::size_t> orders = cfg.low_orders;
  if (command == "tables") {
    orders = cfg.table_orders.empty() ? default_orders(cfg.nodes) : cfg.table_orders;
    for (std::size_t d : cfg.low_orders)
      if (std::find(orders.begin(), orders.end(), d) == orders.end()) orders.push_back(d);
  }
  const auto sens = run_sensitivities(s, cfg.nodes, orders);
  const auto full_err = rel_error_profile(sens.full, sens.exact, cfg.sens_floor_fraction);
  sum.add("max_rel_error_full", full_err.max_abs);
  sum.add("undefined_entries", full_err.undefined);
  for (std::size_t q = 0; q < sens.orders.size(); ++q) {
    const auto err = rel_error_profile(sens.low[q], sens.exact, cfg.sens_floor_fraction);
    sum.add("max_rel_error_low_d" + std::to_string(sens.orders[q]), err.max_abs);
  }

  if (command == "sens" || command == "bermudan") {
    if (!sens.low.empty()) {
      write_sens_csv(out / "sens.csv", sens.exact, sens.full, sens.low.front());
      for (std::size_t q = 1; q < sens.low.size(); ++q)
        write_sens_csv(out / ("sens_d" + std::to_string(sens.orders[q]) + ".csv"), sens.exact, sens.full, sens.low[q]);
      const auto bounds = bound_diagnostics(s.markets, s.exercise, sens.full_table, sens.low_tables.front(), cfg.shift);
      write_bounds_csv(out / "bounds.csv", bounds);
      sum.add("bound_violations",
              std::count_if(bounds.begin(), bounds.end(), [](const bound_record& r) { return !r.holds; }));
    } else {
      write_sens_csv(out / "sens.csv", sens.exact, sens.full, sens.full);
    }
  }

  if (command == "tables") {
    std::vector<std::size_t> table_rows = cfg.table_orders.empty() ? default_orders(cfg.nodes) : cfg.table_orders;
    std::vector<integrated_error_result> kappa;
    for (std::size_t d : table_rows) {
      const auto q = static_cast<std::size_t>(std::find(sens.orders.begin(), sens.orders.end(), d) - sens.orders.begin());
      kappa.push_back(integrated_error(sens.low[q], sens.exact));
    }
    std::vector<double> maturities;
    for (std::size_t m = 1; m < s.curves.size(); ++m) {
      const int idx = s.curves[m]->shock()->index;
      maturities.push_back(cfg.instruments[static_cast<std::size_t>(idx - 1)].maturity);
    }
    write_kappa_csv(out / "kappa.csv", table_rows, kappa, maturities);

    std::vector<std::size_t> cost_orders = cfg.low_orders;
    std::sort(cost_orders.begin(), cost_orders.end());
    std::vector<const sensitivity_profile*> profiles{&sens.full};
    for (std::size_t d : cost_orders) {
      const auto q = static_cast<std::size_t>(std::find(sens.orders.begin(), sens.orders.end(), d) - sens.orders.begin());
      profiles.push_back(&sens.low[q]);
    }
    profiles.push_back(&sens.exact);
    auto rows = cost_report(profiles);
    // Table order: low-order by d, then full-order, then classical.
    std::rotate(rows.begin(), rows.begin() + 1, rows.begin() + 1 + static_cast<std::ptrdiff_t>(cost_orders.size()));
    write_cost_csv(out / "cost.csv", rows);
    for (const auto& r : rows) sum.add("cost_" + r.method, r.valuations_per_date);
  }
  sum.write(out / "summary.txt", log);
}

}  // namespace xvac
