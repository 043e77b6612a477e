#include "xvac/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>
#include <vector>

#include "json.hpp"

namespace xvac {

namespace {

using json = nlohmann::json;

const std::set<std::string> kTopLevel = {
    "name", "seed", "paths", "nodes", "low_orders", "shift", "mean_reversion", "volatility", "dates_per_year",
    "horizon", "instrument_frequency", "instruments", "shocks", "portfolio", "bermudan", "hazard", "table_orders",
    "nodes_date", "ee_floor_fraction", "sens_floor_fraction"};
const std::set<std::string> kBermudan = {"exercise_dates", "underlying", "training_paths", "training_seed",
                                         "basis_degree", "inner_paths"};
const std::set<std::string> kHazard = {"kappa", "level", "volatility", "initial", "rho", "lgd"};

[[noreturn]] void fail(const std::string& field, const std::string& why) {
  throw config_error("config field '" + field + "': " + why);
}

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& prefix) {
  for (const auto& [key, value] : obj.items())
    if (!known.count(key)) fail(prefix + key, "unknown key");
}

template <class T>
void check_integer(const json& j, const std::string& field) {
  // reject silent narrowing such as -5 -> huge unsigned or 2.5 -> 2
  if (!j.is_number_integer()) fail(field, "expected an integer");
  if constexpr (std::is_unsigned_v<T>)
    if (!j.is_number_unsigned()) fail(field, "expected a non-negative integer");
}

template <class T>
struct is_vector : std::false_type {};
template <class T>
struct is_vector<std::vector<T>> : std::true_type {};

template <class T>
T get(const json& j, const std::string& field) {
  if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
    check_integer<T>(j, field);
  } else if constexpr (is_vector<T>::value) {
    using E = typename T::value_type;
    if constexpr (std::is_integral_v<E> && !std::is_same_v<E, bool>)
      if (j.is_array())
        for (std::size_t k = 0; k < j.size(); ++k) check_integer<E>(j[k], field + "[" + std::to_string(k) + "]");
  }
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    fail(field, e.what());
  }
}

template <class T>
void read(const json& obj, const char* key, T& out, const std::string& prefix = "") {
  if (obj.contains(key)) out = get<T>(obj.at(key), prefix + key);
}

swap_row parse_swap(const json& row, const std::string& field) {
  // sign, notional, fixed rate (decimal or "par"), maturity, start, payments per year
  if (!row.is_array() || row.size() != 6) fail(field, "expected [sign, notional, fixed_rate|\"par\", maturity, start, payments_per_year]");
  swap_row out;
  out.terms.sign = get<int>(row[0], field + "[0]");
  out.terms.notional = get<double>(row[1], field + "[1]");
  if (row[2].is_string()) {
    if (row[2].get<std::string>() != "par") fail(field + "[2]", "fixed rate must be a number or \"par\"");
    out.par = true;
  } else {
    out.terms.fixed_rate = get<double>(row[2], field + "[2]");
  }
  out.terms.maturity = get<double>(row[3], field + "[3]");
  out.terms.start = get<double>(row[4], field + "[4]");
  out.terms.payments_per_year = get<double>(row[5], field + "[5]");
  try {
    validate(out.terms);
  } catch (const validation_error& e) {
    fail(field, e.what());
  }
  return out;
}

json swap_json(const swap_row& s) {
  json fixed = s.par ? json("par") : json(s.terms.fixed_rate);
  return json::array({s.terms.sign, s.terms.notional, fixed, s.terms.maturity, s.terms.start,
                      s.terms.payments_per_year});
}

}  // namespace

run_config parse_config(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text, nullptr, true, true);
  } catch (const json::exception& e) {
    throw config_error(origin + ": " + e.what());
  }
  if (!root.is_object()) throw config_error(origin + ": top level must be an object");
  reject_unknown(root, kTopLevel, "");

  run_config cfg;
  read(root, "name", cfg.name);
  read(root, "seed", cfg.seed);
  read(root, "paths", cfg.paths);
  read(root, "nodes", cfg.nodes);
  read(root, "low_orders", cfg.low_orders);
  read(root, "shift", cfg.shift);
  read(root, "mean_reversion", cfg.model.mean_reversion);
  read(root, "volatility", cfg.model.volatility);
  read(root, "dates_per_year", cfg.dates_per_year);
  if (root.contains("horizon") && !root.at("horizon").is_null()) cfg.horizon = get<double>(root.at("horizon"), "horizon");
  read(root, "instrument_frequency", cfg.instrument_frequency);
  read(root, "shocks", cfg.shocks);
  read(root, "table_orders", cfg.table_orders);
  read(root, "nodes_date", cfg.nodes_date);
  read(root, "ee_floor_fraction", cfg.ee_floor_fraction);
  read(root, "sens_floor_fraction", cfg.sens_floor_fraction);

  if (!root.contains("instruments")) fail("instruments", "missing");
  const auto& inst = root.at("instruments");
  if (!inst.is_array() || inst.empty()) fail("instruments", "expected a non-empty list of [index, maturity, quote_percent]");
  for (std::size_t r = 0; r < inst.size(); ++r) {
    const std::string field = "instruments[" + std::to_string(r) + "]";
    const auto& row = inst[r];
    if (!row.is_array() || row.size() != 3) fail(field, "expected [index, maturity, quote_percent]");
    market_instrument m;
    m.index = get<int>(row[0], field + "[0]");
    m.maturity = get<double>(row[1], field + "[1]");
    m.quote = get<double>(row[2], field + "[2]") / 100.0;
    m.frequency = cfg.instrument_frequency;
    if (m.index != static_cast<int>(r) + 1) fail(field, "indices must run 1..n in order");
    if (!(m.maturity > 0.0)) fail(field, "maturity must be positive");
    if (r > 0 && !(m.maturity > cfg.instruments.back().maturity)) fail(field, "maturities must increase");
    cfg.instruments.push_back(m);
  }

  if (root.contains("portfolio")) {
    const auto& rows = root.at("portfolio");
    if (!rows.is_array()) fail("portfolio", "expected a list of swap rows");
    for (std::size_t r = 0; r < rows.size(); ++r)
      cfg.portfolio.push_back(parse_swap(rows[r], "portfolio[" + std::to_string(r) + "]"));
  }

  if (root.contains("bermudan")) {
    const auto& b = root.at("bermudan");
    if (!b.is_object()) fail("bermudan", "expected an object");
    reject_unknown(b, kBermudan, "bermudan.");
    bermudan_config bc;
    read(b, "exercise_dates", bc.exercise_dates, "bermudan.");
    if (!b.contains("underlying")) fail("bermudan.underlying", "missing");
    bc.underlying = parse_swap(b.at("underlying"), "bermudan.underlying");
    read(b, "training_paths", bc.training_paths, "bermudan.");
    read(b, "training_seed", bc.training_seed, "bermudan.");
    read(b, "basis_degree", bc.basis_degree, "bermudan.");
    read(b, "inner_paths", bc.inner_paths, "bermudan.");
    if (bc.exercise_dates.empty()) fail("bermudan.exercise_dates", "at least one date required");
    if (bc.training_paths == 0) fail("bermudan.training_paths", "must be positive");
    cfg.bermudan = bc;
  }

  if (root.contains("hazard")) {
    const auto& h = root.at("hazard");
    if (!h.is_object()) fail("hazard", "expected an object");
    reject_unknown(h, kHazard, "hazard.");
    hazard_model hm;
    read(h, "kappa", hm.kappa, "hazard.");
    read(h, "level", hm.level, "hazard.");
    read(h, "volatility", hm.volatility, "hazard.");
    read(h, "initial", hm.initial, "hazard.");
    read(h, "rho", hm.rho, "hazard.");
    read(h, "lgd", hm.lgd, "hazard.");
    try {
      validate(hm);
    } catch (const validation_error& e) {
      fail("hazard", e.what());
    }
    cfg.hazard = hm;
  }

  if (cfg.portfolio.empty() && !cfg.bermudan) fail("portfolio", "portfolio is empty");
  if (cfg.paths == 0) fail("paths", "must be at least 1");
  if (cfg.nodes == 0) fail("nodes", "must be at least 1");
  for (std::size_t d : cfg.low_orders)
    if (d == 0 || d > cfg.nodes) fail("low_orders", "every d must satisfy 1 <= d <= nodes");
  for (std::size_t d : cfg.table_orders)
    if (d == 0 || d > cfg.nodes) fail("table_orders", "every d must satisfy 1 <= d <= nodes");
  if (cfg.shift == 0.0) fail("shift", "must be non-zero");
  if (!(cfg.model.mean_reversion > 0.0)) fail("mean_reversion", "must be positive");
  if (!(cfg.model.volatility > 0.0)) fail("volatility", "must be positive");
  if (!(cfg.dates_per_year > 0.0)) fail("dates_per_year", "must be positive");
  if (!(cfg.instrument_frequency > 0.0)) fail("instrument_frequency", "must be positive");
  if (cfg.horizon && !(*cfg.horizon > 0.0)) fail("horizon", "must be positive");
  for (int s : cfg.shocks)
    if (s < 1 || s > static_cast<int>(cfg.instruments.size())) fail("shocks", "index outside 1..n");
  return cfg;
}

run_config load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw config_error("cannot open config file " + file.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), file.string());
}

std::string resolved_config(const run_config& cfg) {
  json j;
  j["name"] = cfg.name;
  j["seed"] = cfg.seed;
  j["paths"] = cfg.paths;
  j["nodes"] = cfg.nodes;
  j["low_orders"] = cfg.low_orders;
  j["shift"] = cfg.shift;
  j["mean_reversion"] = cfg.model.mean_reversion;
  j["volatility"] = cfg.model.volatility;
  j["dates_per_year"] = cfg.dates_per_year;
  j["horizon"] = cfg.horizon ? json(*cfg.horizon) : json(nullptr);
  j["instrument_frequency"] = cfg.instrument_frequency;
  json inst = json::array();
  for (const auto& m : cfg.instruments) inst.push_back(json::array({m.index, m.maturity, m.quote * 100.0}));
  j["instruments"] = inst;
  j["shocks"] = cfg.shocks;
  json rows = json::array();
  for (const auto& s : cfg.portfolio) rows.push_back(swap_json(s));
  j["portfolio"] = rows;
  if (cfg.bermudan) {
    const auto& b = *cfg.bermudan;
    j["bermudan"] = {{"exercise_dates", b.exercise_dates},
                     {"underlying", swap_json(b.underlying)},
                     {"training_paths", b.training_paths},
                     {"training_seed", b.training_seed},
                     {"basis_degree", b.basis_degree},
                     {"inner_paths", b.inner_paths}};
  }
  if (cfg.hazard) {
    const auto& h = *cfg.hazard;
    j["hazard"] = {{"kappa", h.kappa}, {"level", h.level}, {"volatility", h.volatility},
                   {"initial", h.initial}, {"rho", h.rho},     {"lgd", h.lgd}};
  }
  j["table_orders"] = cfg.table_orders;
  j["nodes_date"] = cfg.nodes_date;
  j["ee_floor_fraction"] = cfg.ee_floor_fraction;
  j["sens_floor_fraction"] = cfg.sens_floor_fraction;
  return j.dump(2) + "\n";
}

}  // namespace xvac
