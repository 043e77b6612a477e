#include <omp.h>

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "xvac/config.hpp"
#include "xvac/errors.hpp"
#include "xvac/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo exposure and exposure-sensitivity engine with collocation surrogates"};
  app.require_subcommand(1, 1);

  std::string config;
  std::string out = "out";
  std::uint64_t seed = 0;
  int threads = 0;
  bool dump_paths = false;

  const char* commands[][2] = {
      {"bootstrap", "bootstrap the curve and write curve.csv"},
      {"ee", "expected exposure, exact and surrogate (ee.csv, nodes.csv)"},
      {"sens", "exposure sensitivities, exact / full-order / low-order (sens.csv, bounds.csv)"},
      {"bermudan", "Bermudan swaption exposure and sensitivities"},
      {"cva", "CVA with and without wrong-way risk (cva.csv)"},
      {"tables", "integrated error table and valuation cost table (kappa.csv, cost.csv, ee.csv)"},
  };
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c[0], c[1]);
    sub->add_option("--config", config, "config file (JSON)")->required();
    sub->add_option("--out", out, "output directory");
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--threads", threads, "worker threads (results do not depend on it)");
    sub->add_flag("--dump-paths", dump_paths, "write paths.csv for the unshocked market");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    auto cfg = xvac::load_config(config);
    if (seed != 0) cfg.seed = seed;
    if (threads > 0) omp_set_num_threads(threads);
    xvac::run_subcommand(command, cfg, out, dump_paths, std::cout);
  } catch (const xvac::validation_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const xvac::solver_error& e) {
    std::cerr << "numerical failure: " << e.what() << " (worst residual " << e.worst_residual() << ")\n";
    return 3;
  } catch (const xvac::arithmetic_error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const xvac::undefined_metric_error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const xvac::domain_error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
