#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "lrp/cli.hpp"
#include "lrp/error.hpp"
#include "lrp/parallel.hpp"

int main(int argc, char** argv) {
  CLI::App app{"long-range percolation experiments"};
  std::string config;
  std::uint64_t seed = 0;
  unsigned workers = 0;
  std::string out = ".";
  bool list = false;
  app.add_option("--config", config, "experiment config file (key = value, [sections])");
  auto* seed_opt = app.add_option("--seed", seed, "base seed; overrides the config");
  app.add_option("--workers", workers, "worker threads (0 = hardware concurrency)");
  app.add_option("--out", out, "output directory");
  app.add_flag("--list", list, "print the experiment names and exit");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (list) {
    for (const auto& name : lrp::cli::experiment_names()) std::cout << name << "\n";
    return 0;
  }
  if (config.empty()) {
    std::cerr << "error: --config is required\n";
    return 2;
  }
  try {
    auto cfg = lrp::cli::load_config(config);
    lrp::cli::RunOptions opt;
    if (*seed_opt) opt.seed = seed;
    opt.workers = workers;
    lrp::set_default_workers(workers);
    auto result = lrp::cli::run_experiment(cfg, opt);
    lrp::cli::write_outputs(result, out);
    std::cout << lrp::cli::to_csv(result);
  } catch (const lrp::Error& e) {
    std::cerr << "error [" << lrp::to_string(e.code()) << "]: " << e.what() << "\n";
    return lrp::cli::exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
