#include <cstdlib>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "irk/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitInternal = 3;

void print_diagnostics(const irk::ConfigError& e) {
  std::cerr << e.what() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regularized Krylov solvers for linear inverse problems"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string seeds_text;
  int jobs = 1;

  auto* run = app.add_subcommand("run", "run an experiment config and write its artifacts");
  run->add_option("config", config_path, "experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "output directory (overrides the config and SOLVE_OUT_DIR)");
  run->add_option("--seeds", seeds_text, "seed range a..b or list a,b,c");
  run->add_option("--jobs", jobs, "worker threads (0 = hardware concurrency)")
      ->check(CLI::NonNegativeNumber);

  auto* validate = app.add_subcommand("validate", "check a config and print it with defaults");
  validate->add_option("config", config_path, "experiment config (JSON)")->required();

  auto* problems = app.add_subcommand("problems", "problem catalogue");
  auto* list = problems->add_subcommand("list", "list problem kinds and their defaults");
  problems->require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (list->parsed()) {
      std::cout << irk::describe_problems();
      return 0;
    }
    irk::ExperimentSpec spec = irk::load_experiment(config_path);
    if (validate->parsed()) {
      std::cout << irk::effective_config_json(spec);
      return 0;
    }
    if (!seeds_text.empty()) {
      auto seeds = irk::parse_seed_list(seeds_text);
      if (!seeds) {
        std::cerr << "--seeds: expected a..b or a,b,c with non-negative integers\n";
        return kExitConfig;
      }
      spec.seeds = *seeds;
    }
    if (!out_dir.empty()) {
      spec.output_dir = out_dir;
    } else if (const char* env = std::getenv("SOLVE_OUT_DIR"); env && *env) {
      spec.output_dir = env;
    }
    if (jobs == 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    irk::run_experiment(spec, irk::RunOptions{jobs}, std::cerr);
    std::cerr << "wrote " << spec.output_dir.string() << "\n";
    return 0;
  } catch (const irk::ConfigError& e) {
    print_diagnostics(e);
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
