#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "opinc/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"opinc: set-valued inclusion solvers, nonsmooth second-order checks, exact "
               "penalties and discrete adjoint gradients on desk-scale grids"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".";
  std::uint64_t seed = 0;
  bool seed_set = false, strict = false;

  CLI::App* run = app.add_subcommand("run", "execute an experiment config");
  run->add_option("config", config_path, "path to a JSON config")->required();
  run->add_option("--out-dir", out_dir, "directory for reports and CSV artifacts");
  run->add_option("--seed", seed, "override the config seed")->each([&](const std::string&) {
    seed_set = true;
  });
  run->add_flag("--strict", strict, "treat warnings as failures");

  CLI::App* lb = app.add_subcommand("list-builtins", "print the catalog of named problem pieces");

  CLI11_PARSE(app, argc, argv);

  if (lb->parsed()) {
    std::cout << opinc::cli::list_builtins();
    return 0;
  }

  opinc::cli::RunOptions opts;
  opts.out_dir = out_dir;
  opts.strict = strict;
  if (seed_set) opts.seed = seed;
  auto outcome = opinc::cli::run_config_file(config_path, opts);
  if (!outcome.message.empty()) std::cerr << outcome.message << '\n';
  if (!outcome.report_path.empty()) std::cout << outcome.report_path << '\n';
  return outcome.exit_code;
}
