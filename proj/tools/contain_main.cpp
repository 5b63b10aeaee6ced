#include <CLI11.hpp>
#include <cstdint>
#include <string>

#include "contain/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Two-compartment tumor growth simulation and treatment-ordering verification"};
  app.require_subcommand(1);

  std::string run_config, run_out;
  CLI::App* run = app.add_subcommand("run", "simulate every policy of a scenario config");
  run->add_option("--config", run_config, "scenario config file")->required();
  run->add_option("--out-dir", run_out, "output directory (default: outputs.dir)");

  std::string suite = "all", verify_out = ".";
  int n_scenarios = 100;
  std::uint64_t seed = 7;
  bool negative_control = false;
  CLI::App* verify = app.add_subcommand("verify", "run the ordering verification suites");
  verify->add_option("--suite", suite, "all, P1..P8, L4, A1A2 or cp");
  verify->add_option("--n", n_scenarios, "scenarios (or instances) per suite");
  verify->add_option("--seed", seed, "base seed");
  verify->add_option("--out-dir", verify_out, "report directory");
  verify->add_flag("--negative-control", negative_control,
                   "sample an assumption-violating model family instead");

  std::string fig_id, fig_config, fig_out;
  CLI::App* figure = app.add_subcommand("figure-data", "export figure column data");
  figure->add_option("--figure", fig_id, "fig3, fig4 or fig5")->required();
  figure->add_option("--config", fig_config, "scenario config file")->required();
  figure->add_option("--out-dir", fig_out, "output directory (default: outputs.dir)");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return contain::cli::run_command(run_config, run_out);
  if (verify->parsed()) {
    return contain::cli::verify_command(suite, n_scenarios, seed, verify_out, negative_control);
  }
  return contain::cli::figure_data_command(fig_id, fig_config, fig_out);
}
