#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "acbench/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"acbench: actor-critic algorithms on exactly solvable finite-horizon MDPs"};
  app.require_subcommand(1);

  std::string config, input, kind = "regret", out;
  bool loglog = false;

  auto* run = app.add_subcommand("run", "run one algorithm on one environment");
  run->add_option("-c,--config", config, "JSON run config")->required();

  auto* sweep = app.add_subcommand("sweep", "run algos x seeds and aggregate");
  sweep->add_option("-c,--config", config, "JSON run config")->required();

  auto* plot = app.add_subcommand("plot", "render an aggregate.csv to SVG");
  plot->add_option("-i,--input", input, "aggregate.csv from sweep")->required();
  plot->add_option("-k,--kind", kind, "regret | reward | switches");
  plot->add_flag("--loglog", loglog, "log-log axes (regret plots get fitted slopes)");
  plot->add_option("-o,--output", out, "output SVG")->required();

  auto* gen = app.add_subcommand("gen-offline", "generate an offline dataset");
  gen->add_option("-c,--config", config, "JSON run config")->required();
  gen->add_option("-o,--output", out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? acbench::kExitOk : acbench::kExitConfig;
  }

  if (*run) return acbench::cmd_run(config, std::cerr);
  if (*sweep) return acbench::cmd_sweep(config, std::cerr);
  if (*plot) return acbench::cmd_plot(input, kind, loglog, out, std::cerr);
  return acbench::cmd_gen_offline(config, out, std::cerr);
}
