#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "ncapprox/config.hpp"
#include "ncapprox/error.hpp"
#include "ncapprox/experiment.hpp"

namespace {

struct Args {
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  std::size_t trials = 0;
  std::string plot_script;
  bool timing = false;
  unsigned threads = 1;
  bool lossless = false;
  std::string loss_rate;
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ncapprox::Error(ncapprox::Errc::io_error, fmt::format("cannot write '{}'", path));
  out << text;
  if (!out) throw ncapprox::Error(ncapprox::Errc::io_error, fmt::format("write to '{}' failed", path));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Approximate decoding for network-coded correlated sources: experiment runner"};
  app.require_subcommand(1);

  Args args;
  for (const auto& name : ncapprox::experiment_names()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", args.config, "key = value config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", args.seed, "master seed")->required();
    sub->add_option("--out", args.out, "CSV output path")->required();
    if (name != "analysis-tables")  // exact tables, no trials
      sub->add_option("--trials", args.trials, "override the config's trial count")->check(CLI::PositiveNumber);
    sub->add_option("--plot-script", args.plot_script, "also write a matplotlib script for the CSV");
    sub->add_flag("--timing", args.timing, "fill wall-clock columns (output is then not reproducible)");
    sub->add_option("--threads", args.threads, "worker threads")->check(CLI::Range(1u, 256u));
    if (name == "window-sweep") {
      auto* lossless = sub->add_flag("--lossless", args.lossless, "every packet arrives");
      sub->add_option("--loss-rate", args.loss_rate, "Bernoulli loss rate, e.g. 1/24")->excludes(lossless);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    ncapprox::Config config = ncapprox::Config::load(args.config);
    // Overrides go into the config so they show up in config_hash.
    if (args.trials) config.set("trials", std::to_string(args.trials));
    if (args.lossless) config.set("lossless", "true");
    if (!args.loss_rate.empty()) {
      ncapprox::parse_fraction(args.loss_rate);
      config.set("lossless", "false");
      config.set("loss_rate", args.loss_rate);
    }
    ncapprox::RunOptions options;
    options.seed = args.seed;
    options.timing = args.timing;
    options.threads = args.threads;

    const ncapprox::CsvTable table = ncapprox::run_experiment(name, config, options);
    write_file(args.out, table.to_string());
    if (!args.plot_script.empty()) write_file(args.plot_script, ncapprox::plot_script(name, args.out));
  } catch (const ncapprox::Error& e) {
    fmt::print(stderr, "ncapprox {}: {}\n", name, e.what());
    return 1;
  }
  return 0;
}
