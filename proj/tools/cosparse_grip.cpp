#include "cosparse/bench.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <iostream>

namespace bench = cosparse::bench;

int main(int argc, char **argv) {
  CLI::App app{"Generalized RIP estimation, analysis-l1 recovery and bound verification campaigns"};
  std::string experiment;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  app.add_option("experiment", experiment, "grip | rho | solve | verify-c1 | verify-c2 | verify-t1 | phase | p1p2")
      ->required();
  app.add_option("--config", config_path, "JSON experiment configuration")->required();
  app.add_option("--seed", seed, "Override the campaign seed");
  app.add_option("--out", out_dir, "Override the output directory");

  try {
    app.parse(argc, argv);
  } catch (CLI::ParseError const &e) {
    int const code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  bench::ExperimentConfig config;
  try {
    config = bench::load_config(config_path, bench::parse_experiment(experiment));
    if (seed) { config.seed = *seed; }
    if (out_dir) { config.output_path = *out_dir; }
    bench::validate(config);
  } catch (bench::ConfigError const &e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }

  try {
    bench::CampaignResult const result = bench::run(config);
    std::fprintf(stderr, "%s: %zu rows in %.3f s -> %s\n", experiment.c_str(), result.rows.size(), result.wall_time,
                 config.output_path.c_str());
    for (auto const &[key, value] : result.summary) {
      std::cerr << "  " << key << " = " << cosparse::format_double(value) << '\n';
    }
    int const status = bench::exit_status(result);
    if (status == 3) { std::cerr << "bound violation found\n"; }
    if (status == 4) { std::cerr << "solver did not converge on at least one trial\n"; }
    return status;
  } catch (bench::TrialError const &e) {
    std::cerr << "error: " << e.what() << " (partial results written to " << config.output_path << ")\n";
    return 1;
  } catch (std::exception const &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
