#include <CLI11.hpp>

#include <iostream>

#include "commands.hpp"
#include "config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"cncctl: synthetic OOD generation, (K+1)-class training and evaluation"};
  app.require_subcommand(1);
  std::string config_path;
  std::string output;
  std::vector<std::string> sets;
  std::uint64_t seed = 0;

  for (const std::string& name : cnc::cli::command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("-c,--config", config_path, "YAML experiment config");
    sub->add_option("-o,--output", output, "output directory (overrides output_dir)");
    sub->add_option("--seed", seed, "top-level seed (overrides seed)");
    sub->add_option("--set", sets, "override a config value, e.g. train.epochs=500")->allow_extra_args(false);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  cnc::cli::ExperimentConfig cfg;
  try {
    std::vector<std::string> overrides = sets;
    if (app.get_subcommands().front()->count("--seed") > 0) overrides.push_back("seed=" + std::to_string(seed));
    if (!output.empty()) overrides.push_back("output_dir=" + output);
    cfg = config_path.empty() ? cnc::cli::parse_config("", "<defaults>", overrides)
                              : cnc::cli::load_config(config_path, overrides);
    cnc::cli::validate(cfg);
  } catch (const cnc::cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    cnc::cli::run_command(command, cfg, std::cout);
  } catch (const cnc::cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << command << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}
