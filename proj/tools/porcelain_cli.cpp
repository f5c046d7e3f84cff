// Command-line front end: porcelain <command> [--config FILE] [--key value ...]
#include <algorithm>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "porcelain/commands.hpp"
#include "porcelain/config.hpp"
#include "porcelain/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Multi-task porcelain classification: prepare, synth, train, evaluate, compare, report"};
  app.set_help_flag("-h,--help", "Print this help message and exit");

  std::string command;
  std::string config_file;
  app.add_option("command", command, "prepare | synth | train | evaluate | compare | report")->required();
  app.add_option("-c,--config", config_file, "key = value config file");

  std::map<std::string, std::string> values;
  for (const auto& key : porcelain::config_keys()) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    app.add_option(flag, values[key], "overrides '" + key + "'");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  std::map<std::string, std::string> overrides;
  for (const auto& key : porcelain::config_keys()) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    if (app.get_option(flag)->count() > 0) overrides[key] = values[key];
  }

  porcelain::ExperimentConfig config;
  try {
    std::optional<std::filesystem::path> file;
    if (!config_file.empty()) file = config_file;
    config = porcelain::parse_config(file, overrides);
  } catch (const porcelain::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return porcelain::dispatch_command(command, config, std::cout, std::cerr);
}
