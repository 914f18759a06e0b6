#include "dfsearch/config.hpp"
#include "dfsearch/errors.hpp"
#include "dfsearch/harness.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

int main(int argc, char** argv) {
  CLI::App app{"Degrees of freedom and search degrees of freedom experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool svg = false;
  std::string command;

  for (const char* name : {"curves", "simulate", "stein-check"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "key=value configuration file")->required();
    sub->add_option("--out", out_dir, "output directory")->required();
    sub->add_option("--seed", seed, "override the configured seed");
    sub->add_flag("--svg", svg, "also write SVG plots");
    sub->callback([&command, name] { command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    dfsearch::Config config = dfsearch::Config::load(config_path);
    if (app.get_subcommand(command)->count("--seed") > 0) config.set("seed", std::to_string(seed));
    if (svg) config.set("svg", "true");
    for (const auto& file : dfsearch::run_command(command, config, out_dir)) {
      std::cout << file.string() << '\n';
    }
  } catch (const dfsearch::Error& e) {
    std::cerr << "dfsearch: " << e.what() << '\n';
    return dfsearch::exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "dfsearch: " << e.what() << '\n';
    return 4;
  }
  return 0;
}
