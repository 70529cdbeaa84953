#include <exception>
#include <filesystem>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "popctl/config.h"
#include "popctl/experiments.h"

namespace {

struct BatchItem {
  std::string config_path;
  std::string out_dir;
};

// Returns the number of experiments that failed.
int run_batch(const std::vector<std::string>& configs,
              const std::vector<std::string>& overrides,
              const std::string& out, long seed) {
  namespace fs = std::filesystem;
  std::vector<BatchItem> items;
  for (const auto& path : configs) {
    std::string dir = out;
    if (configs.size() > 1) {
      dir = (fs::path(out) / fs::path(path).stem()).string();
    }
    items.push_back({path, dir});
  }

  auto one = [&](const BatchItem& item) -> std::string {
    try {
      popctl::Config cfg = popctl::Config::Load(item.config_path);
      for (const auto& kv : overrides) cfg.SetAssignment(kv);
      if (seed >= 0) cfg.Set("seed", std::to_string(seed));
      popctl::ExperimentRun run = popctl::execute_experiment(cfg);
      popctl::write_experiment(run, item.out_dir);
      return "";
    } catch (const std::exception& e) {
      return item.config_path + ": " + e.what();
    }
  };

  std::vector<std::future<std::string>> jobs;
  for (const auto& item : items) {
    jobs.push_back(std::async(std::launch::async, one, std::cref(item)));
  }
  int failures = 0;
  for (size_t i = 0; i < jobs.size(); ++i) {
    std::string err = jobs[i].get();
    if (err.empty()) {
      std::cout << "wrote " << items[i].out_dir << '\n';
    } else {
      std::cerr << "error: " << err << '\n';
      ++failures;
    }
  }
  return failures;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online control of population dynamics on the simplex"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "Run one or more experiment configs");
  std::vector<std::string> configs;
  std::vector<std::string> overrides;
  std::string out = "out";
  long seed = -1;
  run_cmd->add_option("config", configs, "Config file(s)")->required();
  run_cmd->add_option("--set", overrides, "Override a key: key=value");
  run_cmd->add_option("--out", out, "Output directory")
      ->capture_default_str();
  run_cmd->add_option("--seed", seed, "Master seed")
      ->check(CLI::NonNegativeNumber);

  auto* describe_cmd =
      app.add_subcommand("describe", "Print an experiment's model and defaults");
  std::string name;
  describe_cmd->add_option("name", name, "Experiment name")->required();

  auto* list_cmd = app.add_subcommand("list", "List experiment names");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      return run_batch(configs, overrides, out, seed) == 0 ? 0 : 1;
    }
    if (*describe_cmd) {
      std::cout << popctl::describe_experiment(name);
      return 0;
    }
    if (*list_cmd) {
      for (const auto& n : popctl::experiment_names()) std::cout << n << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
