// mfsmd: experiment runner.
//
//   mfsmd <train|flow|converge|reproduce-paper|verify> [--config FILE] [--threads N]
//         [--section.key value | --section.key=value]...

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mfsmd/config.hpp"
#include "mfsmd/errors.hpp"
#include "mfsmd/experiments.hpp"
#include "mfsmd/parallel.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Stochastic mirror descent and mean-field flow experiments"};
  app.require_subcommand(1);
  std::string config_path;
  unsigned threads = 0;
  app.add_option("--config", config_path, "config file (default: $MFSMD_CONFIG if set)");
  app.add_option("--threads", threads, "worker thread cap (0 = hardware)");
  app.add_flag_callback("--print-defaults", [] {
    std::cout << mfsmd::Config::defaults().dump();
    std::exit(0);
  }, "print every config key with its default and exit");

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"train", "run finite-n stochastic mirror descent"},
      {"flow", "integrate the mean-field flow with particle characteristics"},
      {"converge", "SMD-vs-flow distance study over a ladder of n"},
      {"reproduce-paper", "flagship two-potential reproduction with figures"},
      {"verify", "finite-difference and oracle checks; exit 1 on failure"},
  };
  for (const auto& [name, help] : commands) {
    app.add_subcommand(name, help)->fallthrough();
  }

  // dotted --section.key options are config overrides; the rest goes to CLI11
  std::vector<std::string> overrides, args;
  for (int i = argc - 1; i >= 1; --i) args.emplace_back(argv[i]);  // reversed, as CLI11 expects
  std::vector<std::string> passed;
  while (!args.empty()) {
    std::string a = std::move(args.back());
    args.pop_back();
    const bool dotted = a.rfind("--", 0) == 0 && a.substr(0, a.find('=')).find('.') != std::string::npos;
    if (!dotted) {
      passed.push_back(std::move(a));
      continue;
    }
    overrides.push_back(a);
    if (a.find('=') == std::string::npos && !args.empty()) {
      overrides.push_back(std::move(args.back()));
      args.pop_back();
    }
  }
  std::reverse(passed.begin(), passed.end());

  try {
    app.parse(passed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mfsmd::kExitConfigError;
  }
  auto* sub = app.get_subcommands().front();

  mfsmd::Config config = mfsmd::Config::defaults();
  try {
    if (config_path.empty())
      if (const char* env = std::getenv(mfsmd::kConfigEnvVar); env && *env) config_path = env;
    if (!config_path.empty()) config.load_file(config_path);
    config.apply_overrides(overrides);
  } catch (const mfsmd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return mfsmd::kExitConfigError;
  }
  if (threads > 0) mfsmd::set_thread_count(threads);
  return mfsmd::run_command(sub->get_name(), config, std::cout, std::cerr);
}
