// kpl: config-driven runner for kernel projection learning experiments.
//
// Exit codes: 0 success, 2 invalid configuration or input, 3 numerical failure.

#include "kpl/commands.hpp"
#include "kpl/errors.hpp"

#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct Options {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

using Command = std::function<void(const kpl::exp::ExperimentConfig&, const std::filesystem::path&)>;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel projection learning: functional-output regression experiments"};
  app.require_subcommand(1);

  const std::map<std::string, std::pair<std::string, Command>> commands{
      {"generate-toy", {"Write a synthetic toy dataset as CSV", kpl::exp::run_generate_toy}},
      {"fit", {"Fit the configured method and save the model", kpl::exp::run_fit}},
      {"predict", {"Predict test outputs on a regular grid", kpl::exp::run_predict}},
      {"evaluate", {"Test MSE of a saved model", kpl::exp::run_evaluate}},
      {"cv", {"K-fold cross-validation over the lambda / bandwidth grid", kpl::exp::run_cv}},
      {"robustness", {"Corruption sweep over levels, repeats and methods", kpl::exp::run_robustness}},
      {"dictlearn", {"Learn a dictionary from the training outputs", kpl::exp::run_dictlearn}},
  };

  Options opt;
  std::map<CLI::App*, const Command*> dispatch;
  for (const auto& [name, entry] : commands) {
    CLI::App* sub = app.add_subcommand(name, entry.first);
    sub->add_option("--config", opt.config, "JSON configuration file")->required();
    sub->add_option("--out", opt.out, "Output directory")->capture_default_str();
    sub->add_option("--seed", opt.seed, "Base seed (overrides the config's 'seed')");
    sub->add_option("--threads", opt.threads, "Worker threads (overrides the config's 'threads')")
        ->check(CLI::PositiveNumber);
    dispatch[sub] = &entry.second;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    auto cfg = kpl::exp::load_config(opt.config, opt.seed);
    if (opt.threads) cfg.threads = *opt.threads;
    for (const auto& [sub, cmd] : dispatch) {
      if (sub->parsed()) (*cmd)(cfg, opt.out);
    }
  } catch (const kpl::exp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const kpl::InvalidArgument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const kpl::OutOfRange& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const kpl::NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const kpl::CapacityError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitOk;
}
