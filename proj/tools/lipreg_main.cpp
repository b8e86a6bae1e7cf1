// Config-driven experiment runner. Subcommands mirror the config commands;
// `validate` previews regime labels and capacity without running.

#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>

#include "lipreg/lipreg.hpp"

namespace {

struct CliArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool strict = false;
  std::optional<std::string> out_dir;
};

void add_common_flags(CLI::App* cmd, CliArgs& args) {
  cmd->add_option("--config", args.config_path, "Path to the JSON config")
      ->required();
  cmd->add_option("--seed", args.seed, "Override the config seed");
  cmd->add_option("--threads", args.threads, "Worker threads (outputs identical)");
  cmd->add_flag("--strict", args.strict,
                "Exit 4 when a packing certification fails");
  cmd->add_option("--out-dir", args.out_dir, "Override the output directory");
}

int run_command(const CliArgs& args, std::optional<lipreg::Command> expected) {
  lipreg::ExperimentConfig cfg = lipreg::load_config(args.config_path);
  if (expected && cfg.command != *expected)
    throw lipreg::ConfigError("config command '" + lipreg::command_name(cfg.command) +
                              "' does not match the subcommand");
  lipreg::RunOverrides ov;
  ov.seed = args.seed;
  ov.threads = args.threads;
  if (args.strict) ov.strict = true;
  ov.out_dir = args.out_dir;
  cfg = lipreg::apply_overrides(cfg, ov);
  return lipreg::run_config(cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polynomial regression laboratory for Lipschitz targets under "
               "log-concave product measures"};
  app.require_subcommand(1);

  CliArgs args;
  int exit_code = lipreg::kExitOk;
  struct Sub {
    const char* name;
    const char* help;
    std::optional<lipreg::Command> command;
  };
  const Sub subs[] = {
      {"run", "Run whatever command the config declares", std::nullopt},
      {"simulate", "Generate a dataset CSV + JSON sidecar",
       lipreg::Command::Simulate},
      {"estimate", "Fit the projection / least-squares estimators",
       lipreg::Command::Estimate},
      {"risk-sweep", "Risk table over (n, m, sigma) grids",
       lipreg::Command::RiskSweep},
      {"covdiag", "Random-design covariance diagnostics", lipreg::Command::CovDiag},
      {"packing", "Lower-bound packing construction", lipreg::Command::Packing},
      {"minimax", "Minimax lower-bound calculator", lipreg::Command::Minimax},
  };
  for (const auto& sub : subs) {
    CLI::App* cmd = app.add_subcommand(sub.name, sub.help);
    add_common_flags(cmd, args);
    cmd->callback([&args, &exit_code, command = sub.command] {
      exit_code = run_command(args, command);
    });
  }
  CLI::App* validate = app.add_subcommand(
      "validate", "Preview regime labels, D, and memory without running");
  add_common_flags(validate, args);
  validate->callback([&args] {
    lipreg::ExperimentConfig cfg = lipreg::load_config(args.config_path);
    const lipreg::ValidationReport report = lipreg::validate_report(cfg);
    for (const auto& line : report.lines) std::cout << line << "\n";
  });

  try {
    CLI11_PARSE(app, argc, argv);
  } catch (const lipreg::CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << "\n";
    return lipreg::kExitCapacity;
  } catch (const lipreg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return lipreg::kExitValidation;
  } catch (const lipreg::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return lipreg::kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}
