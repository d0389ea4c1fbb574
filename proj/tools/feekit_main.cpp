// feekit CLI: regime-aware fee-market econometrics over daily panels.
//
//   feekit <command> --config <path> [--out <dir>] [--seed <u64>]
//
// Commands: validate construct diagnose estimate lp iv power counterfactual
// synth placebo. Exit codes: 0 success, 2 config error, 3 data error,
// 4 estimation error. Failures also write <out>/error_report.json.

#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>

#include "feekit/errors.hpp"
#include "feekit/pipeline.hpp"
#include "feekit/version.hpp"

namespace {

int verbosity() {
  const char* env = std::getenv("FEEKIT_LOG");
  if (!env) return 1;
  try {
    return std::stoi(env);
  } catch (...) {
    return 1;
  }
}

void writeErrorReport(const std::string& out_dir, const std::string& command,
                      const std::string& message, int exit_code) {
  try {
    std::filesystem::create_directories(out_dir);
    nlohmann::json j;
    j["command"] = command;
    j["error"] = message;
    j["exit_code"] = exit_code;
    std::ofstream f(std::filesystem::path(out_dir) / "error_report.json", std::ios::binary);
    f << j.dump(2) << "\n";
  } catch (...) {
    // Reporting must never mask the original failure.
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("feekit ") + feekit::kVersion +
               " - fee-market econometrics toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  std::optional<std::uint64_t> seed_override;

  const std::vector<std::string> command_names = {
      "validate", "construct", "diagnose", "estimate",       "lp",
      "iv",       "power",     "counterfactual", "synth",    "placebo"};
  const std::vector<std::string> descriptions = {
      "treatment-support diagnostics",
      "build the analysis panel from raw daily aggregates",
      "unit-root, cointegration, and collinearity diagnostics",
      "confirmatory and robustness regressions",
      "local-projection impulse responses",
      "shift-share IV and control-function estimates",
      "minimum detectable effects by regime",
      "state-space counterfactual and welfare bridge",
      "generate a synthetic panel from the configured DGP",
      "shuffled-treatment placebo refit"};

  for (size_t i = 0; i < command_names.size(); ++i) {
    CLI::App* sub = app.add_subcommand(command_names[i], descriptions[i]);
    sub->add_option("--config", config_path, "run configuration file")->required();
    sub->add_option("--out", out_override, "output directory (overrides config)");
    sub->add_option("--seed", seed_override, "seed (overrides config)");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  std::string out_dir = out_override.empty() ? "out" : out_override;
  try {
    feekit::RunConfig cfg = feekit::parseConfig(config_path);
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (seed_override) cfg.seed = *seed_override;
    out_dir = cfg.out_dir;

    feekit::RunReport report = feekit::runReport(cfg, {feekit::commandFromName(command)});
    if (verbosity() >= 1) {
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
      for (const auto& a : report.artifacts) std::cout << a << "\n";
    }
    return 0;
  } catch (const feekit::Error& e) {
    const int code = int(e.error_class());
    std::cerr << "error: " << e.what() << "\n";
    writeErrorReport(out_dir, command, e.what(), code);
    return code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    writeErrorReport(out_dir, command, e.what(), 4);
    return 4;
  }
}
