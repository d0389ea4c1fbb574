#pragma once

#include <string>
#include <vector>

#include "feekit/config.hpp"

namespace feekit {

enum class Command {
  kValidate,
  kConstruct,
  kDiagnose,
  kEstimate,
  kLp,
  kIv,
  kPower,
  kCounterfactual,
  kSynth,
  kPlacebo,
};

Command commandFromName(const std::string& name);  // throws ConfigError
std::string commandName(Command c);

struct RunReport {
  std::vector<std::string> artifacts;  // paths relative to the output directory
  std::vector<std::string> warnings;
};

/// Executes the commands in order against the output directory, writing
/// per-command CSV tables plus an index manifest (manifest.json). Outputs are
/// deterministic: identical inputs and config produce byte-identical files.
/// Commands that need the constructed panel raise DependencyError when
/// construct (or synth) has not produced it.
RunReport runReport(const RunConfig& config, const std::vector<Command>& commands);

}  // namespace feekit
