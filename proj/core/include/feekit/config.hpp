#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "feekit/dates.hpp"
#include "feekit/measures.hpp"
#include "feekit/panel.hpp"

namespace feekit {

/// Declarative key=value run configuration. Unknown keys are rejected.
struct RunConfig {
  // Paths.
  std::string panel_path;
  std::string shocks_path;
  std::string weights_path;
  std::string out_dir = "out";

  // Windows.
  UpgradeCalendar calendar;
  std::optional<Date> window_start;  // confirmatory; defaults to London
  std::optional<Date> window_end;    // defaults to the day before Dencun

  // Estimator options.
  int hac_lag_levels = 10;
  int hac_lag_diff = 7;
  double knot = 0.80;
  std::vector<std::string> fdr_family = {"log_basefee", "scarcity"};
  DemandVariant demand_variant = DemandVariant::kFull;
  double winsor_tail = 0.005;
  bool trim_pre_london = true;
  double support_sd_threshold = 0.05;
  int lp_horizon = 28;
  double ecm_gate_alpha = 0.10;
  bool ecm_gate_warn_only = true;

  // Counterfactual scenario.
  Date cfact_start = Date::fromYmd(2023, 10, 28);
  Date cfact_end = Date::fromYmd(2024, 3, 12);
  double cfact_percentile = 0.10;
  std::string cfact_price = "mean";  // mean | close
  bool cfact_include_tip = false;

  // Synthetic DGP.
  Eigen::Index synth_length = 1200;
  double synth_beta = -1.19;
  double synth_psi = -1.0;
  double synth_phi = -0.06;
  double synth_sigma_eps = 0.05;
  double synth_sigma_a = 0.01;

  std::uint64_t seed = 42;

  PanelSchema schema;

  Date confirmatoryStart() const { return window_start.value_or(calendar.london); }
  Date confirmatoryEnd() const { return window_end.value_or(calendar.dencun - 1); }

  /// Canonical key=value rendering (sorted) used for the config hash.
  std::string canonical() const;
  std::uint64_t hash() const;
};

/// Parses the config file. Unknown keys raise ConfigError naming the key;
/// date windows are validated; referenced files must exist.
RunConfig parseConfig(const std::string& path);
RunConfig parseConfigText(const std::string& text, const std::string& origin);

/// FNV-1a 64-bit, used for config and artifact hashing in the manifest.
std::uint64_t fnv1a64(const std::string& data);

}  // namespace feekit
