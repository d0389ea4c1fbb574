#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "feekit/panel.hpp"

namespace feekit {

/// Share of end-user transactions on L2 after removing batch postings from
/// both sides: l2 / (l2 + (l1_raw - posting)). Missing when the day is empty.
std::optional<double> postingCleanShare(double l2_user_tx, double l1_tx_raw, double posting_tx);

struct ScarcityInputs {
  double basefee = 0.0;   // Gwei
  double tip = 0.0;       // Gwei
  double blob_fee = 0.0;  // Gwei
  double benchmark = 0.0; // smoothed gas-demand benchmark q~
};

/// log((base + tip + [after_dencun] blob) / q~).
double scarcityIndex(const ScarcityInputs& in, bool after_dencun);

/// Centered 7-day Tukey-Hanning moving mean, w_j ∝ 0.5*(1 + cos(pi*j/4)) for
/// |j| <= 3; truncated windows at the edges (and across missing values) are
/// renormalized.
Eigen::VectorXd tukeyHanningSmooth(const Eigen::VectorXd& x);

struct DemandFactorResult {
  Eigen::VectorXd scores;       // full-sample projection, unit variance on the fit window
  Eigen::VectorXd loadings;     // PC1 direction (unit norm), sign-adjusted
  bool sign_flipped = false;
  std::vector<std::string> input_names;
  Eigen::Index fit_rows = 0;
};

/// First principal component of the fit-window covariance of standardized
/// inputs, projected over the full sample and rescaled to unit variance on
/// the fit window. Sign: nonnegative fit-window correlation with the
/// orientation series (log base fee); exact ties resolve toward a positive
/// first loading. Rows with any missing input get a missing score; the fit
/// window uses complete rows only (>= 30 required).
DemandFactorResult demandFactor(const Eigen::MatrixXd& standardized_inputs,
                                const std::vector<std::string>& input_names,
                                const std::vector<bool>& in_fit_window,
                                const Eigen::VectorXd& orientation_series);

struct IndicatorColumns {
  Eigen::VectorXd regime_london, regime_merge, regime_dencun;
  Eigen::VectorXd cal_weekend, cal_month_end, cal_quarter_turn;
  std::vector<std::pair<std::string, Eigen::VectorXd>> shocks;  // one per event
  Eigen::VectorXd any_outage;
  std::vector<std::string> warnings;  // events outside the panel range
};

/// Regime flags partition days at the upgrade boundaries (boundary day joins
/// the new regime); calendar flags are UTC weekend, month-end, quarter start;
/// shock flags are 1 on the event start day only.
IndicatorColumns buildIndicators(const DailyPanel& panel, const UpgradeCalendar& calendar,
                                 const ShockCatalog& shocks);

enum class DemandVariant { kFull, kLite };  // lite drops trends and stable issuance

struct ConstructOptions {
  UpgradeCalendar calendar;
  ShockCatalog shocks;
  double winsor_tail = 0.005;
  bool trim_pre_london = true;      // drop pre-London rows with a_clean < 0.05
  DemandVariant demand_variant = DemandVariant::kFull;
  double utilization_cap = 1.5;
};

struct ConstructMetadata {
  DemandFactorResult demand;
  std::vector<std::string> demand_inputs;
  Date demand_fit_start, demand_fit_end;
  int utilization_clipped = 0;
  int trimmed_rows = 0;
  std::vector<std::string> warnings;
  std::string winsor_note = "winsorization applied post-transform on analysis columns";
};

/// Full construction pass: treatment, outcomes, demand factor, indicators,
/// then winsorization of the analysis columns. Returns the constructed panel
/// (original raw columns retained) plus metadata for the sidecar.
std::pair<DailyPanel, ConstructMetadata> constructPanel(const DailyPanel& raw,
                                                        const ConstructOptions& options);

}  // namespace feekit
