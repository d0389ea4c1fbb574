#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "feekit/mackinnon.hpp"

namespace feekit {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int lags_used = 0;
  Deterministic deterministic = Deterministic::kIntercept;
  bool reject_at_5pct = false;
  bool p_at_table_bound = false;  // KPSS p clamped to a tabulated bound
  bool zero_residual = false;     // Engle-Granger degenerate residuals
};

/// ADF with AIC lag selection (max lag floor(12*(T/100)^(1/4))), KPSS with
/// data-dependent Newey-West lags, and Phillips-Perron Z_tau with Bartlett
/// long-run variance. ADF/PP p-values come from the MacKinnon response
/// surfaces; KPSS interpolates the published critical-value table and clamps
/// to [0.01, 0.10] with a bound flag.
struct UnitRootSuite {
  TestResult adf;
  TestResult kpss;
  TestResult pp;
};

TestResult adfTest(const Eigen::VectorXd& y, Deterministic det, int max_lag = -1);
/// KPSS null: stationary around the chosen deterministic (level or trend).
TestResult kpssTest(const Eigen::VectorXd& y, Deterministic det, int lags = -1);
TestResult ppTest(const Eigen::VectorXd& y, Deterministic det, int lags = -1);

UnitRootSuite unitRootSuite(const Eigen::VectorXd& y, Deterministic det);

struct EngleGrangerResult {
  TestResult test;                // PP on residuals, MacKinnon N-series surface
  Eigen::VectorXd residuals;      // long-run relation residuals
  Eigen::VectorXd coefficients;   // first-step OLS (intercept first)
  int n_series = 2;
};

/// First step regresses y on x (intercept added). n_series defaults to
/// 1 + number of non-binary regressor columns, capped at 6, and drives the
/// critical surface; pass explicitly to override.
EngleGrangerResult engleGranger(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                                const std::vector<std::string>& names, int n_series = -1);

struct ResidualDependence {
  TestResult ljung_box;
  double durbin_watson = 0.0;
  Eigen::VectorXd acf;
  Eigen::VectorXd pacf;
  double max_abs_acf_1_10 = 0.0;
};

ResidualDependence residualDependence(const Eigen::VectorXd& residuals, int max_lag);

struct VifEntry {
  std::string name;
  double vif = 1.0;
  bool infinite = false;  // perfect collinearity sentinel
};

std::vector<VifEntry> varianceInflation(const Eigen::MatrixXd& X,
                                        const std::vector<std::string>& names);

}  // namespace feekit
