#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

namespace feekit {

/// Shift-share instrument Z_t = sum_l w_l * shock_{l,t}. Weights must be
/// nonnegative with sum <= 1 (small slack); every shock column must name a
/// weighted chain.
Eigen::VectorXd buildShiftShare(const std::map<std::string, double>& weights,
                                const std::vector<std::pair<std::string, Eigen::VectorXd>>& shocks);

struct IvResult {
  double beta = 0.0;
  double se = 0.0;
  double p = 1.0;
  double first_stage_f = 0.0;  // HAC t^2 on the instrument
  double partial_r2 = 0.0;
  std::string instrument_name;
  Eigen::Index n = 0;
};

/// Two-stage least squares with a single instrument. HAC standard errors use
/// the standard 2SLS sandwich with second-stage residuals computed at the
/// original regressor (generated-regressor correction).
IvResult twoSls(const Eigen::VectorXd& y, const Eigen::VectorXd& a, const Eigen::VectorXd& z,
                const Eigen::MatrixXd& controls, const std::vector<std::string>& control_names,
                int hac_lag, const std::string& instrument_name = "Z");

/// Control-function estimator: first-stage residuals enter the outcome
/// regression. The point estimate coincides with 2SLS in the linear case
/// (verified internally); the v-hat coefficient is an endogeneity test.
struct ControlFunctionResult {
  IvResult iv;
  double vhat_coef = 0.0;
  double vhat_se = 0.0;
  double vhat_p = 1.0;  // H0: treatment exogenous
};

ControlFunctionResult controlFunction(const Eigen::VectorXd& y, const Eigen::VectorXd& a,
                                      const Eigen::VectorXd& z, const Eigen::MatrixXd& controls,
                                      const std::vector<std::string>& control_names, int hac_lag,
                                      const std::string& instrument_name = "Z");

}  // namespace feekit
