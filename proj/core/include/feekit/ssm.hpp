#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace feekit {

/// Gaussian structural model: local linear trend (level + optional slope)
/// plus static regression coefficients carried as constant states,
///   y_t = level_t + x_t' beta + obs noise.
/// Variance parameters are estimated by maximum likelihood over
/// log-variances with a bounded quasi-Newton search; beta is handled by the
/// filter through a wide prior.
struct StateSpaceOptions {
  bool local_trend = true;  // include the slope state
  double diffuse_scale = 1e7;
  std::optional<Eigen::VectorXd> initial_mean;
  std::optional<Eigen::MatrixXd> initial_cov;
  // log(var_obs), log(var_level), log(var_slope): fixes the parameters and
  // skips optimization when set.
  std::optional<Eigen::Vector3d> fixed_logvar;
  int max_iterations = 500;
};

struct StateSpaceFit {
  bool local_trend = true;
  Eigen::VectorXd y;
  Eigen::MatrixXd regressors;  // n x k
  std::vector<std::string> regressor_names;

  double var_obs = 0.0, var_level = 0.0, var_slope = 0.0;
  double loglik = 0.0;
  int iterations = 0;

  // State layout: [level, slope?, beta_1..k]; m = 1 + local_trend + k.
  Eigen::MatrixXd predicted_mean;               // a_{t|t-1}, n x m
  std::vector<Eigen::MatrixXd> predicted_cov;   // P_{t|t-1}
  Eigen::MatrixXd filtered_mean;                // a_{t|t}
  Eigen::MatrixXd smoothed_mean;                // a_{t|n}
  std::vector<Eigen::MatrixXd> smoothed_cov;    // V_{t|n}
  Eigen::VectorXd innovation;                   // v_t
  Eigen::VectorXd innovation_var;               // F_t

  Eigen::Index stateDim() const { return predicted_mean.cols(); }
  Eigen::Index betaOffset() const { return local_trend ? 2 : 1; }
  /// Smoothed regression coefficients (constant states, read at the end).
  Eigen::VectorXd beta() const;
  Eigen::MatrixXd betaCov() const;
  /// Smoothed signal Z_t * alphahat_t.
  Eigen::VectorXd smoothedSignal() const;
  /// Filter gain on the level state at time t (prediction-update weight).
  double levelGain(Eigen::Index t) const;
};

/// Fits the model by MLE. Throws EstimationError with an iteration trace on
/// non-convergence; requires >= 90 observations unless variances are fixed.
StateSpaceFit fitStateSpace(const Eigen::VectorXd& y, const Eigen::MatrixXd& regressors,
                            const std::vector<std::string>& regressor_names,
                            const StateSpaceOptions& options = {});

/// Exact Gaussian log-density of the observation vector implied by the model
/// and explicit initial moments; O(n^3), intended as a small-n oracle.
double bruteForceLogLik(const Eigen::VectorXd& y, const Eigen::MatrixXd& regressors,
                        bool local_trend, double var_obs, double var_level, double var_slope,
                        const Eigen::VectorXd& initial_mean, const Eigen::MatrixXd& initial_cov);

struct CounterfactualPath {
  Eigen::VectorXd observed_signal;  // smoothed fit at observed regressors
  Eigen::VectorXd path;             // smoothed fit with the treatment pinned
  Eigen::VectorXd band_lo, band_hi;
  double a_fixed = 0.0;
};

/// Replaces the named regressor with a fixed value and recomputes the
/// smoothed observation path with delta-method bands from the joint
/// state/coefficient covariance. a_fixed must lie inside the observed
/// support of that regressor.
CounterfactualPath counterfactualPath(const StateSpaceFit& fit, const std::string& regressor,
                                      double a_fixed);

struct WelfareResult {
  Eigen::VectorXd usd_daily;
  double usd_total = 0.0;
  Eigen::VectorXd usd_daily_lo, usd_daily_hi;
  double usd_total_lo = 0.0, usd_total_hi = 0.0;
  bool has_band = false;
};

/// USD_t = (BF_obs - BF_cf + tip_flag * TIP) * GAS * 1e-9 * P_t. Optional
/// counterfactual bands (Gwei) propagate through the linear mapping.
WelfareResult welfareUsd(const Eigen::VectorXd& bf_obs, const Eigen::VectorXd& bf_cf,
                         const Eigen::VectorXd& tip, const Eigen::VectorXd& gas,
                         const Eigen::VectorXd& price, bool include_tip,
                         const Eigen::VectorXd* bf_cf_lo = nullptr,
                         const Eigen::VectorXd* bf_cf_hi = nullptr);

}  // namespace feekit
