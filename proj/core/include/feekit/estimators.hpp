#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "feekit/linreg.hpp"
#include "feekit/tsdiag.hpp"

namespace feekit {

/// OLS point estimates with Newey-West (Bartlett) covariance.
/// X must not contain the intercept; one is prepended.
EstimateResult olsHac(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                      const std::vector<std::string>& names, int hac_lag);

/// Prais-Winsten AR(1) FGLS with the first observation retained through the
/// sqrt(1-rho^2) transform. Iterates rho to |drho| < 1e-6 (max 50 passes).
/// fixed_rho skips estimation (rho=0 reproduces OLS exactly).
EstimateResult praisWinsten(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                            const std::vector<std::string>& names,
                            std::optional<double> fixed_rho = std::nullopt);

struct EcmOptions {
  int hac_lag = 7;
  double gate_alpha = 0.10;  // Engle-Granger no-cointegration gate
  bool gate_warn_only = false;
};

struct EcmResult {
  double psi = 0.0;             // coefficient on the treatment difference
  double phi = 0.0;             // coefficient on ECT_{t-1}
  double psi_se = 0.0, phi_se = 0.0;
  double half_life_days = 0.0;  // finite iff -1 < phi < 0
  bool non_reverting = false;   // phi >= 0
  bool oscillatory = false;     // phi <= -1
  Eigen::VectorXd ect;          // long-run residual series (levels sample)
  EstimateResult levels_stage;
  EstimateResult diff_stage;
  EngleGrangerResult gate;
  bool gate_passed = true;
  std::string gate_warning;
};

/// Three-step ECM on contiguous series: (i) levels OLS-HAC, (ii) lagged
/// residual as ECT, (iii) differenced regression with HAC. Series must be
/// aligned and complete; differencing is positional.
EcmResult ecmFit(const Eigen::VectorXd& y, const Eigen::VectorXd& a,
                 const Eigen::MatrixXd& controls, const std::vector<std::string>& control_names,
                 const EcmOptions& options = {});

struct KoyckResult {
  double rho = 0.0;
  double beta0 = 0.0;
  double long_run_multiplier = 0.0;
  double long_run_se = 0.0;  // delta method
  bool divergent = false;    // |rho| >= 1
  EstimateResult fit;
};

KoyckResult koyckFit(const Eigen::VectorXd& y, const Eigen::VectorXd& a,
                     const Eigen::MatrixXd& controls, const std::vector<std::string>& control_names,
                     int hac_lag);

struct LocalProjectionOptions {
  int max_horizon = 28;
  int hac_lag = 7;
  bool grow_lag_with_horizon = true;  // per-horizon lag = hac_lag + h
};

struct IrfResult {
  std::vector<int> horizons;
  Eigen::VectorXd beta_h;
  Eigen::VectorXd se_h;
  Eigen::VectorXd band_lo, band_hi;       // per-horizon 95% bands on beta_h
  Eigen::VectorXd cumulative_pct_10pp;    // 100*(exp(0.10*cumsum beta) - 1)
};

IrfResult localProjections(const Eigen::VectorXd& dy, const Eigen::VectorXd& da,
                           const Eigen::MatrixXd& dcontrols,
                           const std::vector<std::string>& control_names,
                           const LocalProjectionOptions& options = {});

struct RegimeEstimate {
  std::string regime;
  bool skipped = false;
  std::string warning;
  Eigen::Index n_obs = 0;
  EstimateResult fit;                      // valid iff !skipped
  double semi_elasticity_10pp = 0.0;       // from the treatment coefficient
  std::vector<std::string> dropped_controls;  // constant within the regime
};

/// Independent OLS-HAC fits on regime subsets (row floor 60). Controls that
/// are constant inside a subset are dropped and recorded, not errors.
std::vector<RegimeEstimate> regimeSplit(const Eigen::VectorXd& y, const Eigen::VectorXd& a,
                                        const Eigen::MatrixXd& controls,
                                        const std::vector<std::string>& control_names,
                                        const std::vector<std::pair<std::string, Eigen::VectorXd>>& regimes,
                                        int hac_lag, Eigen::Index row_floor = 60);

struct PiecewiseResult {
  double knot = 0.8;
  double below_slope = 0.0, below_se = 0.0;
  double above_slope = 0.0, above_se = 0.0;
  bool above_undefined = false;  // no data above the knot
  EstimateResult fit;
};

/// Linear spline in the treatment with basis {a, max(a-knot, 0)}. The
/// above-knot slope is the sum of both basis coefficients (delta-method SE).
/// A knot with no data below it has no identifiable lower segment and is a
/// domain error; a knot above all the data flags the upper segment instead.
PiecewiseResult piecewiseFit(const Eigen::VectorXd& y, const Eigen::VectorXd& a,
                             const Eigen::MatrixXd& controls,
                             const std::vector<std::string>& control_names, double knot,
                             int hac_lag);

}  // namespace feekit
