#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace feekit {

enum class CovKind { kClassical, kHacBartlett, kFglsAr1 };

std::string covKindName(CovKind kind, int hac_lag);

/// Named design matrix. Columns are built explicitly (intercept included by
/// the caller) so that estimators can report rank problems by name.
struct Design {
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  std::vector<std::string> names;  // one per column of X

  Eigen::Index n() const { return y.size(); }
  Eigen::Index k() const { return X.cols(); }
};

/// Appends a leading intercept column named "const".
Design withIntercept(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                     std::vector<std::string> names);

/// Throws RankError naming the offending columns when X is rank deficient.
void requireFullRank(const Eigen::MatrixXd& X, const std::vector<std::string>& names);

struct OlsFit {
  Eigen::VectorXd coef;
  Eigen::VectorXd resid;
  Eigen::VectorXd fitted;
  Eigen::MatrixXd xtx_inv;
  double sigma2 = 0.0;  // RSS / (n - k)
  double r2 = 0.0, adj_r2 = 0.0;
  Eigen::Index n = 0, k = 0;
};

OlsFit olsFit(const Design& d);

/// Classical covariance sigma2 * (X'X)^-1.
Eigen::MatrixXd classicalCov(const Design& d, const OlsFit& fit);

/// Newey-West HAC covariance with Bartlett weights w_j = 1 - j/(L+1).
/// With lag 0 this is exactly the White (HC0) covariance.
Eigen::MatrixXd neweyWestCov(const Design& d, const OlsFit& fit, int lag);

/// Coefficient table with normal-based inference (ci95 = coef +- 1.96 se).
struct EstimateResult {
  std::vector<std::string> names;
  Eigen::VectorXd coef;
  Eigen::VectorXd se;
  Eigen::VectorXd p_values;
  Eigen::VectorXd ci_lo, ci_hi;
  Eigen::MatrixXd cov;
  CovKind cov_kind = CovKind::kClassical;
  int hac_lag = 0;
  Eigen::Index n_obs = 0;
  double adj_r2 = 0.0;
  Eigen::VectorXd residuals;
  double rho_hat = 0.0;  // Prais-Winsten only
  int pw_iterations = 0;

  int indexOf(const std::string& name) const;
  double coefOf(const std::string& name) const;
  double seOf(const std::string& name) const;
  double pOf(const std::string& name) const;
};

EstimateResult makeEstimate(const Design& d, const OlsFit& fit, Eigen::MatrixXd cov,
                            CovKind kind, int hac_lag);

}  // namespace feekit
