#pragma once

#include <Eigen/Dense>
#include <vector>

namespace feekit {

double normalCdf(double z);
double chiSquaredSf(double x, int df);  // upper tail

double mean(const Eigen::VectorXd& x);
double sampleSd(const Eigen::VectorXd& x);  // n-1 denominator

/// Order statistic quantile with linear interpolation between points,
/// q in [0, 1]. Matches the usual "type 7" convention.
double quantileLinear(std::vector<double> sorted_or_not, double q);

/// Sample autocorrelations at lags 1..max_lag (biased, n denominator).
Eigen::VectorXd acf(const Eigen::VectorXd& x, int max_lag);

/// Partial autocorrelations at lags 1..max_lag via Durbin-Levinson.
Eigen::VectorXd pacfDurbinLevinson(const Eigen::VectorXd& x, int max_lag);

/// Bartlett-kernel long-run variance of a (not necessarily demeaned) series:
/// gamma0 + 2 * sum_{j<=lag} (1 - j/(lag+1)) gamma_j with n denominators.
double bartlettLongRunVariance(const Eigen::VectorXd& u, int lag);

}  // namespace feekit
