#include "feekit/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>

#include "feekit/errors.hpp"

namespace feekit {

double normalCdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }

double chiSquaredSf(double x, int df) {
  if (x <= 0.0) return 1.0;
  boost::math::chi_squared_distribution<double> dist(df);
  return boost::math::cdf(boost::math::complement(dist, x));
}

double mean(const Eigen::VectorXd& x) { return x.size() ? x.mean() : 0.0; }

double sampleSd(const Eigen::VectorXd& x) {
  const auto n = x.size();
  if (n < 2) return 0.0;
  if (x.maxCoeff() == x.minCoeff()) return 0.0;
  const double m = x.mean();
  return std::sqrt((x.array() - m).square().sum() / double(n - 1));
}

double quantileLinear(std::vector<double> v, double q) {
  if (v.empty()) throw DomainError("quantile of empty vector");
  if (q < 0.0 || q > 1.0) throw DomainError("quantile level outside [0,1]");
  std::sort(v.begin(), v.end());
  const double h = q * double(v.size() - 1);
  const auto lo = static_cast<size_t>(std::floor(h));
  const auto hi = static_cast<size_t>(std::ceil(h));
  if (lo == hi) return v[lo];
  const double w = h - double(lo);
  return v[lo] * (1.0 - w) + v[hi] * w;
}

Eigen::VectorXd acf(const Eigen::VectorXd& x, int max_lag) {
  const auto n = x.size();
  if (max_lag <= 0) throw DomainError("acf requires max_lag > 0");
  if (n <= max_lag) throw DomainError("acf: series shorter than max_lag");
  const double m = x.mean();
  Eigen::VectorXd centered = x.array() - m;
  const double c0 = centered.squaredNorm() / double(n);
  Eigen::VectorXd out(max_lag);
  if (c0 <= 0.0) {
    out.setZero();
    return out;
  }
  for (int k = 1; k <= max_lag; ++k) {
    double ck = 0.0;
    for (Eigen::Index t = k; t < n; ++t) ck += centered[t] * centered[t - k];
    out[k - 1] = (ck / double(n)) / c0;
  }
  return out;
}

Eigen::VectorXd pacfDurbinLevinson(const Eigen::VectorXd& x, int max_lag) {
  Eigen::VectorXd rho = acf(x, max_lag);
  Eigen::VectorXd pacf(max_lag);
  std::vector<double> phi_prev(max_lag + 1, 0.0), phi_cur(max_lag + 1, 0.0);
  double prev_var = 1.0;
  for (int k = 1; k <= max_lag; ++k) {
    double num = rho[k - 1];
    for (int j = 1; j < k; ++j) num -= phi_prev[j] * rho[k - 1 - j];
    const double alpha = prev_var > 0.0 ? num / prev_var : 0.0;
    phi_cur[k] = alpha;
    for (int j = 1; j < k; ++j) phi_cur[j] = phi_prev[j] - alpha * phi_prev[k - j];
    prev_var *= (1.0 - alpha * alpha);
    pacf[k - 1] = alpha;
    phi_prev = phi_cur;
  }
  return pacf;
}

double bartlettLongRunVariance(const Eigen::VectorXd& u, int lag) {
  const auto n = u.size();
  if (n == 0) throw DomainError("long-run variance of empty series");
  double lrv = u.squaredNorm() / double(n);
  for (int j = 1; j <= lag; ++j) {
    if (j >= n) break;
    double gamma = 0.0;
    for (Eigen::Index t = j; t < n; ++t) gamma += u[t] * u[t - j];
    gamma /= double(n);
    lrv += 2.0 * (1.0 - double(j) / double(lag + 1)) * gamma;
  }
  return lrv;
}

}  // namespace feekit
