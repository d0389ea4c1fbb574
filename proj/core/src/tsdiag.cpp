#include "feekit/tsdiag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "feekit/errors.hpp"
#include "feekit/linreg.hpp"
#include "feekit/stats.hpp"

namespace feekit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void requireClean(const Eigen::VectorXd& y, const char* what) {
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (std::isnan(y[i])) throw DomainError(std::string(what) + ": missing interior value");
  }
  if (sampleSd(y) == 0.0) throw DegeneracyError(std::string(what) + ": constant series");
}

int detColumns(Deterministic det) {
  switch (det) {
    case Deterministic::kNone:
      return 0;
    case Deterministic::kIntercept:
      return 1;
    case Deterministic::kTrend:
      return 2;
  }
  return 0;
}

// Assembles the ADF regression dy_t ~ det + y_{t-1} + dy_{t-1..t-p} on rows
// t = first..T-2 of the difference index.
Design adfDesign(const Eigen::VectorXd& y, Deterministic det, int p, int first) {
  const Eigen::Index tmax = y.size() - 1;  // dy has indices 0..tmax-1 for t=1..tmax
  const Eigen::Index n = tmax - first;
  const int ndet = detColumns(det);
  Design d;
  d.y.resize(n);
  d.X.resize(n, ndet + 1 + p);
  d.names.clear();
  if (ndet >= 1) d.names.push_back("const");
  if (ndet == 2) d.names.push_back("trend");
  d.names.push_back("y.lag1");
  for (int i = 1; i <= p; ++i) d.names.push_back("dy.lag" + std::to_string(i));
  for (Eigen::Index r = 0; r < n; ++r) {
    const Eigen::Index t = first + r + 1;  // index into y
    d.y[r] = y[t] - y[t - 1];
    Eigen::Index c = 0;
    if (ndet >= 1) d.X(r, c++) = 1.0;
    if (ndet == 2) d.X(r, c++) = double(t);
    d.X(r, c++) = y[t - 1];
    for (int i = 1; i <= p; ++i) d.X(r, c++) = y[t - i] - y[t - i - 1];
  }
  return d;
}

double tStatOn(const Design& d, const OlsFit& fit, const std::string& name) {
  int idx = -1;
  for (size_t i = 0; i < d.names.size(); ++i) {
    if (d.names[i] == name) idx = int(i);
  }
  const double se = std::sqrt(fit.sigma2 * fit.xtx_inv(idx, idx));
  return fit.coef[idx] / se;
}

// KPSS automatic bandwidth (Hobijn, Franses, Ooms 1998 as used in common
// implementations of the Newey-West data-dependent rule).
int kpssAutoLags(const Eigen::VectorXd& resid) {
  const auto n = resid.size();
  const int covlags = int(std::pow(double(n), 2.0 / 9.0));
  double s0 = resid.squaredNorm() / double(n);
  double s1 = 0.0;
  for (int i = 1; i <= covlags; ++i) {
    double prod = 0.0;
    for (Eigen::Index t = i; t < n; ++t) prod += resid[t] * resid[t - i];
    prod /= double(n) / 2.0;
    s0 += prod;
    s1 += double(i) * prod;
  }
  if (s0 <= 0.0) return 0;
  const double s_hat = s1 / s0;
  const double gamma_hat = 1.1447 * std::pow(s_hat * s_hat, 1.0 / 3.0);
  return std::max(0, int(gamma_hat * std::pow(double(n), 1.0 / 3.0)));
}

}  // namespace

TestResult adfTest(const Eigen::VectorXd& y, Deterministic det, int max_lag) {
  requireClean(y, "adf");
  const Eigen::Index T = y.size();
  if (max_lag < 0) max_lag = int(std::floor(12.0 * std::pow(double(T) / 100.0, 0.25)));
  // Keep enough rows for selection and a sane dof margin.
  const int ndet = detColumns(det);
  max_lag = std::min<int>(max_lag, int((T - 1) / 2) - ndet - 2);
  max_lag = std::max(max_lag, 0);
  if (T - 1 - max_lag < 25) {
    throw DomainError("adf: series too short after lag trimming (need >= 25)");
  }

  // AIC over a common sample, then refit the winner on its full sample.
  int best_p = 0;
  double best_aic = std::numeric_limits<double>::infinity();
  for (int p = 0; p <= max_lag; ++p) {
    Design d = adfDesign(y, det, p, max_lag);
    OlsFit f = olsFit(d);
    const double rss = f.resid.squaredNorm();
    const double aic = double(f.n) * std::log(rss / double(f.n)) + 2.0 * double(f.k);
    if (aic < best_aic) {
      best_aic = aic;
      best_p = p;
    }
  }
  Design d = adfDesign(y, det, best_p, best_p);
  OlsFit f = olsFit(d);

  TestResult r;
  r.statistic = tStatOn(d, f, "y.lag1");
  r.lags_used = best_p;
  r.deterministic = det;
  r.p_value = mackinnonPValue(r.statistic, det, 1);
  r.reject_at_5pct = r.p_value <= 0.05;
  return r;
}

TestResult kpssTest(const Eigen::VectorXd& y, Deterministic det, int lags) {
  requireClean(y, "kpss");
  if (det == Deterministic::kNone) det = Deterministic::kIntercept;
  const Eigen::Index n = y.size();

  Eigen::VectorXd resid;
  if (det == Deterministic::kIntercept) {
    resid = y.array() - y.mean();
  } else {
    Eigen::MatrixXd X(n, 1);
    for (Eigen::Index t = 0; t < n; ++t) X(t, 0) = double(t + 1);
    Design d = withIntercept(y, X, {"trend"});
    resid = olsFit(d).resid;
  }
  if (lags < 0) lags = kpssAutoLags(resid);
  const double lrv = bartlettLongRunVariance(resid, lags);
  if (lrv <= 0.0) throw DegeneracyError("kpss: nonpositive long-run variance");

  double cumsum = 0.0, eta = 0.0;
  for (Eigen::Index t = 0; t < n; ++t) {
    cumsum += resid[t];
    eta += cumsum * cumsum;
  }
  const double stat = eta / (double(n) * double(n) * lrv);

  // Kwiatkowski-Phillips-Schmidt-Shin (1992), Table 1.
  static const double probs[4] = {0.10, 0.05, 0.025, 0.01};
  const double* crit;
  static const double crit_level[4] = {0.347, 0.463, 0.574, 0.739};
  static const double crit_trend[4] = {0.119, 0.146, 0.176, 0.216};
  crit = (det == Deterministic::kTrend) ? crit_trend : crit_level;

  TestResult r;
  r.statistic = stat;
  r.lags_used = lags;
  r.deterministic = det;
  if (stat <= crit[0]) {
    r.p_value = 0.10;
    r.p_at_table_bound = true;
  } else if (stat >= crit[3]) {
    r.p_value = 0.01;
    r.p_at_table_bound = true;
  } else {
    for (int i = 0; i < 3; ++i) {
      if (stat >= crit[i] && stat <= crit[i + 1]) {
        const double w = (stat - crit[i]) / (crit[i + 1] - crit[i]);
        r.p_value = probs[i] + w * (probs[i + 1] - probs[i]);
        break;
      }
    }
  }
  r.reject_at_5pct = r.p_value <= 0.05;
  return r;
}

TestResult ppTest(const Eigen::VectorXd& y, Deterministic det, int lags) {
  requireClean(y, "pp");
  const Eigen::Index T = y.size();
  if (T < 25) throw DomainError("pp: series too short (need >= 25)");
  const Eigen::Index n = T - 1;
  if (lags < 0) lags = int(std::floor(4.0 * std::pow(double(T) / 100.0, 0.25)));

  const int ndet = detColumns(det);
  Design d;
  d.y.resize(n);
  d.X.resize(n, ndet + 1);
  if (ndet >= 1) d.names.push_back("const");
  if (ndet == 2) d.names.push_back("trend");
  d.names.push_back("y.lag1");
  for (Eigen::Index t = 1; t < T; ++t) {
    const Eigen::Index r = t - 1;
    d.y[r] = y[t];
    Eigen::Index c = 0;
    if (ndet >= 1) d.X(r, c++) = 1.0;
    if (ndet == 2) d.X(r, c++) = double(t);
    d.X(r, c++) = y[t - 1];
  }
  OlsFit f = olsFit(d);
  const int rho_idx = ndet;
  const double se_rho = std::sqrt(f.sigma2 * f.xtx_inv(rho_idx, rho_idx));
  const double tstat = (f.coef[rho_idx] - 1.0) / se_rho;

  const double s2 = f.sigma2;
  const double gamma0 = f.resid.squaredNorm() / double(n);
  const double lam2 = bartlettLongRunVariance(f.resid, lags);
  if (lam2 <= 0.0) throw DegeneracyError("pp: nonpositive long-run variance");
  const double z_tau = std::sqrt(gamma0 / lam2) * tstat -
                       double(n) * se_rho * (lam2 - gamma0) /
                           (2.0 * std::sqrt(lam2) * std::sqrt(s2));

  TestResult r;
  r.statistic = z_tau;
  r.lags_used = lags;
  r.deterministic = det;
  r.p_value = mackinnonPValue(z_tau, det, 1);
  r.reject_at_5pct = r.p_value <= 0.05;
  return r;
}

UnitRootSuite unitRootSuite(const Eigen::VectorXd& y, Deterministic det) {
  UnitRootSuite s;
  s.adf = adfTest(y, det);
  s.kpss = kpssTest(y, det);
  s.pp = ppTest(y, det);
  return s;
}

EngleGrangerResult engleGranger(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                                const std::vector<std::string>& names, int n_series) {
  if (y.size() != x.rows()) throw AlignmentError("engle-granger: y and x misaligned");
  if (y.size() < 50) throw DomainError("engle-granger: need length >= 50");

  if (n_series < 0) {
    // Binary flag columns carry no stochastic trend; they do not shift the
    // critical surface.
    int stochastic = 0;
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      bool binary = true;
      for (Eigen::Index r = 0; r < x.rows(); ++r) {
        if (x(r, c) != 0.0 && x(r, c) != 1.0) {
          binary = false;
          break;
        }
      }
      if (!binary) ++stochastic;
    }
    n_series = std::min(6, 1 + stochastic);
  }

  Design d = withIntercept(y, x, names);
  OlsFit f = olsFit(d);

  EngleGrangerResult result;
  result.residuals = f.resid;
  result.coefficients = f.coef;
  result.n_series = n_series;

  const double resid_var = f.resid.squaredNorm() / double(f.n);
  const double y_var = sampleSd(y) * sampleSd(y);
  if (resid_var <= 1e-14 * std::max(y_var, 1.0)) {
    result.test.statistic = -std::numeric_limits<double>::infinity();
    result.test.p_value = 0.0;
    result.test.zero_residual = true;
    result.test.reject_at_5pct = true;
    result.test.deterministic = Deterministic::kIntercept;
    return result;
  }

  // PP on residuals without deterministic terms; the surface accounts for
  // the intercept and regressor count of the first step.
  const Eigen::Index n = f.resid.size() - 1;
  Design rd;
  rd.y.resize(n);
  rd.X.resize(n, 1);
  rd.names = {"e.lag1"};
  for (Eigen::Index t = 1; t <= n; ++t) {
    rd.y[t - 1] = f.resid[t];
    rd.X(t - 1, 0) = f.resid[t - 1];
  }
  OlsFit rf = olsFit(rd);
  const double se_rho = std::sqrt(rf.sigma2 * rf.xtx_inv(0, 0));
  const double tstat = (rf.coef[0] - 1.0) / se_rho;
  const int lags = int(std::floor(4.0 * std::pow(double(n + 1) / 100.0, 0.25)));
  const double gamma0 = rf.resid.squaredNorm() / double(n);
  const double lam2 = bartlettLongRunVariance(rf.resid, lags);
  if (lam2 <= 0.0) throw DegeneracyError("engle-granger: nonpositive long-run variance");
  const double z_tau = std::sqrt(gamma0 / lam2) * tstat -
                       double(n) * se_rho * (lam2 - gamma0) /
                           (2.0 * std::sqrt(lam2) * std::sqrt(rf.sigma2));

  result.test.statistic = z_tau;
  result.test.lags_used = lags;
  result.test.deterministic = Deterministic::kIntercept;
  result.test.p_value = mackinnonPValue(z_tau, Deterministic::kIntercept, n_series);
  result.test.reject_at_5pct = result.test.p_value <= 0.05;
  return result;
}

ResidualDependence residualDependence(const Eigen::VectorXd& residuals, int max_lag) {
  if (max_lag <= 0) throw DomainError("residual dependence: max_lag must be > 0");
  const Eigen::Index n = residuals.size();
  if (n <= max_lag + 5) throw DomainError("residual dependence: series too short for max_lag");

  ResidualDependence out;
  out.acf = acf(residuals, max_lag);
  out.pacf = pacfDurbinLevinson(residuals, max_lag);

  double q = 0.0;
  for (int k = 1; k <= max_lag; ++k) {
    q += out.acf[k - 1] * out.acf[k - 1] / double(n - k);
  }
  q *= double(n) * (double(n) + 2.0);
  out.ljung_box.statistic = q;
  out.ljung_box.lags_used = max_lag;
  out.ljung_box.p_value = chiSquaredSf(q, max_lag);
  out.ljung_box.reject_at_5pct = out.ljung_box.p_value <= 0.05;

  double num = 0.0;
  for (Eigen::Index t = 1; t < n; ++t) {
    const double d = residuals[t] - residuals[t - 1];
    num += d * d;
  }
  const double den = residuals.squaredNorm();
  out.durbin_watson = den > 0.0 ? num / den : kNaN;

  const int top = std::min(10, max_lag);
  for (int k = 1; k <= top; ++k) {
    out.max_abs_acf_1_10 = std::max(out.max_abs_acf_1_10, std::abs(out.acf[k - 1]));
  }
  return out;
}

std::vector<VifEntry> varianceInflation(const Eigen::MatrixXd& X,
                                        const std::vector<std::string>& names) {
  if (X.cols() < 2) throw DomainError("vif: need at least 2 columns");
  std::vector<VifEntry> out;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    VifEntry e;
    e.name = size_t(j) < names.size() ? names[size_t(j)] : std::to_string(j);
    Eigen::VectorXd target = X.col(j);
    const double tmean = target.mean();
    const double tss = (target.array() - tmean).square().sum();
    if (tss <= 0.0) {
      e.vif = std::numeric_limits<double>::infinity();
      e.infinite = true;
      out.push_back(e);
      continue;
    }
    Eigen::MatrixXd others(X.rows(), X.cols());  // intercept + remaining cols
    others.col(0).setOnes();
    Eigen::Index c = 1;
    for (Eigen::Index m = 0; m < X.cols(); ++m) {
      if (m == j) continue;
      others.col(c++) = X.col(m);
    }
    // Least-squares projection; rank deficiency among the others is fine.
    Eigen::VectorXd beta = others.colPivHouseholderQr().solve(target);
    const double rss = (target - others * beta).squaredNorm();
    const double r2 = 1.0 - rss / tss;
    if (1.0 - r2 < 1e-12) {
      e.vif = std::numeric_limits<double>::infinity();
      e.infinite = true;
    } else {
      e.vif = 1.0 / (1.0 - r2);
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace feekit
