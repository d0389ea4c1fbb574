#include "feekit/linreg.hpp"

#include <cmath>
#include <limits>

#include "feekit/errors.hpp"
#include "feekit/stats.hpp"

namespace feekit {

std::string covKindName(CovKind kind, int hac_lag) {
  switch (kind) {
    case CovKind::kClassical:
      return "OLS";
    case CovKind::kHacBartlett:
      return "HAC(" + std::to_string(hac_lag) + ")";
    case CovKind::kFglsAr1:
      return "FGLS-AR1";
  }
  return "?";
}

Design withIntercept(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                     std::vector<std::string> names) {
  Design d;
  d.y = y;
  d.X.resize(y.size(), X.cols() + 1);
  d.X.col(0).setOnes();
  if (X.cols() > 0) d.X.rightCols(X.cols()) = X;
  d.names.reserve(names.size() + 1);
  d.names.push_back("const");
  for (auto& n : names) d.names.push_back(std::move(n));
  return d;
}

void requireFullRank(const Eigen::MatrixXd& X, const std::vector<std::string>& names) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  const auto rank = qr.rank();
  if (rank == X.cols()) return;
  // The trailing pivots identify columns in the span of earlier ones.
  std::string offenders;
  const auto& perm = qr.colsPermutation().indices();
  for (Eigen::Index i = rank; i < X.cols(); ++i) {
    if (!offenders.empty()) offenders += ", ";
    const auto col = perm[i];
    offenders += (size_t(col) < names.size()) ? names[size_t(col)] : std::to_string(col);
  }
  throw RankError("design matrix is rank deficient; dependent column(s): " + offenders);
}

OlsFit olsFit(const Design& d) {
  if (d.X.rows() != d.y.size()) throw AlignmentError("X and y row mismatch");
  if (d.n() <= d.k()) {
    throw EstimationError("not enough observations: n=" + std::to_string(d.n()) +
                          ", k=" + std::to_string(d.k()));
  }
  requireFullRank(d.X, d.names);

  OlsFit fit;
  fit.n = d.n();
  fit.k = d.k();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(d.X);
  fit.coef = qr.solve(d.y);
  fit.fitted = d.X * fit.coef;
  fit.resid = d.y - fit.fitted;
  const double rss = fit.resid.squaredNorm();
  fit.sigma2 = rss / double(fit.n - fit.k);
  fit.xtx_inv = (d.X.transpose() * d.X).ldlt().solve(
      Eigen::MatrixXd::Identity(d.k(), d.k()));
  const double ybar = d.y.mean();
  const double tss = (d.y.array() - ybar).square().sum();
  fit.r2 = tss > 0.0 ? 1.0 - rss / tss : 1.0;
  fit.adj_r2 = tss > 0.0
                   ? 1.0 - (1.0 - fit.r2) * double(fit.n - 1) / double(fit.n - fit.k)
                   : 1.0;
  return fit;
}

Eigen::MatrixXd classicalCov(const Design& d, const OlsFit& fit) {
  (void)d;
  return fit.sigma2 * fit.xtx_inv;
}

Eigen::MatrixXd neweyWestCov(const Design& d, const OlsFit& fit, int lag) {
  if (lag < 0) throw DomainError("hac lag must be >= 0");
  const Eigen::Index n = d.n();
  const Eigen::Index k = d.k();
  // Score series u_t = x_t * e_t.
  Eigen::MatrixXd scores(n, k);
  for (Eigen::Index t = 0; t < n; ++t) scores.row(t) = d.X.row(t) * fit.resid[t];

  Eigen::MatrixXd meat = scores.transpose() * scores;
  for (int j = 1; j <= lag; ++j) {
    if (j >= n) break;
    const double w = 1.0 - double(j) / double(lag + 1);
    Eigen::MatrixXd gamma =
        scores.bottomRows(n - j).transpose() * scores.topRows(n - j);
    meat += w * (gamma + gamma.transpose());
  }
  return fit.xtx_inv * meat * fit.xtx_inv;
}

int EstimateResult::indexOf(const std::string& name) const {
  for (size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return int(i);
  }
  throw SchemaError("estimate has no term '" + name + "'");
}

double EstimateResult::coefOf(const std::string& name) const { return coef[indexOf(name)]; }
double EstimateResult::seOf(const std::string& name) const { return se[indexOf(name)]; }
double EstimateResult::pOf(const std::string& name) const { return p_values[indexOf(name)]; }

EstimateResult makeEstimate(const Design& d, const OlsFit& fit, Eigen::MatrixXd cov,
                            CovKind kind, int hac_lag) {
  EstimateResult r;
  r.names = d.names;
  r.coef = fit.coef;
  r.cov = std::move(cov);
  r.cov_kind = kind;
  r.hac_lag = hac_lag;
  r.n_obs = fit.n;
  r.adj_r2 = fit.adj_r2;
  r.residuals = fit.resid;
  const Eigen::Index k = fit.k;
  r.se.resize(k);
  r.p_values.resize(k);
  r.ci_lo.resize(k);
  r.ci_hi.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double v = r.cov(i, i);
    r.se[i] = v > 0.0 ? std::sqrt(v) : 0.0;
    const double z = r.se[i] > 0.0 ? r.coef[i] / r.se[i]
                                   : (r.coef[i] == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    r.p_values[i] = r.se[i] > 0.0 ? 2.0 * (1.0 - normalCdf(std::abs(z)))
                                  : (r.coef[i] == 0.0 ? 1.0 : 0.0);
    r.ci_lo[i] = r.coef[i] - 1.96 * r.se[i];
    r.ci_hi[i] = r.coef[i] + 1.96 * r.se[i];
  }
  return r;
}

}  // namespace feekit
