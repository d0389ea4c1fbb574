#include "feekit/iv.hpp"

#include <cmath>

#include "feekit/errors.hpp"
#include "feekit/estimators.hpp"
#include "feekit/linreg.hpp"
#include "feekit/stats.hpp"

namespace feekit {

Eigen::VectorXd buildShiftShare(
    const std::map<std::string, double>& weights,
    const std::vector<std::pair<std::string, Eigen::VectorXd>>& shocks) {
  if (shocks.empty()) throw SchemaError("shift-share: no shock series supplied");
  double wsum = 0.0;
  for (const auto& [chain, w] : weights) {
    if (w < 0.0) throw DomainError("shift-share: negative weight for chain '" + chain + "'");
    wsum += w;
  }
  if (wsum > 1.0 + 1e-9) throw DomainError("shift-share: weights sum exceeds 1");

  const Eigen::Index n = shocks.front().second.size();
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  for (const auto& [chain, series] : shocks) {
    auto it = weights.find(chain);
    if (it == weights.end()) {
      throw SchemaError("shift-share: chain '" + chain + "' has no weight entry");
    }
    if (series.size() != n) throw AlignmentError("shift-share: shock series misaligned");
    z += it->second * series;
  }
  return z;
}

namespace {

struct FirstStage {
  EstimateResult fit;
  Eigen::VectorXd a_hat;
  Eigen::VectorXd v_hat;
  double partial_f = 0.0;
  double partial_r2 = 0.0;
};

FirstStage firstStage(const Eigen::VectorXd& a, const Eigen::VectorXd& z,
                      const Eigen::MatrixXd& controls,
                      const std::vector<std::string>& control_names, int hac_lag) {
  if (sampleSd(z) == 0.0) throw NoVariationError("iv: instrument has no variation");

  Eigen::MatrixXd X(a.size(), 1 + controls.cols());
  X.col(0) = z;
  if (controls.cols() > 0) X.rightCols(controls.cols()) = controls;
  std::vector<std::string> names = {"Z"};
  for (const auto& n : control_names) names.push_back(n);

  FirstStage fs;
  fs.fit = olsHac(a, X, names, hac_lag);
  fs.a_hat = a - fs.fit.residuals;
  fs.v_hat = fs.fit.residuals;
  const double t = fs.fit.coefOf("Z") / fs.fit.seOf("Z");
  fs.partial_f = t * t;

  // Partial R^2 of the instrument: RSS drop relative to the controls-only fit.
  Design restricted = withIntercept(a, controls, control_names);
  const double rss_r = olsFit(restricted).resid.squaredNorm();
  const double rss_f = fs.v_hat.squaredNorm();
  fs.partial_r2 = rss_r > 0.0 ? (rss_r - rss_f) / rss_r : 0.0;
  return fs;
}

}  // namespace

IvResult twoSls(const Eigen::VectorXd& y, const Eigen::VectorXd& a, const Eigen::VectorXd& z,
                const Eigen::MatrixXd& controls, const std::vector<std::string>& control_names,
                int hac_lag, const std::string& instrument_name) {
  if (y.size() != a.size() || y.size() != z.size()) throw AlignmentError("iv: misaligned inputs");
  FirstStage fs = firstStage(a, z, controls, control_names, hac_lag);

  // Second stage on the projected treatment.
  Eigen::MatrixXd X2(y.size(), 1 + controls.cols());
  X2.col(0) = fs.a_hat;
  if (controls.cols() > 0) X2.rightCols(controls.cols()) = controls;
  std::vector<std::string> names2 = {"a"};
  for (const auto& n : control_names) names2.push_back(n);
  Design d2 = withIntercept(y, X2, names2);
  OlsFit f2 = olsFit(d2);

  // Structural residuals evaluated at the original treatment.
  Eigen::MatrixXd Xorig = d2.X;
  Xorig.col(1) = a;
  Eigen::VectorXd structural_resid = y - Xorig * f2.coef;
  OlsFit sandwich = f2;
  sandwich.resid = structural_resid;
  Eigen::MatrixXd cov = neweyWestCov(d2, sandwich, hac_lag);
  EstimateResult est = makeEstimate(d2, f2, std::move(cov), CovKind::kHacBartlett, hac_lag);

  IvResult r;
  r.beta = est.coefOf("a");
  r.se = est.seOf("a");
  r.p = est.pOf("a");
  r.first_stage_f = fs.partial_f;
  r.partial_r2 = fs.partial_r2;
  r.instrument_name = instrument_name;
  r.n = y.size();
  return r;
}

ControlFunctionResult controlFunction(const Eigen::VectorXd& y, const Eigen::VectorXd& a,
                                      const Eigen::VectorXd& z, const Eigen::MatrixXd& controls,
                                      const std::vector<std::string>& control_names, int hac_lag,
                                      const std::string& instrument_name) {
  if (y.size() != a.size() || y.size() != z.size()) throw AlignmentError("iv: misaligned inputs");
  FirstStage fs = firstStage(a, z, controls, control_names, hac_lag);

  Eigen::MatrixXd X(y.size(), 2 + controls.cols());
  X.col(0) = a;
  X.col(1) = fs.v_hat;
  if (controls.cols() > 0) X.rightCols(controls.cols()) = controls;
  std::vector<std::string> names = {"a", "v.hat"};
  for (const auto& n : control_names) names.push_back(n);
  EstimateResult est = olsHac(y, X, names, hac_lag);

  ControlFunctionResult r;
  r.iv.beta = est.coefOf("a");
  r.iv.se = est.seOf("a");
  r.iv.p = est.pOf("a");
  r.iv.first_stage_f = fs.partial_f;
  r.iv.partial_r2 = fs.partial_r2;
  r.iv.instrument_name = instrument_name;
  r.iv.n = y.size();
  r.vhat_coef = est.coefOf("v.hat");
  r.vhat_se = est.seOf("v.hat");
  r.vhat_p = est.pOf("v.hat");

  // Algebraic identity with 2SLS in the just-identified linear model.
  IvResult tsls = twoSls(y, a, z, controls, control_names, hac_lag, instrument_name);
  if (std::abs(tsls.beta - r.iv.beta) > 1e-6 * std::max(1.0, std::abs(tsls.beta))) {
    throw EstimationError("control function: point estimate diverged from 2SLS (" +
                          std::to_string(r.iv.beta) + " vs " + std::to_string(tsls.beta) + ")");
  }
  return r;
}

}  // namespace feekit
