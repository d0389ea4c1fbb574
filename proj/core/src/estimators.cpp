#include "feekit/estimators.hpp"

#include <cmath>
#include <limits>

#include "feekit/errors.hpp"
#include "feekit/inference.hpp"
#include "feekit/stats.hpp"

namespace feekit {

namespace {

Eigen::MatrixXd hstack(const Eigen::VectorXd& a, const Eigen::MatrixXd& rest) {
  Eigen::MatrixXd out(a.size(), 1 + rest.cols());
  out.col(0) = a;
  if (rest.cols() > 0) out.rightCols(rest.cols()) = rest;
  return out;
}

Eigen::VectorXd positionalDiff(const Eigen::VectorXd& x) {
  Eigen::VectorXd d(x.size() - 1);
  for (Eigen::Index t = 1; t < x.size(); ++t) d[t - 1] = x[t] - x[t - 1];
  return d;
}

}  // namespace

EstimateResult olsHac(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                      const std::vector<std::string>& names, int hac_lag) {
  if (hac_lag < 0) throw DomainError("olsHac: hac_lag must be >= 0");
  Design d = withIntercept(y, X, names);
  OlsFit f = olsFit(d);
  return makeEstimate(d, f, neweyWestCov(d, f, hac_lag), CovKind::kHacBartlett, hac_lag);
}

EstimateResult praisWinsten(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                            const std::vector<std::string>& names,
                            std::optional<double> fixed_rho) {
  Design d = withIntercept(y, X, names);
  OlsFit f = olsFit(d);

  double rho = 0.0;
  int iterations = 0;
  Eigen::VectorXd coef = f.coef;
  Eigen::VectorXd resid = f.resid;
  Design td;  // transformed design of the final pass
  td = d;
  OlsFit tf = f;

  const auto estimateRho = [](const Eigen::VectorXd& e) {
    double num = 0.0, den = 0.0;
    for (Eigen::Index t = 1; t < e.size(); ++t) {
      num += e[t] * e[t - 1];
      den += e[t - 1] * e[t - 1];
    }
    return den > 0.0 ? num / den : 0.0;
  };

  const auto transform = [&](double r) {
    Design out;
    const double scale = std::sqrt(1.0 - r * r);
    const Eigen::Index n = d.n();
    out.y.resize(n);
    out.X.resize(n, d.k());
    out.names = d.names;
    out.y[0] = scale * d.y[0];
    out.X.row(0) = scale * d.X.row(0);
    for (Eigen::Index t = 1; t < n; ++t) {
      out.y[t] = d.y[t] - r * d.y[t - 1];
      out.X.row(t) = d.X.row(t) - r * d.X.row(t - 1);
    }
    return out;
  };

  if (fixed_rho.has_value()) {
    rho = *fixed_rho;
    if (std::abs(rho) >= 0.999) {
      throw EstimationError("prais-winsten: |rho| >= 0.999 is near a unit root; use the ECM");
    }
    td = transform(rho);
    tf = olsFit(td);
  } else {
    for (iterations = 1; iterations <= 50; ++iterations) {
      const double next = estimateRho(resid);
      if (std::abs(next) >= 0.999) {
        throw EstimationError("prais-winsten: |rho| >= 0.999 is near a unit root; use the ECM");
      }
      td = transform(next);
      tf = olsFit(td);
      coef = tf.coef;
      resid = d.y - d.X * coef;  // residuals in the original space
      const double delta = std::abs(next - rho);
      rho = next;
      if (delta < 1e-6) break;
    }
  }

  EstimateResult r = makeEstimate(td, tf, classicalCov(td, tf), CovKind::kFglsAr1, 0);
  r.residuals = d.y - d.X * tf.coef;
  r.rho_hat = rho;
  r.pw_iterations = iterations;
  return r;
}

EcmResult ecmFit(const Eigen::VectorXd& y, const Eigen::VectorXd& a,
                 const Eigen::MatrixXd& controls, const std::vector<std::string>& control_names,
                 const EcmOptions& options) {
  if (y.size() != a.size() || (controls.cols() > 0 && controls.rows() != y.size())) {
    throw AlignmentError("ecm: misaligned inputs");
  }

  std::vector<std::string> level_names = {"a"};
  for (const auto& n : control_names) level_names.push_back(n);
  Eigen::MatrixXd level_X = hstack(a, controls);

  EcmResult result;
  result.gate = engleGranger(y, level_X, level_names);
  result.gate_passed = result.gate.test.p_value <= options.gate_alpha;
  if (!result.gate_passed) {
    const std::string msg = "engle-granger p=" + std::to_string(result.gate.test.p_value) +
                            " exceeds gate alpha=" + std::to_string(options.gate_alpha);
    if (options.gate_warn_only) {
      result.gate_warning = msg;
    } else {
      throw EstimationError("ecm: no-cointegration gate failed (" + msg +
                            "); rerun with warn-only gate to force");
    }
  }

  // (i) long-run levels fit.
  result.levels_stage = olsHac(y, level_X, level_names, options.hac_lag);
  result.ect = result.levels_stage.residuals;

  // (ii)+(iii) differenced regression on ECT_{t-1}, da, dcontrols.
  const Eigen::Index n = y.size() - 1;
  Eigen::VectorXd dy = positionalDiff(y);
  Eigen::VectorXd da = positionalDiff(a);
  Eigen::MatrixXd X(n, 2 + controls.cols());
  std::vector<std::string> names = {"ect.lag1", "d.a"};
  for (Eigen::Index t = 0; t < n; ++t) {
    X(t, 0) = result.ect[t];  // residual at t is the lagged ECT for dy at t+1
    X(t, 1) = da[t];
  }
  for (Eigen::Index c = 0; c < controls.cols(); ++c) {
    Eigen::VectorXd dc = positionalDiff(controls.col(c));
    X.col(2 + c) = dc;
    names.push_back("d." + control_names[size_t(c)]);
  }
  result.diff_stage = olsHac(dy, X, names, options.hac_lag);

  result.phi = result.diff_stage.coefOf("ect.lag1");
  result.phi_se = result.diff_stage.seOf("ect.lag1");
  result.psi = result.diff_stage.coefOf("d.a");
  result.psi_se = result.diff_stage.seOf("d.a");

  if (result.phi >= 0.0) {
    result.non_reverting = true;
    result.half_life_days = std::numeric_limits<double>::infinity();
  } else if (result.phi <= -1.0) {
    result.oscillatory = true;
    result.half_life_days = std::numeric_limits<double>::quiet_NaN();
  } else {
    result.half_life_days = halfLife(result.phi);
  }
  return result;
}

KoyckResult koyckFit(const Eigen::VectorXd& y, const Eigen::VectorXd& a,
                     const Eigen::MatrixXd& controls, const std::vector<std::string>& control_names,
                     int hac_lag) {
  if (y.size() != a.size()) throw AlignmentError("koyck: misaligned inputs");
  const Eigen::Index n = y.size() - 1;
  Eigen::MatrixXd X(n, 2 + controls.cols());
  std::vector<std::string> names = {"y.lag1", "a"};
  Eigen::VectorXd yy(n);
  for (Eigen::Index t = 1; t < y.size(); ++t) {
    yy[t - 1] = y[t];
    X(t - 1, 0) = y[t - 1];
    X(t - 1, 1) = a[t];
  }
  for (Eigen::Index c = 0; c < controls.cols(); ++c) {
    X.col(2 + c) = controls.col(c).segment(1, n);
    names.push_back(control_names[size_t(c)]);
  }

  KoyckResult r;
  r.fit = olsHac(yy, X, names, hac_lag);
  r.rho = r.fit.coefOf("y.lag1");
  r.beta0 = r.fit.coefOf("a");
  if (std::abs(r.rho) >= 1.0) {
    r.divergent = true;
    r.long_run_multiplier = std::numeric_limits<double>::quiet_NaN();
    r.long_run_se = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  r.long_run_multiplier = r.beta0 / (1.0 - r.rho);
  // Delta method over (beta0, rho).
  const int ib = r.fit.indexOf("a");
  const int ir = r.fit.indexOf("y.lag1");
  const double g_b = 1.0 / (1.0 - r.rho);
  const double g_r = r.beta0 / ((1.0 - r.rho) * (1.0 - r.rho));
  const double var = g_b * g_b * r.fit.cov(ib, ib) + g_r * g_r * r.fit.cov(ir, ir) +
                     2.0 * g_b * g_r * r.fit.cov(ib, ir);
  r.long_run_se = var > 0.0 ? std::sqrt(var) : 0.0;
  return r;
}

IrfResult localProjections(const Eigen::VectorXd& dy, const Eigen::VectorXd& da,
                           const Eigen::MatrixXd& dcontrols,
                           const std::vector<std::string>& control_names,
                           const LocalProjectionOptions& options) {
  const Eigen::Index T = dy.size();
  const int H = options.max_horizon;
  if (H < 0) throw DomainError("local projections: horizon must be >= 0");
  if (T <= H + 30) throw DomainError("local projections: sample too short for horizon");
  if (da.size() != T || (dcontrols.cols() > 0 && dcontrols.rows() != T)) {
    throw AlignmentError("local projections: misaligned inputs");
  }

  IrfResult irf;
  irf.beta_h.resize(H + 1);
  irf.se_h.resize(H + 1);
  irf.band_lo.resize(H + 1);
  irf.band_hi.resize(H + 1);
  irf.cumulative_pct_10pp.resize(H + 1);

  std::vector<std::string> names = {"d.a"};
  for (const auto& n : control_names) names.push_back("d." + n);

  double cum = 0.0;
  for (int h = 0; h <= H; ++h) {
    const Eigen::Index n = T - h;
    Eigen::VectorXd lead(n);
    Eigen::MatrixXd X(n, 1 + dcontrols.cols());
    for (Eigen::Index t = 0; t < n; ++t) {
      lead[t] = dy[t + h];
      X(t, 0) = da[t];
      for (Eigen::Index c = 0; c < dcontrols.cols(); ++c) X(t, 1 + c) = dcontrols(t, c);
    }
    const int lag = options.grow_lag_with_horizon ? options.hac_lag + h : options.hac_lag;
    EstimateResult fit = olsHac(lead, X, names, lag);
    irf.horizons.push_back(h);
    irf.beta_h[h] = fit.coefOf("d.a");
    irf.se_h[h] = fit.seOf("d.a");
    irf.band_lo[h] = irf.beta_h[h] - 1.96 * irf.se_h[h];
    irf.band_hi[h] = irf.beta_h[h] + 1.96 * irf.se_h[h];
    cum += irf.beta_h[h];
    irf.cumulative_pct_10pp[h] = 100.0 * (std::exp(0.10 * cum) - 1.0);
  }
  return irf;
}

std::vector<RegimeEstimate> regimeSplit(
    const Eigen::VectorXd& y, const Eigen::VectorXd& a, const Eigen::MatrixXd& controls,
    const std::vector<std::string>& control_names,
    const std::vector<std::pair<std::string, Eigen::VectorXd>>& regimes, int hac_lag,
    Eigen::Index row_floor) {
  std::vector<RegimeEstimate> out;
  for (const auto& [regime_name, flag] : regimes) {
    if (flag.size() != y.size()) throw AlignmentError("regime flag misaligned");
    std::vector<Eigen::Index> rows;
    for (Eigen::Index t = 0; t < flag.size(); ++t) {
      if (flag[t] == 1.0) rows.push_back(t);
    }
    RegimeEstimate est;
    est.regime = regime_name;
    est.n_obs = Eigen::Index(rows.size());
    if (est.n_obs < row_floor) {
      est.skipped = true;
      est.warning = "regime '" + regime_name + "' has " + std::to_string(rows.size()) +
                    " rows, below the floor of " + std::to_string(row_floor);
      out.push_back(std::move(est));
      continue;
    }
    Eigen::VectorXd ys(est.n_obs), as(est.n_obs);
    Eigen::MatrixXd cs(est.n_obs, controls.cols());
    for (Eigen::Index i = 0; i < est.n_obs; ++i) {
      ys[i] = y[rows[size_t(i)]];
      as[i] = a[rows[size_t(i)]];
      for (Eigen::Index c = 0; c < controls.cols(); ++c) cs(i, c) = controls(rows[size_t(i)], c);
    }
    // Drop controls constant within the subset (they alias the intercept).
    std::vector<Eigen::Index> keep;
    for (Eigen::Index c = 0; c < cs.cols(); ++c) {
      if (sampleSd(cs.col(c)) > 0.0) {
        keep.push_back(c);
      } else {
        est.dropped_controls.push_back(control_names[size_t(c)]);
      }
    }
    Eigen::MatrixXd ck(est.n_obs, Eigen::Index(keep.size()));
    std::vector<std::string> names = {"a"};
    for (size_t i = 0; i < keep.size(); ++i) {
      ck.col(Eigen::Index(i)) = cs.col(keep[i]);
      names.push_back(control_names[size_t(keep[i])]);
    }
    est.fit = olsHac(ys, hstack(as, ck), names, hac_lag);
    est.semi_elasticity_10pp = semiElasticity10pp(est.fit.coefOf("a"));
    out.push_back(std::move(est));
  }
  return out;
}

PiecewiseResult piecewiseFit(const Eigen::VectorXd& y, const Eigen::VectorXd& a,
                             const Eigen::MatrixXd& controls,
                             const std::vector<std::string>& control_names, double knot,
                             int hac_lag) {
  const double amin = a.minCoeff();
  const bool any_below = (a.array() < knot).any();
  if (!any_below) {
    // No observation sits below the knot: the lower segment has no support
    // and the two basis columns collapse into each other.
    throw DomainError("piecewise: knot " + std::to_string(knot) +
                      " at or below the observed treatment support (min " +
                      std::to_string(amin) + ")");
  }

  Eigen::VectorXd hinge = (a.array() - knot).cwiseMax(0.0);
  const bool any_above = hinge.maxCoeff() > 0.0;

  PiecewiseResult r;
  r.knot = knot;
  if (!any_above) {
    // All data at or below the knot: the hinge column is identically zero.
    std::vector<std::string> names = {"a"};
    for (const auto& n : control_names) names.push_back(n);
    r.fit = olsHac(y, hstack(a, controls), names, hac_lag);
    r.below_slope = r.fit.coefOf("a");
    r.below_se = r.fit.seOf("a");
    r.above_slope = 0.0;
    r.above_se = std::numeric_limits<double>::quiet_NaN();
    r.above_undefined = true;
    return r;
  }

  Eigen::MatrixXd X(a.size(), 2 + controls.cols());
  X.col(0) = a;
  X.col(1) = hinge;
  if (controls.cols() > 0) X.rightCols(controls.cols()) = controls;
  std::vector<std::string> names = {"a", "a.hinge"};
  for (const auto& n : control_names) names.push_back(n);
  r.fit = olsHac(y, X, names, hac_lag);

  const int ia = r.fit.indexOf("a");
  const int ih = r.fit.indexOf("a.hinge");
  r.below_slope = r.fit.coef[ia];
  r.below_se = r.fit.se[ia];
  r.above_slope = r.fit.coef[ia] + r.fit.coef[ih];
  const double var =
      r.fit.cov(ia, ia) + r.fit.cov(ih, ih) + 2.0 * r.fit.cov(ia, ih);
  r.above_se = var > 0.0 ? std::sqrt(var) : 0.0;
  return r;
}

}  // namespace feekit
