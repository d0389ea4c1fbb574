#include "feekit/ssm.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "feekit/errors.hpp"
#include "feekit/stats.hpp"

namespace feekit {

namespace {

struct ModelDims {
  bool local_trend;
  Eigen::Index k;  // regressors
  Eigen::Index m() const { return 1 + (local_trend ? 1 : 0) + k; }
};

Eigen::MatrixXd transitionMatrix(const ModelDims& dims) {
  Eigen::MatrixXd T = Eigen::MatrixXd::Identity(dims.m(), dims.m());
  if (dims.local_trend) T(0, 1) = 1.0;  // level_{t+1} = level_t + slope_t
  return T;
}

Eigen::MatrixXd stateNoiseCov(const ModelDims& dims, double var_level, double var_slope) {
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(dims.m(), dims.m());
  Q(0, 0) = var_level;
  if (dims.local_trend) Q(1, 1) = var_slope;
  return Q;
}

Eigen::RowVectorXd obsRow(const ModelDims& dims, const Eigen::MatrixXd& X, Eigen::Index t) {
  Eigen::RowVectorXd z = Eigen::RowVectorXd::Zero(dims.m());
  z(0) = 1.0;
  const Eigen::Index off = 1 + (dims.local_trend ? 1 : 0);
  for (Eigen::Index j = 0; j < dims.k; ++j) z(off + j) = X(t, j);
  return z;
}

struct FilterPass {
  double loglik = 0.0;
  Eigen::MatrixXd a_pred;                      // n x m
  std::vector<Eigen::MatrixXd> P_pred;
  Eigen::MatrixXd a_filt;
  Eigen::VectorXd v;
  Eigen::VectorXd F;
  std::vector<Eigen::VectorXd> K;              // predictive gain T P Z'/F
};

FilterPass kalmanFilter(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                        const ModelDims& dims, double var_obs, double var_level,
                        double var_slope, const Eigen::VectorXd& a0,
                        const Eigen::MatrixXd& P0) {
  const Eigen::Index n = y.size();
  const Eigen::Index m = dims.m();
  const Eigen::MatrixXd T = transitionMatrix(dims);
  const Eigen::MatrixXd Q = stateNoiseCov(dims, var_level, var_slope);

  FilterPass out;
  out.a_pred.resize(n, m);
  out.P_pred.resize(size_t(n));
  out.a_filt.resize(n, m);
  out.v.resize(n);
  out.F.resize(n);
  out.K.resize(size_t(n));

  Eigen::VectorXd a = a0;
  Eigen::MatrixXd P = P0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const Eigen::RowVectorXd Z = obsRow(dims, X, t);
    out.a_pred.row(t) = a.transpose();
    out.P_pred[size_t(t)] = P;

    const double v = y[t] - Z.dot(a);
    const Eigen::VectorXd PZt = P * Z.transpose();
    const double F = Z.dot(PZt) + var_obs;
    if (!(F > 0.0) || !std::isfinite(F)) {
      throw EstimationError("kalman filter: nonpositive innovation variance");
    }
    out.v[t] = v;
    out.F[t] = F;
    out.loglik += -0.5 * (std::log(2.0 * M_PI) + std::log(F) + v * v / F);

    const Eigen::VectorXd a_filt = a + PZt * (v / F);
    const Eigen::MatrixXd P_filt = P - PZt * PZt.transpose() / F;
    out.a_filt.row(t) = a_filt.transpose();

    const Eigen::VectorXd K = T * PZt / F;
    out.K[size_t(t)] = K;
    a = T * a_filt;
    P = T * P_filt * T.transpose() + Q;
    P = 0.5 * (P + P.transpose());  // enforce symmetry
  }
  return out;
}

void smoother(const Eigen::MatrixXd& X, const ModelDims& dims, const FilterPass& f,
              Eigen::MatrixXd* smoothed_mean, std::vector<Eigen::MatrixXd>* smoothed_cov) {
  const Eigen::Index n = f.v.size();
  const Eigen::Index m = dims.m();
  const Eigen::MatrixXd T = transitionMatrix(dims);

  smoothed_mean->resize(n, m);
  smoothed_cov->resize(size_t(n));
  Eigen::VectorXd r = Eigen::VectorXd::Zero(m);
  Eigen::MatrixXd N = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index t = n - 1; t >= 0; --t) {
    const Eigen::RowVectorXd Z = obsRow(dims, X, t);
    const Eigen::MatrixXd L = T - f.K[size_t(t)] * Z;
    const Eigen::VectorXd r_prev = Z.transpose() * (f.v[t] / f.F[t]) + L.transpose() * r;
    const Eigen::MatrixXd N_prev =
        Z.transpose() * Z / f.F[t] + L.transpose() * N * L;
    const Eigen::MatrixXd& P = f.P_pred[size_t(t)];
    smoothed_mean->row(t) = (f.a_pred.row(t).transpose() + P * r_prev).transpose();
    Eigen::MatrixXd V = P - P * N_prev * P;
    (*smoothed_cov)[size_t(t)] = 0.5 * (V + V.transpose());
    r = r_prev;
    N = N_prev;
  }
}

// Projected-gradient BFGS over box-clamped log-variances.
struct OptimResult {
  Eigen::VectorXd theta;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string trace;
};

OptimResult minimizeBfgs(const std::function<double(const Eigen::VectorXd&)>& f,
                         Eigen::VectorXd theta, double lo, double hi, int max_iter) {
  const auto clamp = [&](Eigen::VectorXd t) {
    for (Eigen::Index i = 0; i < t.size(); ++i) t[i] = std::min(hi, std::max(lo, t[i]));
    return t;
  };
  const auto numgrad = [&](const Eigen::VectorXd& t, double ft) {
    Eigen::VectorXd g(t.size());
    const double h = 1e-5;
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      Eigen::VectorXd tp = t, tm = t;
      tp[i] += h;
      tm[i] -= h;
      if (tp[i] <= hi && tm[i] >= lo) {
        g[i] = (f(tp) - f(tm)) / (2.0 * h);
      } else if (tp[i] <= hi) {
        g[i] = (f(tp) - ft) / h;
      } else {
        g[i] = (ft - f(tm)) / h;
      }
    }
    return g;
  };
  const auto projectedNorm = [&](const Eigen::VectorXd& t, const Eigen::VectorXd& g) {
    double norm = 0.0;
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      double gi = g[i];
      if ((t[i] <= lo + 1e-12 && gi > 0.0) || (t[i] >= hi - 1e-12 && gi < 0.0)) gi = 0.0;
      norm = std::max(norm, std::abs(gi));
    }
    return norm;
  };

  OptimResult res;
  theta = clamp(theta);
  double fval = f(theta);
  Eigen::VectorXd g = numgrad(theta, fval);
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(theta.size(), theta.size());
  std::ostringstream trace;
  int it = 0;
  for (; it < max_iter; ++it) {
    if (projectedNorm(theta, g) < 1e-6) {
      res.converged = true;
      break;
    }
    Eigen::VectorXd dir = -(H * g);
    if (dir.dot(g) >= 0.0) dir = -g;  // fall back to steepest descent

    double step = 1.0;
    double fnew = fval;
    Eigen::VectorXd tnew = theta;
    bool improved = false;
    for (int ls = 0; ls < 50; ++ls) {
      tnew = clamp(theta + step * dir);
      fnew = f(tnew);
      if (fnew <= fval + 1e-4 * g.dot(tnew - theta)) {
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved || !(fnew < fval + 1e-15)) {
      // No further progress along any tried step.
      res.converged = projectedNorm(theta, g) < 1e-3;
      break;
    }
    Eigen::VectorXd gnew = numgrad(tnew, fnew);
    const Eigen::VectorXd s = tnew - theta;
    const Eigen::VectorXd dg = gnew - g;
    const double sy = s.dot(dg);
    if (sy > 1e-12) {
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(theta.size(), theta.size());
      const Eigen::MatrixXd V = I - s * dg.transpose() / sy;
      H = V * H * V.transpose() + s * s.transpose() / sy;
    }
    const double delta = fval - fnew;
    theta = tnew;
    fval = fnew;
    g = gnew;
    trace << "iter " << it << ": f=" << fval << "\n";
    if (delta < 1e-10 && projectedNorm(theta, g) < 1e-4) {
      res.converged = true;
      ++it;
      break;
    }
  }
  res.theta = theta;
  res.value = fval;
  res.iterations = it;
  res.trace = trace.str();
  return res;
}

}  // namespace

Eigen::VectorXd StateSpaceFit::beta() const {
  const Eigen::Index k = regressors.cols();
  return smoothed_mean.row(smoothed_mean.rows() - 1).segment(betaOffset(), k).transpose();
}

Eigen::MatrixXd StateSpaceFit::betaCov() const {
  const Eigen::Index k = regressors.cols();
  return smoothed_cov.back().block(betaOffset(), betaOffset(), k, k);
}

Eigen::VectorXd StateSpaceFit::smoothedSignal() const {
  const Eigen::Index n = y.size();
  ModelDims dims{local_trend, regressors.cols()};
  Eigen::VectorXd out(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    out[t] = obsRow(dims, regressors, t).dot(smoothed_mean.row(t));
  }
  return out;
}

double StateSpaceFit::levelGain(Eigen::Index t) const {
  const Eigen::MatrixXd& P = predicted_cov[size_t(t)];
  ModelDims dims{local_trend, regressors.cols()};
  const Eigen::RowVectorXd Z = obsRow(dims, regressors, t);
  const double F = innovation_var[t];
  return (P * Z.transpose())(0) / F;
}

StateSpaceFit fitStateSpace(const Eigen::VectorXd& y, const Eigen::MatrixXd& regressors,
                            const std::vector<std::string>& regressor_names,
                            const StateSpaceOptions& options) {
  const Eigen::Index n = y.size();
  const Eigen::Index k = regressors.cols();
  if (k > 0 && regressors.rows() != n) throw AlignmentError("state space: misaligned regressors");
  if (size_t(k) != regressor_names.size()) {
    throw AlignmentError("state space: regressor names mismatch");
  }
  for (Eigen::Index t = 0; t < n; ++t) {
    if (std::isnan(y[t])) throw DomainError("state space: missing observation in window");
  }
  if (!options.fixed_logvar && n < 90) {
    throw DomainError("state space: need >= 90 observations for estimation");
  }

  ModelDims dims{options.local_trend, k};
  const Eigen::Index m = dims.m();

  const double y_var = std::max(sampleSd(y) * sampleSd(y), 1e-8);
  Eigen::VectorXd a0 = Eigen::VectorXd::Zero(m);
  a0[0] = y[0];
  Eigen::MatrixXd P0 = options.diffuse_scale * y_var * Eigen::MatrixXd::Identity(m, m);
  if (options.initial_mean) a0 = *options.initial_mean;
  if (options.initial_cov) P0 = *options.initial_cov;
  if (a0.size() != m || P0.rows() != m || P0.cols() != m) {
    throw AlignmentError("state space: initial moments have wrong dimension");
  }

  const auto negLoglik = [&](const Eigen::VectorXd& theta) {
    const double vo = std::exp(theta[0]);
    const double vl = std::exp(theta[1]);
    const double vs = dims.local_trend ? std::exp(theta[2]) : 0.0;
    FilterPass f = kalmanFilter(y, regressors, dims, vo, vl, vs, a0, P0);
    return -f.loglik / double(n);
  };

  double vo, vl, vs;
  int iterations = 0;
  if (options.fixed_logvar) {
    vo = std::exp((*options.fixed_logvar)[0]);
    vl = std::exp((*options.fixed_logvar)[1]);
    vs = dims.local_trend ? std::exp((*options.fixed_logvar)[2]) : 0.0;
  } else {
    const Eigen::Index p = dims.local_trend ? 3 : 2;
    Eigen::VectorXd theta0(p);
    theta0[0] = std::log(0.5 * y_var);
    theta0[1] = std::log(0.05 * y_var);
    if (dims.local_trend) theta0[2] = std::log(0.005 * y_var);
    OptimResult opt = minimizeBfgs(negLoglik, theta0, -34.0, 12.0, options.max_iterations);
    if (!opt.converged) {
      throw EstimationError("state space: optimizer failed to converge after " +
                            std::to_string(opt.iterations) + " iterations\n" + opt.trace);
    }
    vo = std::exp(opt.theta[0]);
    vl = std::exp(opt.theta[1]);
    vs = dims.local_trend ? std::exp(opt.theta[2]) : 0.0;
    iterations = opt.iterations;
  }

  FilterPass f = kalmanFilter(y, regressors, dims, vo, vl, vs, a0, P0);
  StateSpaceFit fit;
  fit.local_trend = dims.local_trend;
  fit.y = y;
  fit.regressors = regressors;
  fit.regressor_names = regressor_names;
  fit.var_obs = vo;
  fit.var_level = vl;
  fit.var_slope = vs;
  fit.loglik = f.loglik;
  fit.iterations = iterations;
  fit.predicted_mean = f.a_pred;
  fit.predicted_cov = f.P_pred;
  fit.filtered_mean = f.a_filt;
  fit.innovation = f.v;
  fit.innovation_var = f.F;
  smoother(regressors, dims, f, &fit.smoothed_mean, &fit.smoothed_cov);
  return fit;
}

double bruteForceLogLik(const Eigen::VectorXd& y, const Eigen::MatrixXd& regressors,
                        bool local_trend, double var_obs, double var_level, double var_slope,
                        const Eigen::VectorXd& initial_mean, const Eigen::MatrixXd& initial_cov) {
  const Eigen::Index n = y.size();
  ModelDims dims{local_trend, regressors.cols()};
  const Eigen::Index m = dims.m();
  const Eigen::MatrixXd T = transitionMatrix(dims);
  const Eigen::MatrixXd Q = stateNoiseCov(dims, var_level, var_slope);

  // Stack the state recursion: alpha_t = T^{t} alpha_0-ish; build mean and
  // covariance of (y_1..y_n) directly.
  std::vector<Eigen::MatrixXd> powers(static_cast<size_t>(n));  // T^t
  powers[0] = Eigen::MatrixXd::Identity(m, m);
  for (Eigen::Index t = 1; t < n; ++t) powers[size_t(t)] = T * powers[size_t(t - 1)];

  // alpha_t = powers[t] * alpha_0 + sum_{s<t} powers[t-1-s] * eta_s.
  Eigen::VectorXd mean(n);
  Eigen::MatrixXd cov(n, n);
  std::vector<Eigen::RowVectorXd> Zrows(static_cast<size_t>(n));
  for (Eigen::Index t = 0; t < n; ++t) Zrows[size_t(t)] = obsRow(dims, regressors, t);

  for (Eigen::Index t = 0; t < n; ++t) {
    mean[t] = Zrows[size_t(t)].dot(powers[size_t(t)] * initial_mean);
  }
  for (Eigen::Index t = 0; t < n; ++t) {
    for (Eigen::Index s = 0; s <= t; ++s) {
      // Cov(alpha_t, alpha_s) = T^t P0 (T^s)' + sum_{u < min(s,t)} T^{t-1-u} Q (T^{s-1-u})'.
      Eigen::MatrixXd c = powers[size_t(t)] * initial_cov * powers[size_t(s)].transpose();
      for (Eigen::Index u = 0; u < s; ++u) {
        c += powers[size_t(t - 1 - u)] * Q * powers[size_t(s - 1 - u)].transpose();
      }
      double val = Zrows[size_t(t)] * c * Zrows[size_t(s)].transpose();
      if (t == s) val += var_obs;
      cov(t, s) = val;
      cov(s, t) = val;
    }
  }

  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw EstimationError("brute-force likelihood: covariance not positive definite");
  }
  const Eigen::VectorXd diff = y - mean;
  const Eigen::VectorXd solved = llt.solve(diff);
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
  return -0.5 * (double(n) * std::log(2.0 * M_PI) + logdet + diff.dot(solved));
}

CounterfactualPath counterfactualPath(const StateSpaceFit& fit, const std::string& regressor,
                                      double a_fixed) {
  Eigen::Index col = -1;
  for (size_t i = 0; i < fit.regressor_names.size(); ++i) {
    if (fit.regressor_names[i] == regressor) col = Eigen::Index(i);
  }
  if (col < 0) throw SchemaError("counterfactual: model has no regressor '" + regressor + "'");
  const double amin = fit.regressors.col(col).minCoeff();
  const double amax = fit.regressors.col(col).maxCoeff();
  if (a_fixed < amin || a_fixed > amax) {
    throw ExtrapolationError("counterfactual: fixed value " + std::to_string(a_fixed) +
                             " outside observed support [" + std::to_string(amin) + ", " +
                             std::to_string(amax) + "]");
  }

  const Eigen::Index n = fit.y.size();
  ModelDims dims{fit.local_trend, fit.regressors.cols()};
  CounterfactualPath out;
  out.a_fixed = a_fixed;
  out.observed_signal.resize(n);
  out.path.resize(n);
  out.band_lo.resize(n);
  out.band_hi.resize(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const Eigen::RowVectorXd Z = obsRow(dims, fit.regressors, t);
    Eigen::RowVectorXd Zcf = Z;
    Zcf(fit.betaOffset() + col) = a_fixed;
    out.observed_signal[t] = Z.dot(fit.smoothed_mean.row(t));
    out.path[t] = Zcf.dot(fit.smoothed_mean.row(t));
    const double var = Zcf * fit.smoothed_cov[size_t(t)] * Zcf.transpose();
    const double sd = var > 0.0 ? std::sqrt(var) : 0.0;
    out.band_lo[t] = out.path[t] - 1.96 * sd;
    out.band_hi[t] = out.path[t] + 1.96 * sd;
  }
  return out;
}

WelfareResult welfareUsd(const Eigen::VectorXd& bf_obs, const Eigen::VectorXd& bf_cf,
                         const Eigen::VectorXd& tip, const Eigen::VectorXd& gas,
                         const Eigen::VectorXd& price, bool include_tip,
                         const Eigen::VectorXd* bf_cf_lo, const Eigen::VectorXd* bf_cf_hi) {
  const Eigen::Index n = bf_obs.size();
  if (bf_cf.size() != n || tip.size() != n || gas.size() != n || price.size() != n) {
    throw AlignmentError("welfare: series length mismatch");
  }
  if ((bf_cf_lo == nullptr) != (bf_cf_hi == nullptr)) {
    throw AlignmentError("welfare: counterfactual bands must come in pairs");
  }
  if (bf_cf_lo && (bf_cf_lo->size() != n || bf_cf_hi->size() != n)) {
    throw AlignmentError("welfare: band length mismatch");
  }
  for (Eigen::Index t = 0; t < n; ++t) {
    if (gas[t] < 0.0 || price[t] < 0.0) throw DomainError("welfare: gas and price must be >= 0");
  }

  WelfareResult r;
  r.usd_daily.resize(n);
  const double tip_flag = include_tip ? 1.0 : 0.0;
  for (Eigen::Index t = 0; t < n; ++t) {
    r.usd_daily[t] = (bf_obs[t] - bf_cf[t] + tip_flag * tip[t]) * gas[t] * 1e-9 * price[t];
  }
  r.usd_total = r.usd_daily.sum();
  if (bf_cf_lo) {
    r.has_band = true;
    r.usd_daily_lo.resize(n);
    r.usd_daily_hi.resize(n);
    for (Eigen::Index t = 0; t < n; ++t) {
      // A lower counterfactual fee means smaller savings: hi band of BF_cf
      // maps to the low end of USD savings.
      r.usd_daily_hi[t] =
          (bf_obs[t] - (*bf_cf_lo)[t] + tip_flag * tip[t]) * gas[t] * 1e-9 * price[t];
      r.usd_daily_lo[t] =
          (bf_obs[t] - (*bf_cf_hi)[t] + tip_flag * tip[t]) * gas[t] * 1e-9 * price[t];
    }
    r.usd_total_lo = r.usd_daily_lo.sum();
    r.usd_total_hi = r.usd_daily_hi.sum();
  }
  return r;
}

}  // namespace feekit
