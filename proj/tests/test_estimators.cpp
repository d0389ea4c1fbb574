#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "feekit/errors.hpp"
#include "feekit/estimators.hpp"
#include "feekit/inference.hpp"
#include "feekit/rng.hpp"
#include "feekit/stats.hpp"
#include "feekit/synth.hpp"

using namespace feekit;

namespace {

Eigen::MatrixXd noControls(Eigen::Index n) { return Eigen::MatrixXd(n, 0); }

}  // namespace

TEST_CASE("ols_hac: noiseless line recovers coefficients exactly with zero SEs") {
  const Eigen::Index n = 60;
  Eigen::MatrixXd X(n, 1);
  Eigen::VectorXd y(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    X(t, 0) = double(t) / 10.0;
    y[t] = 3.0 + 2.0 * X(t, 0);
  }
  EstimateResult r = olsHac(y, X, {"x"}, 7);
  CHECK(r.coefOf("const") == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(r.coefOf("x") == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(r.seOf("x") < 1e-8);
  CHECK(r.n_obs == n);
}

TEST_CASE("ols_hac: lag 0 equals the White covariance exactly") {
  Rng rng(101);
  const Eigen::Index n = 400;
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    X(t, 0) = rng.normal();
    X(t, 1) = rng.uniform();
    y[t] = 1.0 - 0.5 * X(t, 0) + 0.3 * X(t, 1) + (1.0 + X(t, 1)) * rng.normal();
  }
  Design d = withIntercept(y, X, {"x1", "x2"});
  OlsFit f = olsFit(d);
  Eigen::MatrixXd hac0 = neweyWestCov(d, f, 0);
  // Hand-computed HC0: (X'X)^-1 X' diag(e^2) X (X'X)^-1.
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(d.k(), d.k());
  for (Eigen::Index t = 0; t < n; ++t) {
    meat += f.resid[t] * f.resid[t] * d.X.row(t).transpose() * d.X.row(t);
  }
  Eigen::MatrixXd white = f.xtx_inv * meat * f.xtx_inv;
  CHECK((hac0 - white).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("ols_hac: homoskedastic iid noise gives HAC close to classical SEs") {
  Rng rng(103);
  const Eigen::Index n = 2000;
  Eigen::MatrixXd X(n, 1);
  Eigen::VectorXd y(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    X(t, 0) = rng.normal();
    y[t] = 0.5 + 1.5 * X(t, 0) + rng.normal();
  }
  Design d = withIntercept(y, X, {"x"});
  OlsFit f = olsFit(d);
  const double classical = std::sqrt(classicalCov(d, f)(1, 1));
  EstimateResult r = olsHac(y, X, {"x"}, 0);
  CHECK(r.seOf("x") == doctest::Approx(classical).epsilon(0.10));
}

TEST_CASE("ols_hac: autocorrelated errors inflate HAC SEs over classical") {
  Rng rng(105);
  const Eigen::Index n = 2000;
  Eigen::MatrixXd X(n, 1);
  Eigen::VectorXd y(n);
  double xs = 0.0, e = 0.0;
  for (Eigen::Index t = 0; t < n; ++t) {
    xs = 0.8 * xs + rng.normal();
    e = 0.8 * e + rng.normal();
    X(t, 0) = xs;
    y[t] = 1.0 + 0.5 * X(t, 0) + e;
  }
  Design d = withIntercept(y, X, {"x"});
  OlsFit f = olsFit(d);
  const double classical = std::sqrt(classicalCov(d, f)(1, 1));
  EstimateResult r = olsHac(y, X, {"x"}, 10);
  CHECK(r.seOf("x") / classical > 1.3);
}

TEST_CASE("ols_hac: adding a constant to y moves only the intercept") {
  Rng rng(107);
  const Eigen::Index n = 300;
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    X(t, 0) = rng.normal();
    X(t, 1) = rng.normal();
    y[t] = 0.3 * X(t, 0) - 0.7 * X(t, 1) + rng.normal();
  }
  EstimateResult base = olsHac(y, X, {"x1", "x2"}, 5);
  Eigen::VectorXd shifted = y.array() + 11.5;
  EstimateResult moved = olsHac(shifted, X, {"x1", "x2"}, 5);
  CHECK(moved.coefOf("const") == doctest::Approx(base.coefOf("const") + 11.5).epsilon(1e-10));
  for (const auto& term : {"x1", "x2"}) {
    CHECK(moved.coefOf(term) == doctest::Approx(base.coefOf(term)).epsilon(1e-10));
    CHECK(moved.seOf(term) == doctest::Approx(base.seOf(term)).epsilon(1e-10));
  }
}

TEST_CASE("ols_hac: rank deficiency names the collinear column") {
  const Eigen::Index n = 100;
  Rng rng(109);
  Eigen::MatrixXd X(n, 2);
  for (Eigen::Index t = 0; t < n; ++t) {
    X(t, 0) = rng.normal();
    X(t, 1) = 3.0 * X(t, 0);
  }
  Eigen::VectorXd y = X.col(0);
  CHECK_THROWS_AS(olsHac(y, X, {"x1", "x1_copy"}, 0), RankError);
}

TEST_CASE("prais-winsten: forcing rho=0 reproduces OLS exactly") {
  Rng rng(111);
  const Eigen::Index n = 500;
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    X(t, 0) = rng.normal();
    X(t, 1) = rng.uniform();
    y[t] = 1.0 + 0.5 * X(t, 0) - 0.2 * X(t, 1) + rng.normal();
  }
  EstimateResult pw = praisWinsten(y, X, {"x1", "x2"}, 0.0);
  Design d = withIntercept(y, X, {"x1", "x2"});
  OlsFit ols = olsFit(d);
  for (Eigen::Index i = 0; i < pw.coef.size(); ++i) {
    CHECK(std::abs(pw.coef[i] - ols.coef[i]) < 1e-6);
  }
  CHECK(pw.rho_hat == 0.0);
}

TEST_CASE("prais-winsten: iid errors estimate rho near zero and stay close to OLS") {
  Rng rng(113);
  const Eigen::Index n = 2000;
  Eigen::MatrixXd X(n, 1);
  Eigen::VectorXd y(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    X(t, 0) = rng.normal();
    y[t] = 1.0 + 0.5 * X(t, 0) + rng.normal();
  }
  EstimateResult pw = praisWinsten(y, X, {"x"});
  CHECK(std::abs(pw.rho_hat) < 0.06);
  Design d = withIntercept(y, X, {"x"});
  OlsFit ols = olsFit(d);
  CHECK(pw.coefOf("x") == doctest::Approx(ols.coef[1]).epsilon(0.02));
}

TEST_CASE("prais-winsten: planted AR(1) DGP recovers rho and covers the slope") {
  int covered = 0;
  int rho_in_band = 0;
  const int seeds = 200;
  for (int s = 0; s < seeds; ++s) {
    Rng rng(4000 + std::uint64_t(s));
    const Eigen::Index n = 2000;
    Eigen::MatrixXd X(n, 1);
    Eigen::VectorXd y(n);
    double e = 0.0;
    for (Eigen::Index t = 0; t < n; ++t) {
      X(t, 0) = rng.normal();
      e = 0.7 * e + std::sqrt(1.0 - 0.49) * rng.normal();
      y[t] = 1.0 + 0.5 * X(t, 0) + e;
    }
    EstimateResult pw = praisWinsten(y, X, {"x"});
    if (pw.rho_hat > 0.65 && pw.rho_hat < 0.75) ++rho_in_band;
    const int ix = pw.indexOf("x");
    if (pw.ci_lo[ix] <= 0.5 && 0.5 <= pw.ci_hi[ix]) ++covered;
  }
  CHECK(rho_in_band >= 190);
  // ~95% coverage within a binomial band.
  CHECK(covered >= 182);
  CHECK(covered <= 198);
}

TEST_CASE("prais-winsten: near-unit-root residuals direct the user to the ECM") {
  Rng rng(117);
  const Eigen::Index n = 300;
  Eigen::MatrixXd X(n, 1);
  Eigen::VectorXd y(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    X(t, 0) = rng.normal();
    y[t] = rng.normal();
  }
  CHECK_THROWS_AS(praisWinsten(y, X, {"x"}, 0.9995), EstimationError);
}

TEST_CASE("prais-winsten: synthetic panel with planted levels slope is negative") {
  DgpSpec spec;
  spec.length = 1244;
  spec.beta = -1.19;
  spec.seed = 99;
  DailyPanel panel = generateDgp(spec);
  Eigen::MatrixXd X(panel.rows(), 1);
  X.col(0) = panel.col("a_clean");
  EstimateResult pw = praisWinsten(panel.col("log_basefee"), X, {"a"});
  CHECK(pw.coefOf("a") < 0.0);
  CHECK(semiElasticity10pp(pw.coefOf("a")) < 0.0);
}

TEST_CASE("ecm: half-life identities through the fitted object") {
  CHECK(halfLife(-0.061) == doctest::Approx(11.01).epsilon(0.02));
  CHECK(halfLife(-0.5) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ecm: noiseless recursion is invertible") {
  DgpSpec spec;
  spec.length = 400;
  spec.psi = -1.0;
  spec.phi = -0.06;
  spec.sigma_eps = 0.0;
  spec.sigma_a = 0.02;
  spec.seed = 5;
  DailyPanel panel = generateDgp(spec);
  const Eigen::VectorXd y = panel.col("log_basefee");
  const Eigen::VectorXd a = panel.col("a_clean");
  const Eigen::Index n = y.size() - 1;

  // Oracle: the one-step (unrestricted) form dy_t = c + phi*y_{t-1} +
  // gamma*a_{t-1} + psi*da_t fits the noiseless recursion exactly, so plain
  // OLS inverts it to machine precision.
  Eigen::VectorXd dy(n);
  Eigen::MatrixXd X(n, 3);
  for (Eigen::Index t = 1; t <= n; ++t) {
    dy[t - 1] = y[t] - y[t - 1];
    X(t - 1, 0) = y[t - 1];
    X(t - 1, 1) = a[t - 1];
    X(t - 1, 2) = a[t] - a[t - 1];
  }
  Design d = withIntercept(dy, X, {"y.lag1", "a.lag1", "d.a"});
  OlsFit one_step = olsFit(d);
  CHECK(one_step.coef[1] == doctest::Approx(-0.06).epsilon(1e-9));  // phi
  CHECK(one_step.coef[3] == doctest::Approx(-1.0).epsilon(1e-9));   // psi
  // Implied long-run slope beta = -gamma/phi.
  CHECK(-one_step.coef[2] / one_step.coef[1] == doctest::Approx(spec.beta).epsilon(1e-9));

  // The three-step estimator carries Op(1/T) first-stage slippage even
  // without noise; it matches the planted values at that order.
  EcmOptions opt;
  opt.gate_warn_only = true;
  EcmResult r = ecmFit(y, a, noControls(panel.rows()), {}, opt);
  CHECK(r.psi == doctest::Approx(-1.0).epsilon(5e-3));
  CHECK(r.phi == doctest::Approx(-0.06).epsilon(5e-3));
  CHECK(r.half_life_days == doctest::Approx(halfLife(r.phi)).epsilon(1e-12));
}

TEST_CASE("ecm: planted DGP coverage of psi and phi over 200 seeds") {
  int psi_covered = 0, phi_covered = 0;
  const int seeds = 200;
  for (int s = 0; s < seeds; ++s) {
    DgpSpec spec;
    spec.length = 1200;
    spec.psi = -1.0;
    spec.phi = -0.06;
    spec.seed = 10000 + std::uint64_t(s);
    DailyPanel panel = generateDgp(spec);
    EcmOptions opt;
    opt.gate_warn_only = true;
    EcmResult r = ecmFit(panel.col("log_basefee"), panel.col("a_clean"),
                         noControls(panel.rows()), {}, opt);
    if (r.psi - 1.96 * r.psi_se <= -1.0 && -1.0 <= r.psi + 1.96 * r.psi_se) ++psi_covered;
    if (r.phi - 1.96 * r.phi_se <= -0.06 && -0.06 <= r.phi + 1.96 * r.phi_se) ++phi_covered;
  }
  // Acceptance band [91%, 99%].
  CHECK(psi_covered >= 182);
  CHECK(psi_covered <= 198);
  CHECK(phi_covered >= 182);
  CHECK(phi_covered <= 198);
}

TEST_CASE("ecm: zero-effect DGP keeps the false-rejection rate near size") {
  int rejects = 0;
  const int seeds = 200;
  for (int s = 0; s < seeds; ++s) {
    DgpSpec spec;
    spec.length = 1200;
    spec.psi = 0.0;
    spec.phi = -0.06;
    spec.seed = 30000 + std::uint64_t(s);
    DailyPanel panel = generateDgp(spec);
    EcmOptions opt;
    opt.gate_warn_only = true;
    EcmResult r = ecmFit(panel.col("log_basefee"), panel.col("a_clean"),
                         noControls(panel.rows()), {}, opt);
    if (r.diff_stage.pOf("d.a") <= 0.05) ++rejects;
  }
  CHECK(rejects <= 16);  // ~8% of 200
}

TEST_CASE("ecm: failing gate throws unless warn-only, then warns") {
  // Independent random walks: no cointegration.
  Rng rng(119);
  const Eigen::Index n = 400;
  Eigen::VectorXd y(n), a(n);
  double ya = 0.0, aa = 0.5;
  for (Eigen::Index t = 0; t < n; ++t) {
    ya += rng.normal();
    aa += 0.01 * rng.normal();
    y[t] = ya;
    a[t] = aa;
  }
  EcmOptions strict;
  strict.gate_warn_only = false;
  EcmOptions warn;
  warn.gate_warn_only = true;
  // The strict gate may legitimately pass on some draws; check consistency.
  try {
    EcmResult r = ecmFit(y, a, noControls(n), {}, strict);
    CHECK(r.gate_passed);
  } catch (const EstimationError&) {
    EcmResult r = ecmFit(y, a, noControls(n), {}, warn);
    CHECK_FALSE(r.gate_passed);
    CHECK_FALSE(r.gate_warning.empty());
  }
}

TEST_CASE("ecm: phi at or above zero flags non-reverting") {
  // Construct series whose ECM regression yields phi >= 0 by feeding an
  // explosive outcome.
  Rng rng(121);
  const Eigen::Index n = 300;
  Eigen::VectorXd y(n), a(n);
  y[0] = 1.0;
  a[0] = 0.5;
  for (Eigen::Index t = 1; t < n; ++t) {
    a[t] = a[t - 1] + 0.005 * rng.normal();
    y[t] = 1.02 * y[t - 1] + 0.01 * rng.normal();
  }
  EcmOptions opt;
  opt.gate_warn_only = true;
  EcmResult r = ecmFit(y, a, noControls(n), {}, opt);
  if (r.phi >= 0.0) {
    CHECK(r.non_reverting);
    CHECK(std::isinf(r.half_life_days));
  }
}

TEST_CASE("koyck: geometric identities on a noiseless AR recursion") {
  const Eigen::Index n = 200;
  Eigen::VectorXd a(n), y(n);
  Rng rng(123);
  double astate = 0.0;
  y[0] = 2.0;
  a[0] = 0.0;
  for (Eigen::Index t = 1; t < n; ++t) {
    astate = 0.5 * astate + rng.normal();
    a[t] = astate;
    y[t] = 1.0 + 0.5 * y[t - 1] + 1.0 * a[t];
  }
  KoyckResult r = koyckFit(y, a, noControls(n), {}, 7);
  CHECK(r.rho == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(r.beta0 == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(r.long_run_multiplier == doctest::Approx(2.0).epsilon(1e-8));
  CHECK_FALSE(r.divergent);
}

TEST_CASE("koyck: implied beta0 from the persistence benchmark") {
  // rho = 0.888 and long-run multiplier 0.13 imply beta0 = 0.13 * 0.112.
  const double implied = 0.13 * (1.0 - 0.888);
  CHECK(implied == doctest::Approx(0.01456).epsilon(1e-3));
}

TEST_CASE("koyck: planted rho=0.9, beta0=0.2 covers the long-run multiplier of 2") {
  int covered = 0;
  const int seeds = 200;
  for (int s = 0; s < seeds; ++s) {
    Rng rng(50000 + std::uint64_t(s));
    const Eigen::Index n = 1500;
    Eigen::VectorXd a(n), y(n);
    double astate = 0.0;
    y[0] = 0.0;
    a[0] = 0.0;
    for (Eigen::Index t = 1; t < n; ++t) {
      astate = 0.6 * astate + rng.normal();
      a[t] = astate;
      y[t] = 0.9 * y[t - 1] + 0.2 * a[t] + 0.3 * rng.normal();
    }
    KoyckResult r = koyckFit(y, a, noControls(n), {}, 7);
    if (r.divergent) continue;
    const double lo = r.long_run_multiplier - 1.96 * r.long_run_se;
    const double hi = r.long_run_multiplier + 1.96 * r.long_run_se;
    if (lo <= 2.0 && 2.0 <= hi) ++covered;
  }
  CHECK(covered >= 180);
}

TEST_CASE("koyck: explosive series flags a divergent multiplier") {
  const Eigen::Index n = 150;
  Eigen::VectorXd a(n), y(n);
  Rng rng(125);
  y[0] = 0.1;
  for (Eigen::Index t = 1; t < n; ++t) {
    a[t] = rng.normal();
    y[t] = 1.05 * y[t - 1] + 0.001 * rng.normal();
  }
  KoyckResult r = koyckFit(y, a, noControls(n), {}, 7);
  CHECK(r.divergent);
  CHECK(std::isnan(r.long_run_multiplier));
}

TEST_CASE("local projections: white-noise inputs give flat responses covering zero") {
  Rng rng(127);
  const Eigen::Index n = 2000;
  Eigen::VectorXd dy(n), da(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    dy[t] = rng.normal();
    da[t] = rng.normal();
  }
  LocalProjectionOptions opt;
  opt.max_horizon = 20;
  IrfResult irf = localProjections(dy, da, noControls(n), {}, opt);
  int cover_zero = 0;
  for (int h = 0; h <= 20; ++h) {
    if (irf.band_lo[h] <= 0.0 && 0.0 <= irf.band_hi[h]) ++cover_zero;
    CHECK(std::abs(irf.beta_h[h]) < 0.15);
  }
  CHECK(cover_zero >= 19);  // >= 90% of horizons
}

TEST_CASE("local projections: recovers a known moving-average profile") {
  Rng rng(131);
  const Eigen::Index n = 4000;
  const int profile_len = 6;
  Eigen::VectorXd profile(profile_len);
  for (int j = 0; j < profile_len; ++j) profile[j] = std::pow(0.5, j);
  Eigen::VectorXd da(n), dy(n);
  for (Eigen::Index t = 0; t < n; ++t) da[t] = rng.normal();
  for (Eigen::Index t = 0; t < n; ++t) {
    double v = 0.3 * rng.normal();
    for (int j = 0; j < profile_len && t - j >= 0; ++j) v += profile[j] * da[t - j];
    dy[t] = v;
  }
  LocalProjectionOptions opt;
  opt.max_horizon = profile_len - 1;
  IrfResult irf = localProjections(dy, da, noControls(n), {}, opt);
  for (int h = 0; h < profile_len; ++h) {
    CHECK(std::abs(irf.beta_h[h] - profile[h]) < 2.0 * irf.se_h[h]);
  }
}

TEST_CASE("local projections: cumulative mapping identity to 1e-12") {
  Rng rng(133);
  const Eigen::Index n = 800;
  Eigen::VectorXd dy(n), da(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    dy[t] = rng.normal();
    da[t] = rng.normal();
  }
  LocalProjectionOptions opt;
  opt.max_horizon = 12;
  IrfResult irf = localProjections(dy, da, noControls(n), {}, opt);
  double cum = 0.0;
  for (int h = 0; h <= 12; ++h) {
    cum += irf.beta_h[h];
    const double expected = 100.0 * (std::exp(0.10 * cum) - 1.0);
    CHECK(std::abs(irf.cumulative_pct_10pp[h] - expected) < 1e-12);
  }
}

TEST_CASE("local projections: horizon too large for the sample errors out") {
  Eigen::VectorXd dy = Eigen::VectorXd::Zero(50);
  Eigen::VectorXd da = Eigen::VectorXd::Zero(50);
  LocalProjectionOptions opt;
  opt.max_horizon = 40;
  CHECK_THROWS_AS(localProjections(dy, da, noControls(50), {}, opt), DomainError);
}

TEST_CASE("regime split: identical DGP in both regimes gives compatible slopes") {
  Rng rng(137);
  const Eigen::Index n = 1200;
  Eigen::VectorXd y(n), a(n), first(n), second(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    a[t] = rng.uniform();
    y[t] = 2.0 - 1.0 * a[t] + 0.4 * rng.normal();
    first[t] = t < n / 2 ? 1.0 : 0.0;
    second[t] = t < n / 2 ? 0.0 : 1.0;
  }
  auto splits = regimeSplit(y, a, noControls(n), {}, {{"first", first}, {"second", second}}, 7);
  REQUIRE(splits.size() == 2);
  REQUIRE_FALSE(splits[0].skipped);
  REQUIRE_FALSE(splits[1].skipped);
  const double b1 = splits[0].fit.coefOf("a");
  const double b2 = splits[1].fit.coefOf("a");
  const double joint_se =
      std::sqrt(std::pow(splits[0].fit.seOf("a"), 2) + std::pow(splits[1].fit.seOf("a"), 2));
  CHECK(std::abs(b1 - b2) < 2.0 * joint_se);
}

TEST_CASE("regime split: a regime below the row floor is skipped with a warning") {
  Rng rng(139);
  const Eigen::Index n = 300;
  Eigen::VectorXd y(n), a(n), tiny(n), rest(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    a[t] = rng.uniform();
    y[t] = -a[t] + rng.normal();
    tiny[t] = t < 10 ? 1.0 : 0.0;
    rest[t] = t < 10 ? 0.0 : 1.0;
  }
  auto splits = regimeSplit(y, a, noControls(n), {}, {{"tiny", tiny}, {"rest", rest}}, 7);
  CHECK(splits[0].skipped);
  CHECK(splits[0].warning.find("tiny") != std::string::npos);
  CHECK_FALSE(splits[1].skipped);
}

TEST_CASE("regime split: semi-elasticity matches the benchmark mapping") {
  // A pre-Dencun-style coefficient of -0.706 maps to about -6.8%.
  CHECK(semiElasticity10pp(-0.706) == doctest::Approx(-6.82).epsilon(0.01));
}

TEST_CASE("regime split: controls constant inside a regime are dropped, not fatal") {
  Rng rng(141);
  const Eigen::Index n = 400;
  Eigen::VectorXd y(n), a(n), flag(n);
  Eigen::MatrixXd controls(n, 1);
  for (Eigen::Index t = 0; t < n; ++t) {
    a[t] = rng.uniform();
    controls(t, 0) = t < 200 ? 0.0 : 1.0;  // constant within each half
    y[t] = -a[t] + 0.5 * controls(t, 0) + rng.normal();
    flag[t] = t < 200 ? 1.0 : 0.0;
  }
  auto splits = regimeSplit(y, a, controls, {"step"}, {{"first_half", flag}}, 7);
  REQUIRE(splits.size() == 1);
  REQUIRE_FALSE(splits[0].skipped);
  CHECK(splits[0].dropped_controls == std::vector<std::string>{"step"});
}

TEST_CASE("piecewise: planted kink recovers both segment slopes") {
  Rng rng(143);
  const Eigen::Index n = 3000;
  Eigen::VectorXd a(n), y(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    a[t] = rng.uniform();
    const double kink = std::max(a[t] - 0.8, 0.0);
    y[t] = 1.0 - 1.0 * a[t] - 2.0 * kink + 0.3 * rng.normal();  // slopes -1 then -3
  }
  PiecewiseResult r = piecewiseFit(y, a, noControls(n), {}, 0.8, 7);
  CHECK(std::abs(r.below_slope - (-1.0)) < 2.0 * r.below_se);
  CHECK(std::abs(r.above_slope - (-3.0)) < 2.0 * r.above_se);
  CHECK_FALSE(r.above_undefined);
}

TEST_CASE("piecewise: fitted value is continuous at the knot") {
  Rng rng(145);
  const Eigen::Index n = 1000;
  Eigen::VectorXd a(n), y(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    a[t] = rng.uniform();
    y[t] = 0.5 + a[t] + std::max(a[t] - 0.8, 0.0) + 0.1 * rng.normal();
  }
  PiecewiseResult r = piecewiseFit(y, a, noControls(n), {}, 0.8, 7);
  const double b0 = r.fit.coefOf("const");
  const double ba = r.fit.coefOf("a");
  const double bh = r.fit.coefOf("a.hinge");
  const double eps = 1e-8;
  const double left = b0 + ba * (0.8 - eps) + bh * std::max(0.8 - eps - 0.8, 0.0);
  const double right = b0 + ba * (0.8 + eps) + bh * std::max(0.8 + eps - 0.8, 0.0);
  CHECK(std::abs(left - right) < 1e-7);  // continuity up to the eps step itself
}

TEST_CASE("piecewise: all data below the knot flags the upper segment") {
  Rng rng(147);
  const Eigen::Index n = 500;
  Eigen::VectorXd a(n), y(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    a[t] = 0.5 * rng.uniform();  // support [0, 0.5], knot at 0.8
    y[t] = -a[t] + 0.2 * rng.normal();
  }
  PiecewiseResult r = piecewiseFit(y, a, noControls(n), {}, 0.8, 7);
  CHECK(r.above_undefined);
  CHECK(r.above_slope == 0.0);
  CHECK(std::isnan(r.above_se));
  CHECK(std::abs(r.below_slope - (-1.0)) < 3.0 * r.below_se);
}

TEST_CASE("piecewise: a knot with no data below it is a domain error") {
  Rng rng(149);
  const Eigen::Index n = 200;
  Eigen::VectorXd a(n), y(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    a[t] = 0.2 + 0.3 * rng.uniform();
    y[t] = a[t] + rng.normal();
  }
  CHECK_THROWS_AS(piecewiseFit(y, a, noControls(n), {}, 0.1, 7), DomainError);
  CHECK_THROWS_AS(piecewiseFit(y, a, noControls(n), {}, 0.2, 7), DomainError);
}
