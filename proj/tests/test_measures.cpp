#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "feekit/errors.hpp"
#include "feekit/measures.hpp"
#include "feekit/rng.hpp"
#include "feekit/stats.hpp"
#include "test_util.hpp"

using namespace feekit;

TEST_CASE("posting-clean share: hand values") {
  CHECK(*postingCleanShare(80, 20, 0) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(*postingCleanShare(80, 30, 10) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK_FALSE(postingCleanShare(0, 0, 0).has_value());
}

TEST_CASE("posting-clean share: integrity and domain errors") {
  CHECK_THROWS_AS(postingCleanShare(10, 5, 6), IntegrityError);
  CHECK_THROWS_AS(postingCleanShare(-1, 5, 0), DomainError);
}

TEST_CASE("posting-clean share: scale invariance in all three counts") {
  Rng rng(21);
  for (int i = 0; i < 200; ++i) {
    const double l2 = 1 + double(rng.below(100000));
    const double l1 = 1 + double(rng.below(100000));
    const double post = double(rng.below(std::uint64_t(l1)));
    const double k = 0.5 + 10.0 * rng.uniform();
    const auto base = postingCleanShare(l2, l1, post);
    const auto scaled = postingCleanShare(k * l2, k * l1, k * post);
    REQUIRE(base.has_value());
    REQUIRE(scaled.has_value());
    CHECK(*scaled == doctest::Approx(*base).epsilon(1e-12));
  }
}

TEST_CASE("scarcity index: hand values pre- and post-Dencun") {
  ScarcityInputs in{30.0, 2.0, 5.0, 16.0};
  CHECK(scarcityIndex(in, false) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(scarcityIndex(in, true) == doctest::Approx(std::log(37.0 / 16.0)).epsilon(1e-12));
  ScarcityInputs flat{14.0, 2.0, 0.0, 16.0};
  CHECK(scarcityIndex(flat, false) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("scarcity index: domain errors") {
  CHECK_THROWS_AS(scarcityIndex({30.0, 2.0, 0.0, 0.0}, false), DomainError);
  CHECK_THROWS_AS(scarcityIndex({30.0, 2.0, 0.0, -1.0}, false), DomainError);
  CHECK_THROWS_AS(scarcityIndex({0.0, 0.0, 0.0, 16.0}, false), DomainError);
  CHECK_THROWS_AS(scarcityIndex({-1.0, 2.0, 0.0, 16.0}, false), DomainError);
}

TEST_CASE("scarcity index: invariant to common scaling of fees and benchmark") {
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    ScarcityInputs in{50.0 * rng.uniform() + 1.0, 5.0 * rng.uniform(), 3.0 * rng.uniform(),
                      10.0 + 90.0 * rng.uniform()};
    const double k = 0.1 + 20.0 * rng.uniform();
    ScarcityInputs scaled{k * in.basefee, k * in.tip, k * in.blob_fee, k * in.benchmark};
    CHECK(scarcityIndex(scaled, true) == doctest::Approx(scarcityIndex(in, true)).epsilon(1e-10));
  }
}

TEST_CASE("tukey-hanning smoother: constant series is a fixed point") {
  Eigen::VectorXd x = Eigen::VectorXd::Constant(30, 7.5);
  Eigen::VectorXd s = tukeyHanningSmooth(x);
  for (Eigen::Index i = 0; i < x.size(); ++i) CHECK(s[i] == doctest::Approx(7.5).epsilon(1e-14));
}

TEST_CASE("tukey-hanning smoother: center weight of a unit spike is 1/4") {
  // Unnormalized weights 0.5*(1+cos(pi*j/4)), |j|<=3, sum to exactly 4.
  Eigen::VectorXd x = Eigen::VectorXd::Zero(9);
  x[4] = 1.0;
  Eigen::VectorXd s = tukeyHanningSmooth(x);
  CHECK(s[4] == doctest::Approx(0.25).epsilon(1e-12));
  const double w1 = 0.5 * (1.0 + std::cos(M_PI / 4.0)) / 4.0;
  CHECK(s[3] == doctest::Approx(w1).epsilon(1e-12));
  CHECK(s[5] == doctest::Approx(w1).epsilon(1e-12));
  // At t=1 the window loses its two leftmost points (j=-3,-2) and the spike
  // sits at j=+3; renormalize over the surviving weights.
  const auto w = [](int j) { return 0.5 * (1.0 + std::cos(M_PI * std::abs(j) / 4.0)); };
  const double surviving = w(-1) + w(0) + w(1) + w(2) + w(3);
  CHECK(s[1] == doctest::Approx(w(3) / surviving).epsilon(1e-12));
}

TEST_CASE("tukey-hanning smoother: truncated edge windows renormalize") {
  Eigen::VectorXd x = Eigen::VectorXd::Constant(8, 3.0);
  x[1] = std::nan("");
  Eigen::VectorXd s = tukeyHanningSmooth(x);
  CHECK(s[0] == doctest::Approx(3.0).epsilon(1e-14));  // edge + missing neighbor
  CHECK(s[7] == doctest::Approx(3.0).epsilon(1e-14));
}

namespace {

std::vector<bool> allFit(Eigen::Index n) { return std::vector<bool>(size_t(n), true); }

}  // namespace

TEST_CASE("demand factor: single input reproduces the series up to the sign rule") {
  Rng rng(31);
  const Eigen::Index n = 300;
  Eigen::MatrixXd inputs(n, 1);
  Eigen::VectorXd orientation(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    inputs(t, 0) = rng.normal();
    orientation[t] = -inputs(t, 0);  // anti-aligned: the sign rule must flip
  }
  const double mu = inputs.col(0).mean();
  const double sd = sampleSd(inputs.col(0));
  inputs.col(0) = (inputs.col(0).array() - mu) / sd;

  DemandFactorResult r = demandFactor(inputs, {"x"}, allFit(n), orientation);
  CHECK(r.sign_flipped);
  for (Eigen::Index t = 0; t < n; ++t) {
    CHECK(r.scores[t] == doctest::Approx(-inputs(t, 0)).epsilon(1e-9));
  }
}

TEST_CASE("demand factor: two perfectly correlated inputs load 1/sqrt(2) each") {
  Rng rng(32);
  const Eigen::Index n = 400;
  Eigen::MatrixXd inputs(n, 2);
  Eigen::VectorXd orientation(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const double z = rng.normal();
    inputs(t, 0) = z;
    inputs(t, 1) = z;
    orientation[t] = z;
  }
  DemandFactorResult r = demandFactor(inputs, {"x1", "x2"}, allFit(n), orientation);
  CHECK(std::abs(r.loadings[0]) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));
  CHECK(std::abs(r.loadings[1]) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));
}

TEST_CASE("demand factor: recovers a planted five-series factor direction") {
  // x_i = lambda_i * f + 0.1 * noise, standardized; the population PC1 of the
  // implied correlation matrix is the oracle direction.
  const Eigen::Index n = 2000;
  Eigen::VectorXd lambda(5);
  lambda << 0.6, 0.5, 0.4, 0.3, 0.2;
  const double noise_sd = 0.1;

  Rng rng(2024);
  Eigen::MatrixXd inputs(n, 5);
  Eigen::VectorXd orientation(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const double f = rng.normal();
    orientation[t] = f;
    for (int c = 0; c < 5; ++c) inputs(t, c) = lambda[c] * f + noise_sd * rng.normal();
  }
  for (int c = 0; c < 5; ++c) {
    const double mu = inputs.col(c).mean();
    const double sd = sampleSd(inputs.col(c));
    inputs.col(c) = (inputs.col(c).array() - mu) / sd;
  }

  Eigen::MatrixXd R(5, 5);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      const double si = std::sqrt(lambda[i] * lambda[i] + noise_sd * noise_sd);
      const double sj = std::sqrt(lambda[j] * lambda[j] + noise_sd * noise_sd);
      R(i, j) = i == j ? 1.0 : lambda[i] * lambda[j] / (si * sj);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(R);
  Eigen::VectorXd oracle = eig.eigenvectors().col(4);
  if (oracle[0] < 0) oracle = -oracle;

  DemandFactorResult r =
      demandFactor(inputs, {"a", "b", "c", "d", "e"}, allFit(n), orientation);
  for (int i = 0; i < 5; ++i) {
    CHECK(std::abs(r.loadings[i] - oracle[i]) < 0.05);
  }
}

TEST_CASE("demand factor: constant column raises a degeneracy error naming it") {
  const Eigen::Index n = 100;
  Eigen::MatrixXd inputs = Eigen::MatrixXd::Random(n, 3);
  inputs.col(1).setConstant(2.0);
  Eigen::VectorXd orientation = inputs.col(0);
  CHECK_THROWS_WITH_AS(demandFactor(inputs, {"x1", "flat", "x3"}, allFit(n), orientation),
                       doctest::Contains("flat"), DegeneracyError);
}

TEST_CASE("demand factor: too few fit rows rejected") {
  Eigen::MatrixXd inputs = Eigen::MatrixXd::Random(20, 2);
  Eigen::VectorXd orientation = inputs.col(0);
  CHECK_THROWS_AS(demandFactor(inputs, {"a", "b"}, allFit(20), orientation), DomainError);
}

TEST_CASE("demand factor: column reorder leaves scores unchanged") {
  Rng rng(77);
  const Eigen::Index n = 500;
  Eigen::MatrixXd inputs(n, 3);
  Eigen::VectorXd orientation(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const double f = rng.normal();
    orientation[t] = f;
    inputs(t, 0) = 0.9 * f + 0.3 * rng.normal();
    inputs(t, 1) = 0.7 * f + 0.3 * rng.normal();
    inputs(t, 2) = 0.5 * f + 0.3 * rng.normal();
  }
  Eigen::MatrixXd reordered(n, 3);
  reordered.col(0) = inputs.col(2);
  reordered.col(1) = inputs.col(0);
  reordered.col(2) = inputs.col(1);
  DemandFactorResult a = demandFactor(inputs, {"x1", "x2", "x3"}, allFit(n), orientation);
  DemandFactorResult b = demandFactor(reordered, {"x3", "x1", "x2"}, allFit(n), orientation);
  for (Eigen::Index t = 0; t < n; ++t) {
    CHECK(a.scores[t] == doctest::Approx(b.scores[t]).epsilon(1e-9));
  }
}

namespace {

DailyPanel datedPanel(const std::vector<std::string>& isodates) {
  DailyPanel p;
  std::vector<Date> d;
  for (const auto& s : isodates) d.push_back(Date::parseIso(s));
  p.setDates(d);
  return p;
}

}  // namespace

TEST_CASE("indicators: regime boundaries put the boundary day in the new regime") {
  DailyPanel p = datedPanel({"2021-08-04", "2021-08-05", "2022-09-14", "2022-09-15",
                             "2024-03-12", "2024-03-13"});
  UpgradeCalendar cal;
  IndicatorColumns ind = buildIndicators(p, cal, {});
  CHECK(ind.regime_london[0] == 0.0);  // pre-London day carries no regime flag
  CHECK(ind.regime_merge[0] == 0.0);
  CHECK(ind.regime_dencun[0] == 0.0);
  CHECK(ind.regime_london[1] == 1.0);
  CHECK(ind.regime_london[2] == 1.0);
  CHECK(ind.regime_merge[3] == 1.0);  // 2022-09-15: merge on, london off
  CHECK(ind.regime_london[3] == 0.0);
  CHECK(ind.regime_merge[4] == 1.0);
  CHECK(ind.regime_dencun[5] == 1.0);
}

TEST_CASE("indicators: regime flags partition every post-London day") {
  auto dir = testutil::tempDir("indicators");
  testutil::writeFile(dir / "panel.csv", testutil::syntheticRawPanel(1000, 3));
  DailyPanel p = loadPanel((dir / "panel.csv").string());
  UpgradeCalendar cal;
  IndicatorColumns ind = buildIndicators(p, cal, {});
  for (Eigen::Index t = 0; t < p.rows(); ++t) {
    if (p.dates()[size_t(t)] >= cal.london) {
      CHECK(ind.regime_london[t] + ind.regime_merge[t] + ind.regime_dencun[t] == 1.0);
    }
  }
}

TEST_CASE("indicators: calendar facts") {
  DailyPanel p = datedPanel({"2023-12-30", "2023-12-31", "2024-01-01", "2024-02-29"});
  IndicatorColumns ind = buildIndicators(p, {}, {});
  // 2023-12-31 is a Sunday and a month end.
  CHECK(ind.cal_weekend[1] == 1.0);
  CHECK(ind.cal_month_end[1] == 1.0);
  // 2023-12-30 is a Saturday.
  CHECK(ind.cal_weekend[0] == 1.0);
  CHECK(ind.cal_month_end[0] == 0.0);
  // 2024-01-01 is a quarter start (Monday).
  CHECK(ind.cal_quarter_turn[2] == 1.0);
  CHECK(ind.cal_weekend[2] == 0.0);
  // Leap-day February month end.
  CHECK(ind.cal_month_end[3] == 1.0);
}

TEST_CASE("indicators: shock flag fires on exactly the catalog day") {
  DailyPanel p = datedPanel({"2023-03-22", "2023-03-23", "2023-03-24"});
  ShockCatalog catalog;
  catalog.entries.push_back({"Airdrop", "Arbitrum airdrop", Date::fromYmd(2023, 3, 23), true, 1});
  IndicatorColumns ind = buildIndicators(p, {}, catalog);
  REQUIRE(ind.shocks.size() == 1);
  CHECK(ind.shocks[0].first == "shock_arbitrum_airdrop");
  CHECK(ind.shocks[0].second[0] == 0.0);
  CHECK(ind.shocks[0].second[1] == 1.0);
  CHECK(ind.shocks[0].second[2] == 0.0);
}

TEST_CASE("indicators: multi-day campaign still codes only the start day") {
  DailyPanel p = datedPanel({"2023-08-09", "2023-08-10", "2023-08-11"});
  ShockCatalog catalog;
  catalog.entries.push_back(
      {"Campaign", "Base Onchain Summer", Date::fromYmd(2023, 8, 9), true, 7});
  IndicatorColumns ind = buildIndicators(p, {}, catalog);
  REQUIRE(ind.shocks.size() == 1);
  CHECK(ind.shocks[0].second.sum() == 1.0);
  CHECK(ind.shocks[0].second[0] == 1.0);
}

TEST_CASE("indicators: out-of-range shock warns instead of failing") {
  DailyPanel p = datedPanel({"2022-01-01", "2022-01-02"});
  ShockCatalog catalog;
  catalog.entries.push_back({"Airdrop", "later event", Date::fromYmd(2023, 1, 1), true, 1});
  IndicatorColumns ind = buildIndicators(p, {}, catalog);
  CHECK(ind.shocks.empty());
  REQUIRE(ind.warnings.size() == 1);
  CHECK(ind.warnings[0].find("later event") != std::string::npos);
}

TEST_CASE("indicators: outage events feed the pooled any_outage flag") {
  DailyPanel p = datedPanel({"2022-05-01", "2022-05-02"});
  ShockCatalog catalog;
  catalog.entries.push_back(
      {"Outage", "Arbitrum sequencer outage", Date::fromYmd(2022, 5, 2), true, 1});
  IndicatorColumns ind = buildIndicators(p, {}, catalog);
  CHECK(ind.any_outage[0] == 0.0);
  CHECK(ind.any_outage[1] == 1.0);
}

TEST_CASE("construct: end-to-end panel construction invariants") {
  auto dir = testutil::tempDir("construct");
  testutil::writeFile(dir / "panel.csv", testutil::syntheticRawPanel(1100, 9));
  DailyPanel raw = loadPanel((dir / "panel.csv").string());

  ConstructOptions opt;
  opt.shocks.entries.push_back(
      {"Airdrop", "Arbitrum airdrop", Date::fromYmd(2023, 3, 23), true, 1});
  auto [panel, meta] = constructPanel(raw, opt);

  REQUIRE(panel.has("a_clean"));
  REQUIRE(panel.has("log_basefee"));
  REQUIRE(panel.has("scarcity"));
  REQUIRE(panel.has("d_star"));

  const Eigen::VectorXd& a = panel.col("a_clean");
  for (Eigen::Index t = 0; t < panel.rows(); ++t) {
    if (!std::isnan(a[t])) {
      CHECK(a[t] >= 0.0);
      CHECK(a[t] <= 1.0);
    }
  }

  // d_star standardized on its fit window to 1e-8 (pre-winsor construction).
  const Eigen::VectorXd& d = panel.col("d_star");
  std::vector<double> fit_vals;
  for (Eigen::Index t = 0; t < panel.rows(); ++t) {
    const Date day = panel.dates()[size_t(t)];
    if (day >= meta.demand_fit_start && day < opt.calendar.dencun && !std::isnan(d[t])) {
      fit_vals.push_back(d[t]);
    }
  }
  Eigen::Map<Eigen::VectorXd> dv(fit_vals.data(), Eigen::Index(fit_vals.size()));
  CHECK(std::abs(dv.mean()) < 1e-8);
  CHECK(std::abs(sampleSd(dv) - 1.0) < 1e-8);

  CHECK(panel.meta("log_basefee").winsor_lo.has_value());
  CHECK(panel.meta("a_clean").winsor_hi.has_value());

  REQUIRE(panel.has("shock_arbitrum_airdrop"));
  CHECK(panel.col("shock_arbitrum_airdrop").sum() == 1.0);
}

TEST_CASE("construct: utilization above the cap is clipped and counted") {
  auto dir = testutil::tempDir("construct_cap");
  std::string csv = testutil::syntheticRawPanel(400, 15);
  testutil::writeFile(dir / "panel.csv", csv);
  DailyPanel raw = loadPanel((dir / "panel.csv").string());
  // Force three utilization values above the 1.5 cap.
  Eigen::VectorXd util = raw.col("utilization");
  util[10] = 1.8;
  util[20] = 2.5;
  util[30] = 1.51;
  raw.replaceColumn("utilization", util);

  ConstructOptions opt;
  auto [panel, meta] = constructPanel(raw, opt);
  CHECK(meta.utilization_clipped == 3);
  CHECK(panel.col("utilization").maxCoeff() <= 1.5);
}

TEST_CASE("construct: lite demand variant drops trends and stablecoin issuance") {
  auto dir = testutil::tempDir("construct_lite");
  testutil::writeFile(dir / "panel.csv", testutil::syntheticRawPanel(700, 29));
  DailyPanel raw = loadPanel((dir / "panel.csv").string());
  ConstructOptions opt;
  opt.demand_variant = DemandVariant::kLite;
  auto [panel, meta] = constructPanel(raw, opt);
  CHECK(meta.demand_inputs.size() == 3);
  CHECK(panel.has("d_star"));
}
