#include "feekit/synth.hpp"

#include <cmath>

#include "feekit/errors.hpp"
#include "feekit/measures.hpp"
#include "feekit/rng.hpp"

namespace feekit {

namespace {

double reflectUnit(double x) {
  // Reflecting boundaries at 0 and 1.
  while (x < 0.0 || x > 1.0) {
    if (x < 0.0) x = -x;
    if (x > 1.0) x = 2.0 - x;
  }
  return x;
}

}  // namespace

void DgpSpec::validate() const {
  if (length < 100) throw DomainError("dgp: length must be >= 100");
  if (!(phi > -1.0 && phi <= 0.0)) {
    throw DomainError("dgp: phi must lie in (-1, 0]");
  }
  if (sigma_eps < 0.0 || sigma_a < 0.0) throw DomainError("dgp: negative innovation sd");
  if (a_start < 0.0 || a_start > 1.0) throw DomainError("dgp: a_start outside [0,1]");
  if (error == ErrorProcess::kAr1 && std::abs(error_rho) >= 1.0) {
    throw DomainError("dgp: |error_rho| must be < 1");
  }
}

DailyPanel generateDgp(const DgpSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const Eigen::Index T = spec.length;

  Eigen::VectorXd a(T), y(T), d_star(T);
  a[0] = spec.a_start;
  for (Eigen::Index t = 1; t < T; ++t) {
    a[t] = reflectUnit(a[t - 1] + rng.normal(0.0, spec.sigma_a));
  }

  // Independent standardized AR(1) control; not part of the fee recursion so
  // planted coefficients stay exact.
  const double d_rho = 0.5;
  d_star[0] = rng.normal();
  for (Eigen::Index t = 1; t < T; ++t) {
    d_star[t] = d_rho * d_star[t - 1] + std::sqrt(1.0 - d_rho * d_rho) * rng.normal();
  }

  double ar_state = 0.0;
  y[0] = spec.intercept + spec.beta * a[0];
  for (Eigen::Index t = 1; t < T; ++t) {
    double eps;
    if (spec.error == ErrorProcess::kAr1) {
      ar_state = spec.error_rho * ar_state +
                 std::sqrt(1.0 - spec.error_rho * spec.error_rho) * rng.normal(0.0, spec.sigma_eps);
      eps = ar_state;
    } else {
      eps = rng.normal(0.0, spec.sigma_eps);
    }
    const double ect = y[t - 1] - spec.beta * a[t - 1] - spec.intercept;
    y[t] = y[t - 1] + spec.phi * ect + spec.psi * (a[t] - a[t - 1]) + eps;
  }

  DailyPanel panel;
  std::vector<Date> dates;
  dates.reserve(size_t(T));
  for (Eigen::Index t = 0; t < T; ++t) dates.push_back(spec.start_date + int(t));
  panel.setDates(std::move(dates));

  ColumnMeta meta;
  meta.source = "synth";
  panel.addColumn("a_clean", a, meta);
  panel.addColumn("log_basefee", y, meta);
  panel.addColumn("d_star", d_star, meta);

  UpgradeCalendar calendar;
  ShockCatalog empty_catalog;
  IndicatorColumns ind = buildIndicators(panel, calendar, empty_catalog);
  ColumnMeta flag_meta;
  flag_meta.source = "synth";
  flag_meta.is_flag = true;
  panel.addColumn("regime_london", ind.regime_london, flag_meta);
  panel.addColumn("regime_merge", ind.regime_merge, flag_meta);
  panel.addColumn("regime_dencun", ind.regime_dencun, flag_meta);
  panel.addColumn("cal_weekend", ind.cal_weekend, flag_meta);
  panel.addColumn("cal_month_end", ind.cal_month_end, flag_meta);
  panel.addColumn("cal_quarter_turn", ind.cal_quarter_turn, flag_meta);

  if (!spec.shock_days.empty()) {
    Eigen::VectorXd shock = Eigen::VectorXd::Zero(T);
    for (auto idx : spec.shock_days) {
      if (idx < 0 || idx >= T) throw DomainError("dgp: shock day outside the sample");
      shock[idx] = 1.0;
    }
    panel.addColumn("shock_synthetic", shock, flag_meta);
  }
  return panel;
}

DailyPanel placeboShuffle(const DailyPanel& panel, const std::string& treatment,
                          std::uint64_t seed) {
  const Eigen::VectorXd& x = panel.col(treatment);
  const Eigen::Index n = x.size();
  std::vector<Eigen::Index> perm(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) perm[size_t(i)] = i;
  if (seed != 0) {
    Rng rng(seed);
    for (Eigen::Index i = n - 1; i > 0; --i) {
      const auto j = Eigen::Index(rng.below(std::uint64_t(i) + 1));
      std::swap(perm[size_t(i)], perm[size_t(j)]);
    }
  }
  Eigen::VectorXd shuffled(n);
  for (Eigen::Index i = 0; i < n; ++i) shuffled[i] = x[perm[size_t(i)]];
  DailyPanel out = panel;
  out.replaceColumn(treatment, shuffled);
  return out;
}

}  // namespace feekit
