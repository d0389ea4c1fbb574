#include "feekit/measures.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "feekit/errors.hpp"
#include "feekit/stats.hpp"

namespace feekit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool missing(double v) { return std::isnan(v); }

}  // namespace

std::optional<double> postingCleanShare(double l2_user_tx, double l1_tx_raw, double posting_tx) {
  if (l2_user_tx < 0.0 || l1_tx_raw < 0.0 || posting_tx < 0.0) {
    throw DomainError("posting-clean share: counts must be >= 0");
  }
  if (posting_tx > l1_tx_raw) {
    throw IntegrityError("posting-clean share: posting_tx exceeds l1_tx_raw");
  }
  const double denom = l2_user_tx + (l1_tx_raw - posting_tx);
  if (denom == 0.0) return std::nullopt;
  return l2_user_tx / denom;
}

double scarcityIndex(const ScarcityInputs& in, bool after_dencun) {
  if (in.benchmark <= 0.0) throw DomainError("scarcity: benchmark q~ must be > 0");
  if (in.basefee < 0.0 || in.tip < 0.0 || in.blob_fee < 0.0) {
    throw DomainError("scarcity: fee components must be >= 0");
  }
  const double numer = in.basefee + in.tip + (after_dencun ? in.blob_fee : 0.0);
  if (numer <= 0.0) throw DomainError("scarcity: zero total fee");
  return std::log(numer / in.benchmark);
}

Eigen::VectorXd tukeyHanningSmooth(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  // Half-window 3: w_j ∝ 0.5*(1 + cos(pi*j/4)).
  double w[7];
  for (int j = -3; j <= 3; ++j) w[j + 3] = 0.5 * (1.0 + std::cos(M_PI * std::abs(j) / 4.0));
  Eigen::VectorXd out(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    double num = 0.0, den = 0.0;
    for (int j = -3; j <= 3; ++j) {
      const Eigen::Index s = t + j;
      if (s < 0 || s >= n || missing(x[s])) continue;
      num += w[j + 3] * x[s];
      den += w[j + 3];
    }
    out[t] = den > 0.0 ? num / den : kNaN;
  }
  return out;
}

DemandFactorResult demandFactor(const Eigen::MatrixXd& inputs,
                                const std::vector<std::string>& input_names,
                                const std::vector<bool>& in_fit_window,
                                const Eigen::VectorXd& orientation_series) {
  const Eigen::Index n = inputs.rows();
  const Eigen::Index k = inputs.cols();
  if (size_t(n) != in_fit_window.size() || orientation_series.size() != n) {
    throw AlignmentError("demand factor: misaligned inputs");
  }
  if (size_t(k) != input_names.size()) throw AlignmentError("demand factor: name count mismatch");

  std::vector<Eigen::Index> fit_rows;
  for (Eigen::Index t = 0; t < n; ++t) {
    if (!in_fit_window[size_t(t)]) continue;
    bool complete = true;
    for (Eigen::Index c = 0; c < k; ++c) {
      if (missing(inputs(t, c))) complete = false;
    }
    if (complete) fit_rows.push_back(t);
  }
  if (Eigen::Index(fit_rows.size()) < 30) {
    throw DomainError("demand factor: fewer than 30 complete fit rows");
  }

  Eigen::MatrixXd F(Eigen::Index(fit_rows.size()), k);
  for (size_t r = 0; r < fit_rows.size(); ++r) F.row(Eigen::Index(r)) = inputs.row(fit_rows[r]);
  Eigen::RowVectorXd mu = F.colwise().mean();
  for (Eigen::Index c = 0; c < k; ++c) {
    const double sd = sampleSd(F.col(c));
    if (sd == 0.0) {
      throw DegeneracyError("demand factor: input '" + input_names[size_t(c)] +
                            "' is constant on the fit window");
    }
  }
  Eigen::MatrixXd centered = F.rowwise() - mu;
  Eigen::MatrixXd cov = centered.transpose() * centered / double(F.rows() - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw EstimationError("demand factor: eigensolver failed");
  Eigen::VectorXd loadings = eig.eigenvectors().col(k - 1);  // largest eigenvalue last

  // Project over the full sample (missing inputs give a missing score).
  Eigen::VectorXd raw(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    double s = 0.0;
    bool complete = true;
    for (Eigen::Index c = 0; c < k; ++c) {
      if (missing(inputs(t, c))) {
        complete = false;
        break;
      }
      s += (inputs(t, c) - mu[c]) * loadings[c];
    }
    raw[t] = complete ? s : kNaN;
  }

  // Unit variance on the fit window.
  Eigen::VectorXd fit_scores(Eigen::Index(fit_rows.size()));
  for (size_t r = 0; r < fit_rows.size(); ++r) fit_scores[Eigen::Index(r)] = raw[fit_rows[r]];
  const double sd = sampleSd(fit_scores);
  if (sd == 0.0) throw DegeneracyError("demand factor: degenerate first component");
  raw /= sd;
  fit_scores /= sd;

  // Sign rule: nonnegative fit-window correlation with the orientation
  // series; an exact zero falls back to a positive first loading.
  double corr = 0.0;
  {
    Eigen::VectorXd o(Eigen::Index(fit_rows.size()));
    for (size_t r = 0; r < fit_rows.size(); ++r) o[Eigen::Index(r)] = orientation_series[fit_rows[r]];
    const double so = sampleSd(o);
    if (so > 0.0) {
      const double mo = o.mean();
      const double ms = fit_scores.mean();
      corr = ((o.array() - mo) * (fit_scores.array() - ms)).sum();
    }
  }
  bool flip = false;
  if (corr < 0.0) {
    flip = true;
  } else if (corr == 0.0 && loadings[0] < 0.0) {
    flip = true;
  }
  if (flip) {
    raw = -raw;
    loadings = -loadings;
  }

  DemandFactorResult r;
  r.scores = raw;
  r.loadings = loadings;
  r.sign_flipped = flip;
  r.input_names = input_names;
  r.fit_rows = Eigen::Index(fit_rows.size());
  return r;
}

IndicatorColumns buildIndicators(const DailyPanel& panel, const UpgradeCalendar& calendar,
                                 const ShockCatalog& shocks) {
  calendar.validate();
  const Eigen::Index n = panel.rows();
  IndicatorColumns out;
  out.regime_london = Eigen::VectorXd::Zero(n);
  out.regime_merge = Eigen::VectorXd::Zero(n);
  out.regime_dencun = Eigen::VectorXd::Zero(n);
  out.cal_weekend = Eigen::VectorXd::Zero(n);
  out.cal_month_end = Eigen::VectorXd::Zero(n);
  out.cal_quarter_turn = Eigen::VectorXd::Zero(n);
  out.any_outage = Eigen::VectorXd::Zero(n);

  for (Eigen::Index t = 0; t < n; ++t) {
    const Date d = panel.dates()[size_t(t)];
    if (d >= calendar.dencun) {
      out.regime_dencun[t] = 1.0;
    } else if (d >= calendar.merge) {
      out.regime_merge[t] = 1.0;
    } else if (d >= calendar.london) {
      out.regime_london[t] = 1.0;
    }
    if (d.isWeekendUtc()) out.cal_weekend[t] = 1.0;
    if (d.isMonthEnd()) out.cal_month_end[t] = 1.0;
    if (d.isQuarterStart()) out.cal_quarter_turn[t] = 1.0;
  }

  for (const auto& e : shocks.entries) {
    auto idx = panel.indexOf(e.date);
    if (!idx) {
      out.warnings.push_back("shock '" + e.name + "' on " + e.date.toIso() +
                             " is outside the panel range");
      continue;
    }
    Eigen::VectorXd flag = Eigen::VectorXd::Zero(n);
    flag[*idx] = 1.0;  // multi-day campaigns use the start-day dummy only
    std::string slug = e.name;
    for (auto& c : slug) {
      if (c == ' ' || c == '/' || c == ',') c = '_';
      c = char(std::tolower(c));
    }
    out.shocks.emplace_back("shock_" + slug, std::move(flag));
    std::string cat = e.category;
    for (auto& c : cat) c = char(std::tolower(c));
    if (cat.find("outage") != std::string::npos) out.any_outage[*idx] = 1.0;
  }
  return out;
}

std::pair<DailyPanel, ConstructMetadata> constructPanel(const DailyPanel& raw,
                                                        const ConstructOptions& options) {
  ConstructMetadata meta;
  options.calendar.validate();
  options.shocks.validate(options.calendar);

  // Treatment first; the pre-London trim depends on it.
  const Eigen::Index n0 = raw.rows();
  Eigen::VectorXd a_clean(n0);
  for (Eigen::Index t = 0; t < n0; ++t) {
    const double l2 = raw.col("l2_user_tx")[t];
    const double l1 = raw.col("l1_tx_raw")[t];
    const double post = raw.col("posting_tx")[t];
    if (missing(l2) || missing(l1) || missing(post)) {
      a_clean[t] = kNaN;
      continue;
    }
    auto share = postingCleanShare(l2, l1, post);
    a_clean[t] = share ? *share : kNaN;
  }

  DailyPanel panel = raw;
  if (options.trim_pre_london) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index t = 0; t < n0; ++t) {
      const bool pre_london = panel.dates()[size_t(t)] < options.calendar.london;
      if (pre_london && !missing(a_clean[t]) && a_clean[t] < 0.05) {
        ++meta.trimmed_rows;
        continue;
      }
      keep.push_back(t);
    }
    if (meta.trimmed_rows > 0) {
      Eigen::VectorXd kept(Eigen::Index(keep.size()));
      for (size_t i = 0; i < keep.size(); ++i) kept[Eigen::Index(i)] = a_clean[keep[i]];
      panel = panel.selectRows(keep);
      a_clean = kept;
    }
  }
  panel.trimmed_row_count = meta.trimmed_rows;
  const Eigen::Index n = panel.rows();
  ColumnMeta derived;
  derived.source = "construct";
  panel.addColumn("a_clean", a_clean, derived);

  // Outcomes.
  Eigen::VectorXd log_basefee(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const double bf = panel.col("basefee_median_gwei")[t];
    log_basefee[t] = (!missing(bf) && bf > 0.0) ? std::log(bf) : kNaN;
  }
  panel.addColumn("log_basefee", log_basefee, derived);

  Eigen::VectorXd util = panel.col("utilization");
  ColumnMeta util_meta = panel.meta("utilization");
  for (Eigen::Index t = 0; t < n; ++t) {
    if (!missing(util[t]) && util[t] > options.utilization_cap) {
      util[t] = options.utilization_cap;
      ++meta.utilization_clipped;
    }
  }
  panel.replaceColumn("utilization", util);
  panel.metaMutable("utilization").clipped_rows = meta.utilization_clipped;

  // Scarcity: smoothed execution-demand benchmark, then the log ratio.
  Eigen::VectorXd qtilde = tukeyHanningSmooth(panel.col("gas_used_total"));
  Eigen::VectorXd scarcity(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const double bf = panel.col("basefee_median_gwei")[t];
    const double tip = panel.col("tip_median_gwei")[t];
    const double blob = panel.col("blob_fee_gwei")[t];
    const double q = qtilde[t];
    const bool after = panel.dates()[size_t(t)] >= options.calendar.dencun;
    if (missing(bf) || missing(tip) || missing(q) || q <= 0.0 || (after && missing(blob))) {
      scarcity[t] = kNaN;
      continue;
    }
    ScarcityInputs in{bf, tip, after ? blob : 0.0, q};
    const double total = in.basefee + in.tip + (after ? in.blob_fee : 0.0);
    scarcity[t] = total > 0.0 ? scarcityIndex(in, after) : kNaN;
  }
  panel.addColumn("scarcity", scarcity, derived);
  panel.addColumn("qtilde", qtilde, derived);

  // Demand factor inputs: forward-fill single-day gaps, z-score on the
  // pre-Dencun fit window, PCA.
  std::vector<std::string> demand_cols = {"eth_logret", "cex_logvol", "rvol", "trends",
                                          "stable_issuance"};
  if (options.demand_variant == DemandVariant::kLite) {
    demand_cols = {"eth_logret", "cex_logvol", "rvol"};
  }
  meta.demand_inputs = demand_cols;
  meta.demand_fit_start = options.calendar.london;
  meta.demand_fit_end = options.calendar.dencun - 1;

  std::vector<bool> in_fit(size_t(n), false);
  for (Eigen::Index t = 0; t < n; ++t) {
    const Date d = panel.dates()[size_t(t)];
    in_fit[size_t(t)] = (d >= meta.demand_fit_start && d < options.calendar.dencun);
  }

  Eigen::MatrixXd standardized(n, Eigen::Index(demand_cols.size()));
  for (size_t c = 0; c < demand_cols.size(); ++c) {
    Eigen::VectorXd x = panel.col(demand_cols[c]);
    // Forward-fill single-day gaps only; longer runs stay missing.
    for (Eigen::Index t = 1; t < n; ++t) {
      const bool prev_ok = t >= 1 && !missing(x[t - 1]);
      const bool single = missing(x[t]) && prev_ok && (t + 1 >= n || !missing(x[t + 1]));
      if (single && panel.dates()[size_t(t)] - panel.dates()[size_t(t - 1)] == 1) {
        x[t] = x[t - 1];
      }
    }
    // z-score on the fit window.
    std::vector<double> window_vals;
    for (Eigen::Index t = 0; t < n; ++t) {
      if (in_fit[size_t(t)] && !missing(x[t])) window_vals.push_back(x[t]);
    }
    if (window_vals.size() < 30) {
      throw DomainError("demand factor: input '" + demand_cols[c] +
                        "' has too few fit-window values");
    }
    Eigen::Map<Eigen::VectorXd> wv(window_vals.data(), Eigen::Index(window_vals.size()));
    const double mu = wv.mean();
    const double sd = sampleSd(wv);
    if (sd == 0.0) {
      throw DegeneracyError("demand factor: input '" + demand_cols[c] +
                            "' is constant on the fit window");
    }
    for (Eigen::Index t = 0; t < n; ++t) {
      standardized(t, Eigen::Index(c)) = missing(x[t]) ? kNaN : (x[t] - mu) / sd;
    }
  }

  meta.demand = demandFactor(standardized, demand_cols, in_fit, panel.col("log_basefee"));
  panel.addColumn("d_star", meta.demand.scores, derived);

  // Indicators.
  IndicatorColumns ind = buildIndicators(panel, options.calendar, options.shocks);
  meta.warnings = ind.warnings;
  ColumnMeta flag_meta;
  flag_meta.source = "construct";
  flag_meta.is_flag = true;
  panel.addColumn("regime_london", ind.regime_london, flag_meta);
  panel.addColumn("regime_merge", ind.regime_merge, flag_meta);
  panel.addColumn("regime_dencun", ind.regime_dencun, flag_meta);
  panel.addColumn("cal_weekend", ind.cal_weekend, flag_meta);
  panel.addColumn("cal_month_end", ind.cal_month_end, flag_meta);
  panel.addColumn("cal_quarter_turn", ind.cal_quarter_turn, flag_meta);
  for (const auto& [name, flag] : ind.shocks) panel.addColumn(name, flag, flag_meta);
  panel.addColumn("any_outage", ind.any_outage, flag_meta);

  // Winsorize the analysis columns last, post-transform.
  panel = winsorize(panel, {"a_clean", "log_basefee", "utilization", "scarcity"},
                    options.winsor_tail);
  return {std::move(panel), std::move(meta)};
}

}  // namespace feekit
