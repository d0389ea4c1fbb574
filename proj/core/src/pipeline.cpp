#include "feekit/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <set>
#include <sstream>

#include "feekit/csv.hpp"
#include "feekit/errors.hpp"
#include "feekit/estimators.hpp"
#include "feekit/inference.hpp"
#include "feekit/iv.hpp"
#include "feekit/ssm.hpp"
#include "feekit/stats.hpp"
#include "feekit/synth.hpp"
#include "feekit/version.hpp"

namespace feekit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

std::vector<std::string> stampComments(const RunConfig& cfg) {
  return {std::string(" feekit v") + kVersion, " config=" + hex64(cfg.hash())};
}

std::string lower(std::string s) {
  for (auto& c : s) c = char(std::tolower(c));
  return s;
}

struct Context {
  const RunConfig& cfg;
  fs::path out;
  RunReport report;

  void recordArtifact(const std::string& name) { report.artifacts.push_back(name); }
  void warn(const std::string& msg) { report.warnings.push_back(msg); }

  void writeTable(const std::string& name, CsvTable table) {
    table.comments = stampComments(cfg);
    writeCsv((out / name).string(), table);
    recordArtifact(name);
  }
  void writeJson(const std::string& name, const json& j) {
    std::ofstream f(out / name, std::ios::binary);
    if (!f) throw ParseError("cannot write " + name);
    f << j.dump(2) << "\n";
    recordArtifact(name);
  }
};

DailyPanel loadConstructed(const Context& ctx) {
  const fs::path path = ctx.out / "constructed.csv";
  if (!fs::exists(path)) {
    throw DependencyError("construct required: " + path.string() +
                          " not found (run construct or synth first)");
  }
  return readPanelCsv(path.string());
}

json loadConstructedMeta(const Context& ctx) {
  const fs::path path = ctx.out / "constructed_meta.json";
  if (!fs::exists(path)) return json::object();
  std::ifstream f(path);
  json j;
  f >> j;
  return j;
}

// Confirmatory adjustment set: demand factor, regime dummies (London is the
// base category), calendar dummies, confirmatory shock dummies, pooled
// outage flag. Constant columns are dropped (and reported) rather than fed
// into a rank error.
struct ControlBlock {
  Eigen::MatrixXd X;
  std::vector<std::string> names;
  std::vector<std::string> dropped;
};

ControlBlock assembleControls(const DailyPanel& panel, const json& meta,
                              const std::vector<Eigen::Index>& rows) {
  std::set<std::string> non_confirmatory;
  if (meta.contains("shock_columns")) {
    for (const auto& entry : meta["shock_columns"]) {
      if (!entry.value("confirmatory", true)) {
        non_confirmatory.insert(entry["name"].get<std::string>());
      }
    }
  }
  std::vector<std::string> candidates;
  for (const auto& name : {"d_star", "regime_merge", "regime_dencun", "cal_weekend",
                           "cal_month_end", "cal_quarter_turn"}) {
    if (panel.has(name)) candidates.push_back(name);
  }
  for (const auto& name : panel.columnNames()) {
    if (name.rfind("shock_", 0) == 0 && !non_confirmatory.count(name)) {
      candidates.push_back(name);
    }
  }
  if (panel.has("any_outage")) candidates.push_back("any_outage");

  ControlBlock block;
  std::vector<Eigen::VectorXd> cols;
  for (const auto& name : candidates) {
    const Eigen::VectorXd& full = panel.col(name);
    Eigen::VectorXd sub(Eigen::Index(rows.size()));
    for (size_t i = 0; i < rows.size(); ++i) sub[Eigen::Index(i)] = full[rows[i]];
    if (sampleSd(sub) == 0.0) {
      block.dropped.push_back(name);
      continue;
    }
    cols.push_back(std::move(sub));
    block.names.push_back(name);
  }
  block.X.resize(Eigen::Index(rows.size()), Eigen::Index(cols.size()));
  for (size_t c = 0; c < cols.size(); ++c) block.X.col(Eigen::Index(c)) = cols[c];
  return block;
}

/// Complete-case rows for the named columns (listwise drop, paper convention).
std::vector<Eigen::Index> completeRows(const DailyPanel& panel,
                                       const std::vector<std::string>& columns) {
  std::vector<Eigen::Index> rows;
  for (Eigen::Index t = 0; t < panel.rows(); ++t) {
    bool ok = true;
    for (const auto& c : columns) {
      if (std::isnan(panel.col(c)[t])) {
        ok = false;
        break;
      }
    }
    if (ok) rows.push_back(t);
  }
  return rows;
}

Eigen::VectorXd subset(const Eigen::VectorXd& x, const std::vector<Eigen::Index>& rows) {
  Eigen::VectorXd out(Eigen::Index(rows.size()));
  for (size_t i = 0; i < rows.size(); ++i) out[Eigen::Index(i)] = x[rows[i]];
  return out;
}

void appendCoefficientRows(CsvTable& t, const std::string& model, const std::string& outcome,
                           const EstimateResult& est) {
  for (size_t i = 0; i < est.names.size(); ++i) {
    t.rows.push_back({model, outcome, est.names[i], formatDouble(est.coef[Eigen::Index(i)]),
                      formatDouble(est.se[Eigen::Index(i)]),
                      formatDouble(est.p_values[Eigen::Index(i)]),
                      formatDouble(est.ci_lo[Eigen::Index(i)]),
                      formatDouble(est.ci_hi[Eigen::Index(i)]),
                      std::to_string(long(est.n_obs)), formatDouble(est.adj_r2),
                      covKindName(est.cov_kind, est.hac_lag),
                      est.names[i] == "a" ? formatDouble(semiElasticity10pp(est.coef[Eigen::Index(i)]))
                                          : "",
                      ""});
  }
}

struct OutcomeFit {
  std::string outcome;
  EcmResult ecm;
  EstimateResult levels_hac;
  EstimateResult levels_pw;
};

OutcomeFit fitOutcome(const Context& ctx, const DailyPanel& panel, const json& meta,
                      const std::string& outcome, RunReport& report) {
  const std::vector<std::string> base_cols = {outcome, "a_clean"};
  std::vector<std::string> need = base_cols;
  need.push_back("d_star");
  std::vector<Eigen::Index> rows = completeRows(panel, need);
  if (rows.size() < 100) {
    throw EstimationError("estimate: fewer than 100 complete rows for outcome '" + outcome + "'");
  }
  ControlBlock controls = assembleControls(panel, meta, rows);
  for (const auto& d : controls.dropped) {
    report.warnings.push_back("outcome " + outcome + ": dropped constant control '" + d + "'");
  }

  OutcomeFit fit;
  fit.outcome = outcome;
  Eigen::VectorXd y = subset(panel.col(outcome), rows);
  Eigen::VectorXd a = subset(panel.col("a_clean"), rows);

  Eigen::MatrixXd levels_X(y.size(), 1 + controls.X.cols());
  levels_X.col(0) = a;
  if (controls.X.cols() > 0) levels_X.rightCols(controls.X.cols()) = controls.X;
  std::vector<std::string> levels_names = {"a"};
  for (const auto& n : controls.names) levels_names.push_back(n);

  fit.levels_hac = olsHac(y, levels_X, levels_names, ctx.cfg.hac_lag_levels);
  fit.levels_pw = praisWinsten(y, levels_X, levels_names);

  EcmOptions opt;
  opt.hac_lag = ctx.cfg.hac_lag_diff;
  opt.gate_alpha = ctx.cfg.ecm_gate_alpha;
  opt.gate_warn_only = ctx.cfg.ecm_gate_warn_only;
  fit.ecm = ecmFit(y, a, controls.X, controls.names, opt);
  if (!fit.ecm.gate_warning.empty()) {
    report.warnings.push_back("outcome " + outcome + ": " + fit.ecm.gate_warning);
  }
  return fit;
}

void cmdConstruct(Context& ctx) {
  if (ctx.cfg.panel_path.empty()) {
    throw ConfigError("construct: config key 'panel' is required");
  }
  DailyPanel raw = loadPanel(ctx.cfg.panel_path, ctx.cfg.schema);
  ConstructOptions opt;
  opt.calendar = ctx.cfg.calendar;
  if (!ctx.cfg.shocks_path.empty()) opt.shocks = ShockCatalog::fromCsv(ctx.cfg.shocks_path);
  opt.winsor_tail = ctx.cfg.winsor_tail;
  opt.trim_pre_london = ctx.cfg.trim_pre_london;
  opt.demand_variant = ctx.cfg.demand_variant;

  auto [panel, meta] = constructPanel(raw, opt);
  for (const auto& w : meta.warnings) ctx.warn(w);

  emitPanelCsv(panel, (ctx.out / "constructed.csv").string(), stampComments(ctx.cfg));
  ctx.recordArtifact("constructed.csv");

  json j;
  j["provenance"] = "construct";
  j["source_panel"] = ctx.cfg.panel_path;
  j["dropped_rows"] = panel.dropped_row_count;
  j["trimmed_rows"] = meta.trimmed_rows;
  j["utilization_clipped"] = meta.utilization_clipped;
  j["winsor_note"] = meta.winsor_note;
  j["winsor_tail"] = ctx.cfg.winsor_tail;
  json bounds = json::object();
  for (const auto& name : {"a_clean", "log_basefee", "utilization", "scarcity"}) {
    const auto& m = panel.meta(name);
    if (m.winsor_lo && m.winsor_hi) {
      bounds[name] = {{"lo", *m.winsor_lo}, {"hi", *m.winsor_hi}};
    }
  }
  j["winsor_bounds"] = bounds;
  j["demand"] = {{"inputs", meta.demand_inputs},
                 {"fit_window_start", meta.demand_fit_start.toIso()},
                 {"fit_window_end", meta.demand_fit_end.toIso()},
                 {"sign_flipped", meta.demand.sign_flipped},
                 {"fit_rows", long(meta.demand.fit_rows)}};
  json loadings = json::object();
  for (size_t i = 0; i < meta.demand.input_names.size(); ++i) {
    loadings[meta.demand.input_names[i]] = meta.demand.loadings[Eigen::Index(i)];
  }
  j["demand"]["loadings"] = loadings;
  json shock_cols = json::array();
  for (const auto& e : opt.shocks.entries) {
    std::string slug = e.name;
    for (auto& c : slug) {
      if (c == ' ' || c == '/' || c == ',') c = '_';
      c = char(std::tolower(c));
    }
    shock_cols.push_back({{"name", "shock_" + slug}, {"confirmatory", e.used_confirmatory}});
  }
  j["shock_columns"] = shock_cols;
  j["warnings"] = meta.warnings;
  ctx.writeJson("constructed_meta.json", j);
}

void cmdSynth(Context& ctx) {
  DgpSpec spec;
  spec.length = ctx.cfg.synth_length;
  spec.beta = ctx.cfg.synth_beta;
  spec.psi = ctx.cfg.synth_psi;
  spec.phi = ctx.cfg.synth_phi;
  spec.sigma_eps = ctx.cfg.synth_sigma_eps;
  spec.sigma_a = ctx.cfg.synth_sigma_a;
  spec.seed = ctx.cfg.seed;
  DailyPanel panel = generateDgp(spec);
  emitPanelCsv(panel, (ctx.out / "constructed.csv").string(), stampComments(ctx.cfg));
  ctx.recordArtifact("constructed.csv");
  json j;
  j["provenance"] = "synth";
  j["spec"] = {{"length", long(spec.length)},   {"beta", spec.beta},
               {"psi", spec.psi},               {"phi", spec.phi},
               {"sigma_eps", spec.sigma_eps},   {"sigma_a", spec.sigma_a},
               {"seed", spec.seed}};
  ctx.writeJson("constructed_meta.json", j);
}

void cmdValidate(Context& ctx) {
  DailyPanel panel = loadConstructed(ctx);
  CsvTable t;
  t.header = {"window", "start", "end", "n", "min", "max", "sd", "narrow_flag"};
  const auto emit = [&](const std::string& name, Date s, Date e) {
    try {
      SupportSummary sum =
          validateSupport(panel, "a_clean", s, e, ctx.cfg.support_sd_threshold);
      t.rows.push_back({name, s.toIso(), e.toIso(), std::to_string(long(sum.n)),
                        formatDouble(sum.min), formatDouble(sum.max), formatDouble(sum.sd),
                        sum.narrow_flag ? "1" : "0"});
    } catch (const DomainError&) {
      t.rows.push_back({name, s.toIso(), e.toIso(), "0", "", "", "", ""});
    }
  };
  const Date first = panel.dates().front();
  const Date last = panel.dates().back();
  emit("full", first, last);
  emit("confirmatory", ctx.cfg.confirmatoryStart(), ctx.cfg.confirmatoryEnd());
  emit("pre_dencun", first, ctx.cfg.calendar.dencun - 1);
  emit("post_dencun", ctx.cfg.calendar.dencun, last);
  ctx.writeTable("support.csv", std::move(t));
}

const char* detName(Deterministic d) {
  switch (d) {
    case Deterministic::kNone:
      return "none";
    case Deterministic::kIntercept:
      return "intercept";
    case Deterministic::kTrend:
      return "trend";
  }
  return "?";
}

void cmdDiagnose(Context& ctx) {
  DailyPanel panel = loadConstructed(ctx);
  CsvTable t;
  t.header = {"series", "transform", "test",    "statistic", "p_value",
              "lags",   "deterministic", "reject_5pct", "bound_flag"};

  std::vector<std::string> series;
  for (const auto& name : {"a_clean", "log_basefee", "utilization", "scarcity", "d_star"}) {
    if (panel.has(name)) series.push_back(name);
  }
  const auto emitSuite = [&](const std::string& name, const std::string& transform,
                             const Eigen::VectorXd& x, Deterministic det) {
    UnitRootSuite s = unitRootSuite(x, det);
    const auto row = [&](const char* test, const TestResult& r) {
      t.rows.push_back({name, transform, test, formatDouble(r.statistic),
                        formatDouble(r.p_value), std::to_string(r.lags_used),
                        detName(r.deterministic), r.reject_at_5pct ? "1" : "0",
                        r.p_at_table_bound ? "1" : "0"});
    };
    row("adf", s.adf);
    row("kpss", s.kpss);
    row("pp", s.pp);
  };

  for (const auto& name : series) {
    std::vector<Eigen::Index> rows = completeRows(panel, {name});
    Eigen::VectorXd level = subset(panel.col(name), rows);
    // Levels tests include a deterministic trend; differences an intercept.
    emitSuite(name, "level", level, Deterministic::kTrend);
    Eigen::VectorXd diffed(level.size() - 1);
    for (Eigen::Index i = 1; i < level.size(); ++i) diffed[i - 1] = level[i] - level[i - 1];
    emitSuite(name, "first_diff", diffed, Deterministic::kIntercept);
  }

  // Engle-Granger on the long-run relation.
  {
    json meta = loadConstructedMeta(ctx);
    std::vector<Eigen::Index> rows = completeRows(panel, {"log_basefee", "a_clean", "d_star"});
    ControlBlock controls = assembleControls(panel, meta, rows);
    Eigen::VectorXd y = subset(panel.col("log_basefee"), rows);
    Eigen::VectorXd a = subset(panel.col("a_clean"), rows);
    Eigen::MatrixXd X(y.size(), 1 + controls.X.cols());
    X.col(0) = a;
    if (controls.X.cols() > 0) X.rightCols(controls.X.cols()) = controls.X;
    std::vector<std::string> names = {"a"};
    for (const auto& n : controls.names) names.push_back(n);
    EngleGrangerResult eg = engleGranger(y, X, names);
    t.rows.push_back({"log_basefee~a_clean", "level", "engle_granger",
                      formatDouble(eg.test.statistic), formatDouble(eg.test.p_value),
                      std::to_string(eg.test.lags_used), "intercept",
                      eg.test.reject_at_5pct ? "1" : "0", eg.test.zero_residual ? "1" : "0"});
  }
  ctx.writeTable("diagnostics.csv", std::move(t));

  // VIF for the confirmatory regressor block.
  {
    json meta = loadConstructedMeta(ctx);
    std::vector<Eigen::Index> rows = completeRows(panel, {"a_clean", "d_star"});
    ControlBlock controls = assembleControls(panel, meta, rows);
    Eigen::MatrixXd X(Eigen::Index(rows.size()), 1 + controls.X.cols());
    X.col(0) = subset(panel.col("a_clean"), rows);
    if (controls.X.cols() > 0) X.rightCols(controls.X.cols()) = controls.X;
    std::vector<std::string> names = {"a_clean"};
    for (const auto& n : controls.names) names.push_back(n);
    auto vifs = varianceInflation(X, names);
    CsvTable v;
    v.header = {"column", "vif", "infinite"};
    for (const auto& e : vifs) {
      v.rows.push_back({e.name, e.infinite ? "" : formatDouble(e.vif), e.infinite ? "1" : "0"});
    }
    ctx.writeTable("vif.csv", std::move(v));
  }
}

void cmdEstimate(Context& ctx) {
  DailyPanel panel = loadConstructed(ctx);
  json meta = loadConstructedMeta(ctx);

  CsvTable t;
  t.header = {"model", "outcome", "term",   "coef", "se",  "p_value",     "ci_lo",
              "ci_hi", "n_obs",   "adj_r2", "cov",  "semi_el_10pp", "q_value"};

  std::vector<std::string> family;
  for (const auto& outcome : ctx.cfg.fdr_family) {
    if (panel.has(outcome)) family.push_back(outcome);
  }
  if (family.empty()) family.push_back("log_basefee");

  std::vector<OutcomeFit> fits;
  for (const auto& outcome : family) {
    fits.push_back(fitOutcome(ctx, panel, meta, outcome, ctx.report));
  }

  // BH over the confirmatory family (ECM short-run p-values).
  Eigen::VectorXd family_p(Eigen::Index(fits.size()));
  std::vector<std::string> family_names;
  for (size_t i = 0; i < fits.size(); ++i) {
    family_p[Eigen::Index(i)] = fits[i].ecm.diff_stage.pOf("d.a");
    family_names.push_back(fits[i].outcome);
  }
  FdrResult fdr = bhFdr(family_names, family_p);

  CsvTable ecm_table;
  ecm_table.header = {"outcome",        "psi",    "psi_se", "phi",     "phi_se",
                      "half_life_days", "eg_stat", "eg_p",  "n_obs",   "semi_el_10pp",
                      "q_value",        "gate_passed"};

  for (size_t i = 0; i < fits.size(); ++i) {
    const auto& f = fits[i];
    appendCoefficientRows(t, "levels_hac", f.outcome, f.levels_hac);
    appendCoefficientRows(t, "levels_prais_winsten", f.outcome, f.levels_pw);
    appendCoefficientRows(t, "ecm_diff", f.outcome, f.ecm.diff_stage);
    t.rows.push_back({"ecm", f.outcome, "half_life_days", formatDouble(f.ecm.half_life_days), "",
                      "", "", "", std::to_string(long(f.ecm.diff_stage.n_obs)), "", "",
                      formatDouble(semiElasticity10pp(f.ecm.psi)),
                      formatDouble(fdr.q_values[Eigen::Index(i)])});

    ecm_table.rows.push_back(
        {f.outcome, formatDouble(f.ecm.psi), formatDouble(f.ecm.psi_se), formatDouble(f.ecm.phi),
         formatDouble(f.ecm.phi_se), formatDouble(f.ecm.half_life_days),
         formatDouble(f.ecm.gate.test.statistic), formatDouble(f.ecm.gate.test.p_value),
         std::to_string(long(f.ecm.diff_stage.n_obs)),
         formatDouble(semiElasticity10pp(f.ecm.psi)), formatDouble(fdr.q_values[Eigen::Index(i)]),
         f.ecm.gate_passed ? "1" : "0"});
  }

  // Koyck, regime split, piecewise spline for the primary outcome.
  const std::string primary = family.front();
  {
    std::vector<Eigen::Index> rows = completeRows(panel, {primary, "a_clean", "d_star"});
    ControlBlock controls = assembleControls(panel, meta, rows);
    Eigen::VectorXd y = subset(panel.col(primary), rows);
    Eigen::VectorXd a = subset(panel.col("a_clean"), rows);

    KoyckResult koyck = koyckFit(y, a, controls.X, controls.names, ctx.cfg.hac_lag_levels);
    appendCoefficientRows(t, "koyck", primary, koyck.fit);
    t.rows.push_back({"koyck", primary, "long_run_multiplier",
                      formatDouble(koyck.long_run_multiplier), formatDouble(koyck.long_run_se), "",
                      "", "", std::to_string(long(koyck.fit.n_obs)), "", "",
                      koyck.divergent ? "divergent" : "", ""});

    // Pre/post-Dencun split.
    Eigen::VectorXd pre(Eigen::Index(rows.size())), post(Eigen::Index(rows.size()));
    for (size_t i = 0; i < rows.size(); ++i) {
      const bool after = panel.dates()[size_t(rows[i])] >= ctx.cfg.calendar.dencun;
      pre[Eigen::Index(i)] = after ? 0.0 : 1.0;
      post[Eigen::Index(i)] = after ? 1.0 : 0.0;
    }
    // Regime dummies are constant within a split; keep the rest.
    std::vector<Eigen::Index> keep_cols;
    std::vector<std::string> split_names;
    for (size_t c = 0; c < controls.names.size(); ++c) {
      if (controls.names[c].rfind("regime_", 0) == 0) continue;
      keep_cols.push_back(Eigen::Index(c));
      split_names.push_back(controls.names[c]);
    }
    Eigen::MatrixXd split_controls(Eigen::Index(rows.size()), Eigen::Index(keep_cols.size()));
    for (size_t c = 0; c < keep_cols.size(); ++c) {
      split_controls.col(Eigen::Index(c)) = controls.X.col(keep_cols[c]);
    }
    auto splits = regimeSplit(y, a, split_controls, split_names,
                              {{"pre_dencun", pre}, {"post_dencun", post}},
                              ctx.cfg.hac_lag_levels);
    for (const auto& s : splits) {
      if (s.skipped) {
        ctx.warn(s.warning);
        t.rows.push_back({"regime_split", primary, s.regime, "", "", "", "", "",
                          std::to_string(long(s.n_obs)), "", "", "", ""});
        continue;
      }
      const int ia = s.fit.indexOf("a");
      t.rows.push_back({"regime_split", primary, s.regime, formatDouble(s.fit.coef[ia]),
                        formatDouble(s.fit.se[ia]), formatDouble(s.fit.p_values[ia]),
                        formatDouble(s.fit.ci_lo[ia]), formatDouble(s.fit.ci_hi[ia]),
                        std::to_string(long(s.n_obs)), formatDouble(s.fit.adj_r2),
                        covKindName(s.fit.cov_kind, s.fit.hac_lag),
                        formatDouble(s.semi_elasticity_10pp), ""});
    }

    PiecewiseResult spline =
        piecewiseFit(y, a, controls.X, controls.names, ctx.cfg.knot, ctx.cfg.hac_lag_levels);
    t.rows.push_back({"spline", primary, "below_knot", formatDouble(spline.below_slope),
                      formatDouble(spline.below_se), "", "", "",
                      std::to_string(long(spline.fit.n_obs)), "", "",
                      formatDouble(semiElasticity10pp(spline.below_slope)), ""});
    t.rows.push_back({"spline", primary, "above_knot", formatDouble(spline.above_slope),
                      formatDouble(spline.above_se), "", "", "",
                      std::to_string(long(spline.fit.n_obs)), "", "",
                      spline.above_undefined ? "undefined"
                                             : formatDouble(semiElasticity10pp(spline.above_slope)),
                      ""});
  }

  ctx.writeTable("estimates.csv", std::move(t));
  ctx.writeTable("ecm.csv", std::move(ecm_table));

  json j;
  j["hac_lag_levels"] = ctx.cfg.hac_lag_levels;
  j["hac_lag_diff"] = ctx.cfg.hac_lag_diff;
  j["ecm_gate_alpha"] = ctx.cfg.ecm_gate_alpha;
  j["ecm_gate_mode"] = ctx.cfg.ecm_gate_warn_only ? "warn" : "fail";
  j["knot"] = ctx.cfg.knot;
  j["fdr_family"] = family;
  j["fdr_basis"] = "ecm short-run p-values";
  j["warnings"] = ctx.report.warnings;
  ctx.writeJson("estimates_meta.json", j);
}

void cmdLp(Context& ctx) {
  DailyPanel panel = loadConstructed(ctx);
  json meta = loadConstructedMeta(ctx);
  std::vector<Eigen::Index> rows = completeRows(panel, {"log_basefee", "a_clean", "d_star"});
  ControlBlock controls = assembleControls(panel, meta, rows);
  Eigen::VectorXd y = subset(panel.col("log_basefee"), rows);
  Eigen::VectorXd a = subset(panel.col("a_clean"), rows);

  const Eigen::Index n = y.size() - 1;
  Eigen::VectorXd dy(n), da(n);
  Eigen::MatrixXd dc(n, controls.X.cols());
  for (Eigen::Index t = 1; t <= n; ++t) {
    dy[t - 1] = y[t] - y[t - 1];
    da[t - 1] = a[t] - a[t - 1];
    for (Eigen::Index c = 0; c < controls.X.cols(); ++c) {
      dc(t - 1, c) = controls.X(t, c) - controls.X(t - 1, c);
    }
  }
  LocalProjectionOptions opt;
  opt.max_horizon = ctx.cfg.lp_horizon;
  opt.hac_lag = ctx.cfg.hac_lag_diff;
  IrfResult irf = localProjections(dy, da, dc, controls.names, opt);

  CsvTable t;
  t.header = {"horizon", "beta", "se", "band_lo", "band_hi", "cumulative_pct_10pp"};
  for (size_t i = 0; i < irf.horizons.size(); ++i) {
    const auto h = Eigen::Index(i);
    t.rows.push_back({std::to_string(irf.horizons[i]), formatDouble(irf.beta_h[h]),
                      formatDouble(irf.se_h[h]), formatDouble(irf.band_lo[h]),
                      formatDouble(irf.band_hi[h]), formatDouble(irf.cumulative_pct_10pp[h])});
  }
  ctx.writeTable("lp.csv", std::move(t));
}

void cmdIv(Context& ctx) {
  DailyPanel panel = loadConstructed(ctx);
  json meta = loadConstructedMeta(ctx);
  if (ctx.cfg.weights_path.empty()) throw ConfigError("iv: config key 'weights' is required");
  if (ctx.cfg.shocks_path.empty()) throw ConfigError("iv: config key 'shocks' is required");

  CsvTable wt = readCsv(ctx.cfg.weights_path);
  const int c_chain = wt.columnIndex("chain");
  const int c_weight = wt.columnIndex("weight");
  if (c_chain < 0 || c_weight < 0) {
    throw SchemaError(ctx.cfg.weights_path + ": weights file needs columns (chain,weight)");
  }
  std::map<std::string, double> weights;
  for (const auto& row : wt.rows) {
    weights[lower(row[c_chain])] = std::strtod(row[c_weight].c_str(), nullptr);
  }

  // Per-chain outage indicators from the shock catalog.
  ShockCatalog catalog = ShockCatalog::fromCsv(ctx.cfg.shocks_path);
  std::map<std::string, Eigen::VectorXd> chain_outages;
  for (const auto& [chain, w] : weights) {
    (void)w;
    chain_outages[chain] = Eigen::VectorXd::Zero(panel.rows());
  }
  for (const auto& e : catalog.entries) {
    if (lower(e.category).find("outage") == std::string::npos) continue;
    const std::string name = lower(e.name);
    bool matched = false;
    for (auto& [chain, series] : chain_outages) {
      if (name.find(chain) == std::string::npos) continue;
      matched = true;
      auto idx = panel.indexOf(e.date);
      if (idx) {
        series[*idx] = 1.0;
      } else {
        ctx.warn("iv: outage '" + e.name + "' outside the panel range");
      }
    }
    if (!matched) {
      throw SchemaError("iv: outage event '" + e.name + "' matches no weighted chain");
    }
  }
  std::vector<std::pair<std::string, Eigen::VectorXd>> shocks(chain_outages.begin(),
                                                              chain_outages.end());
  Eigen::VectorXd z_full = buildShiftShare(weights, shocks);

  std::vector<Eigen::Index> rows = completeRows(panel, {"log_basefee", "a_clean", "d_star"});
  ControlBlock controls = assembleControls(panel, meta, rows);
  Eigen::VectorXd y = subset(panel.col("log_basefee"), rows);
  Eigen::VectorXd a = subset(panel.col("a_clean"), rows);
  Eigen::VectorXd z = subset(z_full, rows);

  CsvTable t;
  t.header = {"spec",        "instrument", "beta", "se", "p_value", "semi_el_10pp",
              "first_stage_f", "partial_r2", "n"};
  EstimateResult ols = olsHac(
      y,
      [&] {
        Eigen::MatrixXd X(y.size(), 1 + controls.X.cols());
        X.col(0) = a;
        if (controls.X.cols() > 0) X.rightCols(controls.X.cols()) = controls.X;
        return X;
      }(),
      [&] {
        std::vector<std::string> n = {"a"};
        for (const auto& c : controls.names) n.push_back(c);
        return n;
      }(),
      ctx.cfg.hac_lag_diff);
  t.rows.push_back({"ols_hac", "", formatDouble(ols.coefOf("a")), formatDouble(ols.seOf("a")),
                    formatDouble(ols.pOf("a")), formatDouble(semiElasticity10pp(ols.coefOf("a"))),
                    "", "", std::to_string(long(ols.n_obs))});

  IvResult tsls = twoSls(y, a, z, controls.X, controls.names, ctx.cfg.hac_lag_diff,
                         "shift_share_outage");
  t.rows.push_back({"iv_2sls", tsls.instrument_name, formatDouble(tsls.beta),
                    formatDouble(tsls.se), formatDouble(tsls.p),
                    formatDouble(semiElasticity10pp(tsls.beta)), formatDouble(tsls.first_stage_f),
                    formatDouble(tsls.partial_r2), std::to_string(long(tsls.n))});

  ControlFunctionResult cf = controlFunction(y, a, z, controls.X, controls.names,
                                             ctx.cfg.hac_lag_diff, "shift_share_outage");
  t.rows.push_back({"control_function", cf.iv.instrument_name, formatDouble(cf.iv.beta),
                    formatDouble(cf.iv.se), formatDouble(cf.iv.p),
                    formatDouble(semiElasticity10pp(cf.iv.beta)),
                    formatDouble(cf.iv.first_stage_f), formatDouble(cf.iv.partial_r2),
                    std::to_string(long(cf.iv.n))});
  t.rows.push_back({"control_function_vhat", cf.iv.instrument_name, formatDouble(cf.vhat_coef),
                    formatDouble(cf.vhat_se), formatDouble(cf.vhat_p), "", "", "",
                    std::to_string(long(cf.iv.n))});
  ctx.writeTable("iv.csv", std::move(t));
}

void cmdPower(Context& ctx) {
  DailyPanel panel = loadConstructed(ctx);
  json meta = loadConstructedMeta(ctx);

  CsvTable t;
  t.header = {"regime", "n",       "n_eff",    "sd_treatment", "min",    "max",
              "hac_se", "mde_beta", "mde_pct_10pp", "n_eff_clamped"};

  const auto emitRegime = [&](const std::string& name, Date s, Date e) {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index r = 0; r < panel.rows(); ++r) {
      const Date d = panel.dates()[size_t(r)];
      if (d < s || d > e) continue;
      if (std::isnan(panel.col("log_basefee")[r]) || std::isnan(panel.col("a_clean")[r]) ||
          std::isnan(panel.col("d_star")[r])) {
        continue;
      }
      rows.push_back(r);
    }
    if (rows.size() < 80) {
      ctx.warn("power: regime '" + name + "' has too few rows; skipped");
      return;
    }
    ControlBlock controls = assembleControls(panel, meta, rows);
    Eigen::VectorXd y = subset(panel.col("log_basefee"), rows);
    Eigen::VectorXd a = subset(panel.col("a_clean"), rows);
    Eigen::MatrixXd X(y.size(), 1 + controls.X.cols());
    X.col(0) = a;
    if (controls.X.cols() > 0) X.rightCols(controls.X.cols()) = controls.X;
    std::vector<std::string> names = {"a"};
    for (const auto& c : controls.names) names.push_back(c);
    EstimateResult est = olsHac(y, X, names, ctx.cfg.hac_lag_levels);

    // Treatment residual autocorrelations for the Kish deflation.
    Design ad = withIntercept(a, controls.X, controls.names);
    Eigen::VectorXd a_resid = olsFit(ad).resid;
    const int L = std::min<int>(ctx.cfg.hac_lag_levels, int(a_resid.size() / 4));
    Eigen::VectorXd rho = acf(a_resid, std::max(1, L));
    PowerResult p = mdePower(est.seOf("a"), Eigen::Index(rows.size()), sampleSd(a), rho);

    t.rows.push_back({name, std::to_string(long(p.n)), formatDouble(p.n_eff),
                      formatDouble(p.sd_treatment), formatDouble(a.minCoeff()),
                      formatDouble(a.maxCoeff()), formatDouble(p.hac_se),
                      formatDouble(p.mde_beta), formatDouble(p.mde_pct_10pp),
                      p.n_eff_clamped ? "1" : "0"});
  };

  const Date first = panel.dates().front();
  const Date last = panel.dates().back();
  emitRegime("pre_dencun", first, ctx.cfg.calendar.dencun - 1);
  emitRegime("post_dencun", ctx.cfg.calendar.dencun, last);
  ctx.writeTable("power.csv", std::move(t));
}

void cmdCounterfactual(Context& ctx) {
  DailyPanel panel = loadConstructed(ctx);

  std::vector<Eigen::Index> rows;
  for (Eigen::Index r = 0; r < panel.rows(); ++r) {
    const Date d = panel.dates()[size_t(r)];
    if (d < ctx.cfg.cfact_start || d > ctx.cfg.cfact_end) continue;
    rows.push_back(r);
  }
  if (rows.size() < 90) {
    throw DomainError("counterfactual: window has fewer than 90 panel rows");
  }

  std::vector<std::string> reg_names = {"a_clean", "d_star"};
  const bool has_price = panel.has("eth_price_mean") && panel.has("eth_price_close");
  if (has_price) reg_names.push_back("log_eth_price");

  Eigen::VectorXd y = subset(panel.col("log_basefee"), rows);
  Eigen::MatrixXd X(Eigen::Index(rows.size()), Eigen::Index(reg_names.size()));
  X.col(0) = subset(panel.col("a_clean"), rows);
  X.col(1) = subset(panel.col("d_star"), rows);
  if (has_price) {
    Eigen::VectorXd p = subset(panel.col("eth_price_mean"), rows);
    for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = p[i] > 0.0 ? std::log(p[i]) : kNaN;
    X.col(2) = p;
  }
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (std::isnan(y[i])) throw DomainError("counterfactual: missing log fee inside the window");
    for (Eigen::Index c = 0; c < X.cols(); ++c) {
      if (std::isnan(X(i, c))) {
        throw DomainError("counterfactual: missing regressor '" + reg_names[size_t(c)] +
                          "' inside the window");
      }
    }
  }

  StateSpaceFit fit = fitStateSpace(y, X, reg_names, {});

  std::vector<double> a_window(X.col(0).data(), X.col(0).data() + X.rows());
  const double a_fixed = quantileLinear(a_window, ctx.cfg.cfact_percentile);
  CounterfactualPath cf = counterfactualPath(fit, "a_clean", a_fixed);

  CsvTable t;
  t.header = {"date", "log_fee", "smoothed", "cf", "cf_lo", "cf_hi"};
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto r = Eigen::Index(i);
    t.rows.push_back({panel.dates()[size_t(rows[i])].toIso(), formatDouble(y[r]),
                      formatDouble(cf.observed_signal[r]), formatDouble(cf.path[r]),
                      formatDouble(cf.band_lo[r]), formatDouble(cf.band_hi[r])});
  }
  ctx.writeTable("counterfactual.csv", std::move(t));

  json j;
  j["window_start"] = ctx.cfg.cfact_start.toIso();
  j["window_end"] = ctx.cfg.cfact_end.toIso();
  j["percentile"] = ctx.cfg.cfact_percentile;
  j["a_fixed"] = a_fixed;
  j["loglik"] = fit.loglik;
  j["var_obs"] = fit.var_obs;
  j["var_level"] = fit.var_level;
  j["var_slope"] = fit.var_slope;
  j["gas_column_note"] = "GAS_t uses gas_used_total (total L1 gas)";

  if (!panel.has("gas_used_total") || !panel.has("tip_median_gwei") || !has_price ||
      !panel.has("basefee_median_gwei")) {
    ctx.warn("counterfactual: welfare columns missing; emitting the path only");
    ctx.writeJson("cfact_meta.json", j);
    return;
  }

  Eigen::VectorXd bf_obs = subset(panel.col("basefee_median_gwei"), rows);
  Eigen::VectorXd tip = subset(panel.col("tip_median_gwei"), rows);
  Eigen::VectorXd gas = subset(panel.col("gas_used_total"), rows);
  Eigen::VectorXd price = subset(
      panel.col(ctx.cfg.cfact_price == "close" ? "eth_price_close" : "eth_price_mean"), rows);

  Eigen::VectorXd bf_cf = cf.path.array().exp();
  Eigen::VectorXd bf_lo = cf.band_lo.array().exp();
  Eigen::VectorXd bf_hi = cf.band_hi.array().exp();
  WelfareResult welfare =
      welfareUsd(bf_obs, bf_cf, tip, gas, price, ctx.cfg.cfact_include_tip, &bf_lo, &bf_hi);

  CsvTable w;
  w.header = {"date", "bf_obs", "bf_cf", "usd_daily", "usd_lo", "usd_hi"};
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto r = Eigen::Index(i);
    w.rows.push_back({panel.dates()[size_t(rows[i])].toIso(), formatDouble(bf_obs[r]),
                      formatDouble(bf_cf[r]), formatDouble(welfare.usd_daily[r]),
                      formatDouble(welfare.usd_daily_lo[r]),
                      formatDouble(welfare.usd_daily_hi[r])});
  }
  ctx.writeTable("welfare.csv", std::move(w));

  // Scenario grid mirroring the sensitivity table: percentile x price, with
  // base-only and base+tip totals.
  CsvTable grid;
  grid.header = {"baseline_percentile", "a_fixed", "price", "usd_total_base",
                 "usd_total_base_tip"};
  for (double pct : {0.05, 0.25}) {
    const double af = quantileLinear(a_window, pct);
    CounterfactualPath path = counterfactualPath(fit, "a_clean", af);
    Eigen::VectorXd cf_gwei = path.path.array().exp();
    for (const std::string price_kind : {"mean", "close"}) {
      Eigen::VectorXd p = subset(
          panel.col(price_kind == "close" ? "eth_price_close" : "eth_price_mean"), rows);
      WelfareResult base = welfareUsd(bf_obs, cf_gwei, tip, gas, p, false);
      WelfareResult base_tip = welfareUsd(bf_obs, cf_gwei, tip, gas, p, true);
      char pct_buf[16];
      std::snprintf(pct_buf, sizeof(pct_buf), "p%02d", int(pct * 100 + 0.5));
      grid.rows.push_back({pct_buf, formatDouble(af), price_kind,
                           formatDouble(base.usd_total), formatDouble(base_tip.usd_total)});
    }
  }
  ctx.writeTable("welfare_grid.csv", std::move(grid));

  j["usd_total"] = welfare.usd_total;
  j["usd_total_lo"] = welfare.usd_total_lo;
  j["usd_total_hi"] = welfare.usd_total_hi;
  j["price"] = ctx.cfg.cfact_price;
  j["include_tip"] = ctx.cfg.cfact_include_tip;
  ctx.writeJson("cfact_meta.json", j);
}

void cmdPlacebo(Context& ctx) {
  DailyPanel panel = loadConstructed(ctx);
  json meta = loadConstructedMeta(ctx);
  DailyPanel shuffled = placeboShuffle(panel, "a_clean", ctx.cfg.seed);

  OutcomeFit fit = fitOutcome(ctx, shuffled, meta, "log_basefee", ctx.report);
  CsvTable t;
  t.header = {"seed", "psi", "psi_se", "p_value", "significant_5pct"};
  const double p = fit.ecm.diff_stage.pOf("d.a");
  t.rows.push_back({std::to_string(ctx.cfg.seed), formatDouble(fit.ecm.psi),
                    formatDouble(fit.ecm.psi_se), formatDouble(p), p <= 0.05 ? "1" : "0"});
  ctx.writeTable("placebo.csv", std::move(t));
}

void updateManifest(Context& ctx) {
  const fs::path path = ctx.out / "manifest.json";
  json manifest;
  manifest["version"] = kVersion;
  manifest["config"] = hex64(ctx.cfg.hash());
  json existing_artifacts = json::object();
  if (fs::exists(path)) {
    std::ifstream f(path);
    json old;
    f >> old;
    if (old.contains("artifacts")) existing_artifacts = old["artifacts"];
  }
  for (const auto& name : ctx.report.artifacts) {
    std::ifstream f(ctx.out / name, std::ios::binary);
    std::ostringstream buf;
    buf << f.rdbuf();
    existing_artifacts[name] = hex64(fnv1a64(buf.str()));
  }
  manifest["artifacts"] = existing_artifacts;
  std::ofstream f(path, std::ios::binary);
  f << manifest.dump(2) << "\n";
}

}  // namespace

Command commandFromName(const std::string& name) {
  if (name == "validate") return Command::kValidate;
  if (name == "construct") return Command::kConstruct;
  if (name == "diagnose") return Command::kDiagnose;
  if (name == "estimate") return Command::kEstimate;
  if (name == "lp") return Command::kLp;
  if (name == "iv") return Command::kIv;
  if (name == "power") return Command::kPower;
  if (name == "counterfactual") return Command::kCounterfactual;
  if (name == "synth") return Command::kSynth;
  if (name == "placebo") return Command::kPlacebo;
  throw ConfigError("unknown command '" + name + "'");
}

std::string commandName(Command c) {
  switch (c) {
    case Command::kValidate: return "validate";
    case Command::kConstruct: return "construct";
    case Command::kDiagnose: return "diagnose";
    case Command::kEstimate: return "estimate";
    case Command::kLp: return "lp";
    case Command::kIv: return "iv";
    case Command::kPower: return "power";
    case Command::kCounterfactual: return "counterfactual";
    case Command::kSynth: return "synth";
    case Command::kPlacebo: return "placebo";
  }
  return "?";
}

RunReport runReport(const RunConfig& config, const std::vector<Command>& commands) {
  Context ctx{config, fs::path(config.out_dir), {}};
  fs::create_directories(ctx.out);
  for (Command c : commands) {
    switch (c) {
      case Command::kValidate: cmdValidate(ctx); break;
      case Command::kConstruct: cmdConstruct(ctx); break;
      case Command::kDiagnose: cmdDiagnose(ctx); break;
      case Command::kEstimate: cmdEstimate(ctx); break;
      case Command::kLp: cmdLp(ctx); break;
      case Command::kIv: cmdIv(ctx); break;
      case Command::kPower: cmdPower(ctx); break;
      case Command::kCounterfactual: cmdCounterfactual(ctx); break;
      case Command::kSynth: cmdSynth(ctx); break;
      case Command::kPlacebo: cmdPlacebo(ctx); break;
    }
  }
  updateManifest(ctx);
  return ctx.report;
}

}  // namespace feekit
