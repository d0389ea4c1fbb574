#include "feekit/panel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <set>

#include "feekit/csv.hpp"
#include "feekit/errors.hpp"
#include "feekit/stats.hpp"

namespace feekit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double parseNumeric(const std::string& field, const std::string& origin, size_t row,
                    const std::string& col) {
  if (field.empty()) return kNaN;
  const char* begin = field.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw ParseError(origin + ": row " + std::to_string(row) + ", column '" + col +
                     "': not a number: '" + field + "'");
  }
  return v;
}

}  // namespace

void UpgradeCalendar::validate() const {
  if (!(london < merge && merge < dencun)) {
    throw IntegrityError("upgrade calendar must satisfy london < merge < dencun");
  }
}

ShockCatalog ShockCatalog::fromCsv(const std::string& path) {
  CsvTable t = readCsv(path);
  const int c_cat = t.columnIndex("category");
  const int c_name = t.columnIndex("name");
  const int c_date = t.columnIndex("date");
  const int c_used = t.columnIndex("used_confirmatory");
  const int c_dur = t.columnIndex("duration_days");
  if (c_cat < 0 || c_name < 0 || c_date < 0 || c_used < 0 || c_dur < 0) {
    throw SchemaError(path +
                      ": shock catalog needs columns "
                      "(category,name,date,used_confirmatory,duration_days)");
  }
  ShockCatalog catalog;
  std::set<std::pair<std::string, std::int32_t>> seen;
  size_t row_no = 1;
  for (const auto& row : t.rows) {
    ++row_no;
    ShockEvent e;
    e.category = row[c_cat];
    e.name = row[c_name];
    e.date = Date::parseIso(row[c_date]);
    const std::string& used = row[c_used];
    e.used_confirmatory = (used == "1" || used == "Y" || used == "y" || used == "true");
    e.duration_days = int(parseNumeric(row[c_dur], path, row_no, "duration_days"));
    if (e.duration_days < 1) {
      throw IntegrityError(path + ": event '" + e.name + "' has duration_days < 1");
    }
    auto key = std::make_pair(e.name, e.date.daysSinceEpoch());
    if (!seen.insert(key).second) {
      throw IntegrityError(path + ": duplicate event (" + e.name + ", " + e.date.toIso() + ")");
    }
    catalog.entries.push_back(std::move(e));
  }
  return catalog;
}

void ShockCatalog::validate(const UpgradeCalendar& calendar) const {
  for (const auto& e : entries) {
    if (e.used_confirmatory && e.date >= calendar.dencun) {
      throw IntegrityError("event '" + e.name + "' on " + e.date.toIso() +
                           " is flagged confirmatory but falls on/after Dencun");
    }
  }
}

bool DailyPanel::has(const std::string& name) const { return index_.count(name) > 0; }

const Eigen::VectorXd& DailyPanel::col(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw SchemaError("panel has no column '" + name + "'");
  return columns_[it->second];
}

void DailyPanel::setDates(std::vector<Date> dates) {
  for (size_t i = 1; i < dates.size(); ++i) {
    if (!(dates[i - 1] < dates[i])) {
      throw IntegrityError("panel dates must be strictly increasing; violation at " +
                           dates[i].toIso());
    }
  }
  dates_ = std::move(dates);
  rebuildDateIndex();
}

void DailyPanel::rebuildDateIndex() {
  date_index_.clear();
  for (Eigen::Index i = 0; i < rows(); ++i) date_index_[dates_[size_t(i)].daysSinceEpoch()] = i;
}

void DailyPanel::addColumn(const std::string& name, Eigen::VectorXd values, ColumnMeta meta) {
  if (values.size() != rows()) {
    throw AlignmentError("column '" + name + "' length " + std::to_string(values.size()) +
                         " != panel rows " + std::to_string(rows()));
  }
  if (has(name)) throw IntegrityError("column '" + name + "' already present");
  if (meta.is_flag) {
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      const double v = values[i];
      if (!std::isnan(v) && v != 0.0 && v != 1.0) {
        throw IntegrityError("flag column '" + name + "' has non-binary value at row " +
                             std::to_string(i));
      }
    }
  }
  index_[name] = names_.size();
  names_.push_back(name);
  columns_.push_back(std::move(values));
  metas_.push_back(std::move(meta));
}

void DailyPanel::replaceColumn(const std::string& name, Eigen::VectorXd values) {
  auto it = index_.find(name);
  if (it == index_.end()) throw SchemaError("panel has no column '" + name + "'");
  if (values.size() != rows()) throw AlignmentError("replacement column length mismatch");
  columns_[it->second] = std::move(values);
}

const ColumnMeta& DailyPanel::meta(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw SchemaError("panel has no column '" + name + "'");
  return metas_[it->second];
}

ColumnMeta& DailyPanel::metaMutable(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw SchemaError("panel has no column '" + name + "'");
  return metas_[it->second];
}

std::optional<Eigen::Index> DailyPanel::indexOf(Date d) const {
  auto it = date_index_.find(d.daysSinceEpoch());
  if (it == date_index_.end()) return std::nullopt;
  return it->second;
}

std::vector<Eigen::Index> DailyPanel::gapsBefore() const {
  std::vector<Eigen::Index> out;
  for (size_t i = 1; i < dates_.size(); ++i) {
    if (dates_[i] - dates_[i - 1] != 1) out.push_back(Eigen::Index(i));
  }
  return out;
}

Eigen::VectorXd DailyPanel::diff(const std::string& name) const {
  const Eigen::VectorXd& x = col(name);
  Eigen::VectorXd d(rows());
  d.setConstant(kNaN);
  for (Eigen::Index i = 1; i < rows(); ++i) {
    if (dates_[size_t(i)] - dates_[size_t(i) - 1] == 1) d[i] = x[i] - x[i - 1];
  }
  return d;
}

Eigen::VectorXd DailyPanel::lagSeries(const Eigen::VectorXd& values) const {
  if (values.size() != rows()) throw AlignmentError("lagSeries length mismatch");
  Eigen::VectorXd l(rows());
  l.setConstant(kNaN);
  for (Eigen::Index i = 1; i < rows(); ++i) {
    if (dates_[size_t(i)] - dates_[size_t(i) - 1] == 1) l[i] = values[i - 1];
  }
  return l;
}

Eigen::VectorXd DailyPanel::lag(const std::string& name) const { return lagSeries(col(name)); }

DailyPanel DailyPanel::selectRows(const std::vector<Eigen::Index>& keep) const {
  DailyPanel out;
  std::vector<Date> d;
  d.reserve(keep.size());
  for (auto i : keep) d.push_back(dates_[size_t(i)]);
  out.setDates(std::move(d));
  for (size_t c = 0; c < names_.size(); ++c) {
    Eigen::VectorXd v(Eigen::Index(keep.size()));
    for (size_t r = 0; r < keep.size(); ++r) v[Eigen::Index(r)] = columns_[c][keep[r]];
    out.addColumn(names_[c], std::move(v), metas_[c]);
  }
  out.dropped_row_count = dropped_row_count;
  out.trimmed_row_count = trimmed_row_count;
  return out;
}

std::string PanelSchema::resolve(const std::string& canonical) const {
  auto it = renames.find(canonical);
  return it == renames.end() ? canonical : it->second;
}

const std::vector<std::string>& PanelSchema::requiredColumns() {
  static const std::vector<std::string> cols = {
      "date",          "l2_user_tx",      "l1_tx_raw",       "posting_tx",
      "basefee_median_gwei", "tip_median_gwei", "blob_fee_gwei",   "gas_used_total",
      "utilization",   "eth_logret",      "cex_logvol",      "rvol",
      "trends",        "stable_issuance", "eth_price_mean",  "eth_price_close"};
  return cols;
}

DailyPanel loadPanel(const std::string& path, const PanelSchema& schema) {
  CsvTable t = readCsv(path);

  std::vector<int> col_of;  // canonical order -> csv index
  const auto& required = PanelSchema::requiredColumns();
  for (const auto& canonical : required) {
    const std::string actual = schema.resolve(canonical);
    int idx = t.columnIndex(actual);
    if (idx < 0) {
      throw SchemaError(path + ": missing required column '" + actual + "' (for '" + canonical +
                        "')");
    }
    col_of.push_back(idx);
  }

  // Row rejection: missing treatment inputs or base fee, per the listwise rule.
  const std::vector<std::string> listwise = {"l2_user_tx", "l1_tx_raw", "posting_tx",
                                             "basefee_median_gwei"};

  std::vector<Date> dates;
  std::vector<std::vector<double>> data(required.size() - 1);
  std::set<std::int32_t> seen;
  int dropped = 0;
  size_t row_no = 1;
  for (const auto& row : t.rows) {
    ++row_no;
    Date d;
    try {
      d = Date::parseIso(row[col_of[0]]);
    } catch (const ParseError& e) {
      throw ParseError(path + ": row " + std::to_string(row_no) + ": " + e.what());
    }
    if (!seen.insert(d.daysSinceEpoch()).second) {
      throw IntegrityError(path + ": duplicate date " + d.toIso());
    }

    bool drop = false;
    for (const auto& name : listwise) {
      size_t k = size_t(std::find(required.begin(), required.end(), name) - required.begin());
      if (row[col_of[k]].empty()) {
        drop = true;
        break;
      }
    }
    if (drop) {
      ++dropped;
      continue;
    }

    dates.push_back(d);
    for (size_t c = 1; c < required.size(); ++c) {
      data[c - 1].push_back(parseNumeric(row[col_of[c]], path, row_no, required[c]));
    }
  }

  // Input rows may arrive unordered; sort by date (duplicates already rejected).
  std::vector<size_t> order(dates.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return dates[a] < dates[b]; });

  DailyPanel panel;
  std::vector<Date> sorted_dates;
  sorted_dates.reserve(dates.size());
  for (size_t i : order) sorted_dates.push_back(dates[i]);
  panel.setDates(std::move(sorted_dates));
  for (size_t c = 1; c < required.size(); ++c) {
    Eigen::VectorXd v(Eigen::Index(order.size()));
    for (size_t i = 0; i < order.size(); ++i) v[Eigen::Index(i)] = data[c - 1][order[i]];
    ColumnMeta meta;
    meta.source = path;
    panel.addColumn(required[c], std::move(v), meta);
  }
  panel.dropped_row_count = dropped;
  return panel;
}

void emitPanelCsv(const DailyPanel& panel, const std::string& path,
                  const std::vector<std::string>& comments) {
  CsvTable t;
  t.comments = comments;
  t.header.push_back("date");
  for (const auto& name : panel.columnNames()) t.header.push_back(name);
  for (Eigen::Index r = 0; r < panel.rows(); ++r) {
    std::vector<std::string> row;
    row.push_back(panel.dates()[size_t(r)].toIso());
    for (const auto& name : panel.columnNames()) row.push_back(formatDouble(panel.col(name)[r]));
    t.rows.push_back(std::move(row));
  }
  writeCsv(path, t);
}

DailyPanel readPanelCsv(const std::string& path) {
  CsvTable t = readCsv(path);
  int c_date = t.columnIndex("date");
  if (c_date < 0) throw SchemaError(path + ": missing 'date' column");
  std::vector<Date> dates;
  std::set<std::int32_t> seen;
  size_t row_no = 1;
  for (const auto& row : t.rows) {
    ++row_no;
    Date d;
    try {
      d = Date::parseIso(row[c_date]);
    } catch (const ParseError& e) {
      throw ParseError(path + ": row " + std::to_string(row_no) + ": " + e.what());
    }
    if (!seen.insert(d.daysSinceEpoch()).second) {
      throw IntegrityError(path + ": duplicate date " + d.toIso());
    }
    dates.push_back(d);
  }
  DailyPanel panel;
  panel.setDates(std::move(dates));
  for (size_t c = 0; c < t.header.size(); ++c) {
    if (int(c) == c_date) continue;
    Eigen::VectorXd v(Eigen::Index(t.rows.size()));
    for (size_t r = 0; r < t.rows.size(); ++r) {
      v[Eigen::Index(r)] = parseNumeric(t.rows[r][c], path, r + 2, t.header[c]);
    }
    ColumnMeta meta;
    meta.source = path;
    panel.addColumn(t.header[c], std::move(v), meta);
  }
  return panel;
}

DailyPanel winsorize(const DailyPanel& panel, const std::vector<std::string>& columns,
                     double tail) {
  if (tail < 0.0 || tail >= 0.5) throw DomainError("winsor tail must satisfy 0 <= tail < 0.5");
  DailyPanel out = panel;  // value semantics: cheap enough at daily scale
  for (const auto& name : columns) {
    const Eigen::VectorXd& x = panel.col(name);
    if (panel.meta(name).is_flag) throw DomainError("cannot winsorize flag column '" + name + "'");
    std::vector<double> finite;
    finite.reserve(size_t(x.size()));
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (!std::isnan(x[i])) finite.push_back(x[i]);
    }
    if (finite.empty()) continue;
    if (tail == 0.0) {
      auto& m = out.metaMutable(name);
      m.winsor_lo = *std::min_element(finite.begin(), finite.end());
      m.winsor_hi = *std::max_element(finite.begin(), finite.end());
      m.winsor_tail = 0.0;
      continue;
    }
    const auto& prev = panel.meta(name);
    double lo, hi;
    if (prev.winsor_tail && *prev.winsor_tail == tail && prev.winsor_lo && prev.winsor_hi) {
      // Already winsorized at this tail: reuse the recorded bounds.
      lo = *prev.winsor_lo;
      hi = *prev.winsor_hi;
    } else {
      lo = quantileLinear(finite, tail);
      hi = quantileLinear(finite, 1.0 - tail);
    }
    Eigen::VectorXd clipped = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (std::isnan(x[i])) continue;
      clipped[i] = std::min(std::max(x[i], lo), hi);
    }
    out.replaceColumn(name, std::move(clipped));
    auto& m = out.metaMutable(name);
    m.winsor_lo = lo;
    m.winsor_hi = hi;
    m.winsor_tail = tail;
  }
  return out;
}

SupportSummary validateSupport(const DailyPanel& panel, const std::string& treatment,
                               Date window_start, Date window_end, double sd_threshold) {
  const Eigen::VectorXd& x = panel.col(treatment);
  std::vector<double> vals;
  for (Eigen::Index i = 0; i < panel.rows(); ++i) {
    Date d = panel.dates()[size_t(i)];
    if (d < window_start || d > window_end) continue;
    const double v = x[i];
    if (std::isnan(v)) continue;
    if (v < -1e-12 || v > 1.0 + 1e-12) {
      throw DomainError("treatment '" + treatment + "' outside [0,1] at " + d.toIso());
    }
    vals.push_back(v);
  }
  if (vals.empty()) throw DomainError("empty support window");
  SupportSummary s;
  s.n = Eigen::Index(vals.size());
  s.min = *std::min_element(vals.begin(), vals.end());
  s.max = *std::max_element(vals.begin(), vals.end());
  Eigen::VectorXd v = Eigen::Map<Eigen::VectorXd>(vals.data(), Eigen::Index(vals.size()));
  s.sd = sampleSd(v);
  s.threshold = sd_threshold;
  s.narrow_flag = s.sd < sd_threshold;
  return s;
}

}  // namespace feekit
