#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "feekit/dates.hpp"

namespace feekit {

/// Protocol upgrade boundaries defining the regime indicators.
struct UpgradeCalendar {
  Date london = Date::fromYmd(2021, 8, 5);
  Date merge = Date::fromYmd(2022, 9, 15);
  Date dencun = Date::fromYmd(2024, 3, 13);

  void validate() const;
};

struct ShockEvent {
  std::string category;
  std::string name;
  Date date;
  bool used_confirmatory = true;
  int duration_days = 1;
};

struct ShockCatalog {
  std::vector<ShockEvent> entries;

  static ShockCatalog fromCsv(const std::string& path);
  void validate(const UpgradeCalendar& calendar) const;
};

struct ColumnMeta {
  std::string source;  // provenance: file or producing step
  std::optional<double> winsor_lo, winsor_hi;
  std::optional<double> winsor_tail;
  bool is_flag = false;
  int clipped_rows = 0;  // rows altered by a cap/clip step
};

/// Daily UTC panel: strictly increasing dates, one row per day where present.
/// Calendar gaps are kept explicit (recorded in gapsBefore), never filled.
/// Missing values are NaN. Immutable by convention after construction.
class DailyPanel {
 public:
  const std::vector<Date>& dates() const { return dates_; }
  Eigen::Index rows() const { return Eigen::Index(dates_.size()); }

  bool has(const std::string& name) const;
  const Eigen::VectorXd& col(const std::string& name) const;
  const std::vector<std::string>& columnNames() const { return names_; }

  void setDates(std::vector<Date> dates);
  void addColumn(const std::string& name, Eigen::VectorXd values, ColumnMeta meta = {});
  void replaceColumn(const std::string& name, Eigen::VectorXd values);

  const ColumnMeta& meta(const std::string& name) const;
  ColumnMeta& metaMutable(const std::string& name);

  std::optional<Eigen::Index> indexOf(Date d) const;

  /// Rows whose preceding calendar day is absent from the panel (first row
  /// excluded): transformations that difference or lag across these rows
  /// produce NaN instead of silently bridging the gap.
  std::vector<Eigen::Index> gapsBefore() const;

  /// One-day difference honoring calendar adjacency; NaN at gaps and row 0.
  Eigen::VectorXd diff(const std::string& name) const;
  /// One-day lag honoring calendar adjacency; NaN at gaps and row 0.
  Eigen::VectorXd lag(const std::string& name) const;
  Eigen::VectorXd lagSeries(const Eigen::VectorXd& values) const;

  DailyPanel selectRows(const std::vector<Eigen::Index>& keep) const;

  int dropped_row_count = 0;  // rows removed at load time (missing treatment/outcome)
  int trimmed_row_count = 0;  // rows removed by the pre-London low-adoption trim

 private:
  std::vector<Date> dates_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, size_t> index_;
  std::vector<Eigen::VectorXd> columns_;
  std::vector<ColumnMeta> metas_;
  std::unordered_map<std::int32_t, Eigen::Index> date_index_;

  void rebuildDateIndex();
};

/// Canonical raw input columns. A schema maps canonical names to actual CSV
/// headers (identity by default).
struct PanelSchema {
  std::map<std::string, std::string> renames;  // canonical -> file header

  std::string resolve(const std::string& canonical) const;
  static const std::vector<std::string>& requiredColumns();
};

/// Loads the raw daily CSV. Drops (and counts) rows missing any treatment
/// input or the base fee; parses dates strictly; rejects duplicates.
DailyPanel loadPanel(const std::string& path, const PanelSchema& schema = {});

/// Emits the panel in the standard CSV schema (ISO dates, round-trip doubles).
void emitPanelCsv(const DailyPanel& panel, const std::string& path,
                  const std::vector<std::string>& comments = {});

/// Reads a panel previously written by emitPanelCsv (or any CSV with a date
/// column plus numeric columns).
DailyPanel readPanelCsv(const std::string& path);

/// Two-sided winsorization at the given tail fraction; order statistics use
/// linear interpolation. Clip bounds and the tail are recorded in column
/// metadata; a column already winsorized at the same tail reuses its recorded
/// bounds, which makes the operation idempotent.
DailyPanel winsorize(const DailyPanel& panel, const std::vector<std::string>& columns,
                     double tail);

struct SupportSummary {
  double min = 0.0, max = 0.0, sd = 0.0;
  Eigen::Index n = 0;
  bool narrow_flag = false;  // sd below threshold
  double threshold = 0.05;
};

/// Treatment-support diagnostics over a date window (inclusive).
SupportSummary validateSupport(const DailyPanel& panel, const std::string& treatment,
                               Date window_start, Date window_end, double sd_threshold = 0.05);

}  // namespace feekit
