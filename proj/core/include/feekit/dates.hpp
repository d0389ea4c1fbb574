#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace feekit {

/// UTC calendar day, stored as days since 1970-01-01.
class Date {
 public:
  Date() = default;
  explicit Date(std::int32_t days_since_epoch) : days_(days_since_epoch) {}

  static Date fromYmd(int year, unsigned month, unsigned day);
  /// Parses "YYYY-MM-DD". Throws ParseError on malformed input.
  static Date parseIso(std::string_view text);

  std::string toIso() const;

  int year() const;
  unsigned month() const;
  unsigned day() const;

  bool isWeekendUtc() const;    // Saturday or Sunday
  bool isMonthEnd() const;      // last day of the month
  bool isQuarterStart() const;  // Jan 1, Apr 1, Jul 1, Oct 1

  std::int32_t daysSinceEpoch() const { return days_; }

  Date operator+(int days) const { return Date(days_ + days); }
  Date operator-(int days) const { return Date(days_ - days); }
  std::int32_t operator-(Date other) const { return days_ - other.days_; }
  auto operator<=>(const Date&) const = default;

 private:
  std::int32_t days_ = 0;
};

}  // namespace feekit
