#include "feekit/dates.hpp"

#include <chrono>
#include <cstdio>

#include "feekit/errors.hpp"

namespace feekit {

namespace {

std::chrono::year_month_day toYmdImpl(std::int32_t days) {
  using namespace std::chrono;
  return year_month_day{sys_days{std::chrono::days{days}}};
}

}  // namespace

Date Date::fromYmd(int year, unsigned month, unsigned day) {
  using namespace std::chrono;
  year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
  if (!ymd.ok()) {
    throw ParseError("invalid calendar date: " + std::to_string(year) + "-" +
                     std::to_string(month) + "-" + std::to_string(day));
  }
  return Date(static_cast<std::int32_t>(sys_days{ymd}.time_since_epoch().count()));
}

Date Date::parseIso(std::string_view text) {
  int y = 0;
  unsigned m = 0, d = 0;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw ParseError("malformed ISO date '" + std::string(text) + "'");
  }
  for (size_t i = 0; i < text.size(); ++i) {
    if (i == 4 || i == 7) continue;
    if (text[i] < '0' || text[i] > '9') {
      throw ParseError("malformed ISO date '" + std::string(text) + "'");
    }
  }
  y = (text[0] - '0') * 1000 + (text[1] - '0') * 100 + (text[2] - '0') * 10 + (text[3] - '0');
  m = (text[5] - '0') * 10 + (text[6] - '0');
  d = (text[8] - '0') * 10 + (text[9] - '0');
  return fromYmd(y, m, d);
}

std::string Date::toIso() const {
  auto ymd = toYmdImpl(days_);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()),
                unsigned(ymd.day()));
  return std::string(buf);
}

int Date::year() const { return int(toYmdImpl(days_).year()); }
unsigned Date::month() const { return unsigned(toYmdImpl(days_).month()); }
unsigned Date::day() const { return unsigned(toYmdImpl(days_).day()); }

bool Date::isWeekendUtc() const {
  using namespace std::chrono;
  weekday wd{sys_days{days{days_}}};
  return wd == Saturday || wd == Sunday;
}

bool Date::isMonthEnd() const {
  using namespace std::chrono;
  auto ymd = toYmdImpl(days_);
  year_month_day_last last{ymd.year(), month_day_last{ymd.month()}};
  return ymd.day() == last.day();
}

bool Date::isQuarterStart() const {
  auto ymd = toYmdImpl(days_);
  unsigned m = unsigned(ymd.month());
  return unsigned(ymd.day()) == 1 && (m == 1 || m == 4 || m == 7 || m == 10);
}

}  // namespace feekit
