#include "fundtrack/dates.hpp"

#include <array>
#include <cstdio>
#include <stdexcept>

namespace fundtrack {

namespace {

bool is_leap(int y) { return y % 4 == 0 && (y % 100 != 0 || y % 400 == 0); }

int days_in_month(int y, int m) {
  static constexpr std::array<int, 12> kDays = {31, 28, 31, 30, 31, 30,
                                                31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap(y)) return 29;
  return kDays[static_cast<std::size_t>(m - 1)];
}

// Proleptic Gregorian day count, epoch 1970-01-01. Era-based arithmetic keeps
// the conversion branch-free over the full int range.
int days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy =
      static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<int>(doe) - 719468;
}

CivilDate civil_from_days(int z) {
  z += 719468;
  const int era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const int y = static_cast<int>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return CivilDate{y + (m <= 2), static_cast<int>(m), static_cast<int>(d)};
}

}  // namespace

Date make_date(int year, int month, int day) {
  if (month < 1 || month > 12 || day < 1 || day > days_in_month(year, month)) {
    throw std::invalid_argument("make_date: invalid calendar date " +
                                std::to_string(year) + "-" +
                                std::to_string(month) + "-" +
                                std::to_string(day));
  }
  return days_from_civil(year, month, day);
}

CivilDate civil_from_date(Date d) { return civil_from_days(d); }

Date parse_date(const std::string& text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw std::invalid_argument("parse_date: expected YYYY-MM-DD, got \"" +
                                text + "\"");
  }
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (i == 4 || i == 7) continue;
    if (text[i] < '0' || text[i] > '9') {
      throw std::invalid_argument("parse_date: expected YYYY-MM-DD, got \"" +
                                  text + "\"");
    }
  }
  const int y = std::stoi(text.substr(0, 4));
  const int m = std::stoi(text.substr(5, 2));
  const int d = std::stoi(text.substr(8, 2));
  if (m < 1 || m > 12 || d < 1 || d > days_in_month(y, m)) {
    throw std::invalid_argument("parse_date: non-existent date \"" + text +
                                "\"");
  }
  return days_from_civil(y, m, d);
}

std::string format_date(Date d) {
  const CivilDate c = civil_from_days(d);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", c.year, c.month, c.day);
  return buf;
}

int weekday(Date d) {
  // 1970-01-01 was a Thursday (index 3 with Monday = 0).
  int w = (d + 3) % 7;
  return w < 0 ? w + 7 : w;
}

bool is_weekend(Date d) { return weekday(d) >= 5; }

bool is_quarter_end(Date d) {
  const CivilDate c = civil_from_date(d);
  return (c.month == 3 || c.month == 12) ? c.day == 31
         : (c.month == 6 || c.month == 9) ? c.day == 30
                                          : false;
}

std::vector<Date> quarter_ends_between(Date first, Date last) {
  std::vector<Date> out;
  if (first > last) return out;
  CivilDate c = civil_from_date(first);
  int y = c.year;
  for (;;) {
    for (int m : {3, 6, 9, 12}) {
      const Date qe = make_date(y, m, m == 3 || m == 12 ? 31 : 30);
      if (qe > last) return out;
      if (qe >= first) out.push_back(qe);
    }
    ++y;
  }
}

}  // namespace fundtrack
