#pragma once

#include <string>
#include <vector>

namespace fundtrack {

// Calendar date as a serial day count (days since 1970-01-01, negative before).
// Keeping dates integral makes ordering, differencing and map keys trivial and
// avoids timezone machinery entirely; the domain only ever needs whole days.
using Date = int;

struct CivilDate {
  int year;
  int month;  // 1..12
  int day;    // 1..31
};

Date make_date(int year, int month, int day);
CivilDate civil_from_date(Date d);

// Parses strict ISO-8601 "YYYY-MM-DD". Throws std::invalid_argument on any
// malformed or non-existent date (e.g. 2021-02-30).
Date parse_date(const std::string& text);
std::string format_date(Date d);

// 0 = Monday .. 6 = Sunday.
int weekday(Date d);
bool is_weekend(Date d);

bool is_quarter_end(Date d);
// Calendar quarter ends (Mar/Jun/Sep/Dec last day) in [first, last], ascending.
std::vector<Date> quarter_ends_between(Date first, Date last);

}  // namespace fundtrack
