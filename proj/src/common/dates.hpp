#pragma once

#include <cstdint>
#include <string>

namespace pglake {

// Calendar dates as days since 1970-01-01 (UTC, civil). All on-disk
// timestamps are ISO-8601 dates ("YYYY-MM-DD"); anything else is rejected.
using EpochDay = std::int64_t;

EpochDay make_epoch_day(int year, int month, int day);
void civil_from_epoch_day(EpochDay d, int& year, int& month, int& day);

// Throws IoError on malformed or non-existent dates.
EpochDay parse_iso_date(const std::string& s);
std::string format_iso_date(EpochDay d);

inline int month_of(EpochDay d) {
  int y, m, dd;
  civil_from_epoch_day(d, y, m, dd);
  return m;
}

// 1-based ordinal day within the calendar year, for seasonal phases.
int day_of_year(EpochDay d);

}  // namespace pglake
