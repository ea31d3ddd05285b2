#include "common/dates.hpp"

#include <cstdio>

#include "common/errors.hpp"

namespace pglake {

namespace {

// Howard Hinnant's civil-days algorithms; exact for the proleptic Gregorian
// calendar over the full int64 range we care about.
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yy + (m <= 2));
}

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
  static const int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap(y)) return 29;
  return lengths[m - 1];
}

}  // namespace

EpochDay make_epoch_day(int year, int month, int day) {
  return days_from_civil(year, month, day);
}

void civil_from_epoch_day(EpochDay d, int& year, int& month, int& day) {
  civil_from_days(d, year, month, day);
}

EpochDay parse_iso_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-')
    throw IoError("invalid ISO-8601 date '" + s + "' (expected YYYY-MM-DD)");
  for (int i : {0, 1, 2, 3, 5, 6, 8, 9})
    if (s[i] < '0' || s[i] > '9')
      throw IoError("invalid ISO-8601 date '" + s + "' (expected YYYY-MM-DD)");
  const int y = (s[0] - '0') * 1000 + (s[1] - '0') * 100 + (s[2] - '0') * 10 + (s[3] - '0');
  const int m = (s[5] - '0') * 10 + (s[6] - '0');
  const int d = (s[8] - '0') * 10 + (s[9] - '0');
  if (m < 1 || m > 12 || d < 1 || d > days_in_month(y, m))
    throw IoError("invalid calendar date '" + s + "'");
  return days_from_civil(y, m, d);
}

std::string format_iso_date(EpochDay d) {
  int y, m, dd;
  civil_from_days(d, y, m, dd);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, m, dd);
  return buf;
}

int day_of_year(EpochDay d) {
  int y, m, dd;
  civil_from_days(d, y, m, dd);
  return static_cast<int>(d - days_from_civil(y, 1, 1)) + 1;
}

}  // namespace pglake
