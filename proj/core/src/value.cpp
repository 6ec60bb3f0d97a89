#include "sieve/value.hpp"

#include <charconv>
#include <cstdio>

namespace sieve {

std::string_view tag_name(ValueTag tag) {
  switch (tag) {
    case ValueTag::Integer:
      return "integer";
    case ValueTag::Decimal:
      return "decimal";
    case ValueTag::Text:
      return "text";
    case ValueTag::Date:
      return "date";
    case ValueTag::Time:
      return "time";
    case ValueTag::Timestamp:
      return "timestamp";
  }
  return "?";
}

// Howard Hinnant's civil-day algorithms.
int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

void civil_from_days(int64_t z, int& year, int& month, int& day) {
  z += 719468;
  const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const int64_t y = static_cast<int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  day = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  month = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  year = static_cast<int>(y + (month <= 2));
}

namespace {

int parse_int_field(std::string_view s, size_t pos, size_t len,
                    std::string_view what) {
  int out = 0;
  if (pos + len > s.size()) throw ParseError("truncated " + std::string(what));
  auto [p, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, out);
  if (ec != std::errc() || p != s.data() + pos + len)
    throw ParseError("bad " + std::string(what) + " in '" + std::string(s) +
                     "'");
  return out;
}

int64_t parse_date_days(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-')
    throw ParseError("expected yyyy-mm-dd, got '" + std::string(s) + "'");
  int y = parse_int_field(s, 0, 4, "year");
  int m = parse_int_field(s, 5, 2, "month");
  int d = parse_int_field(s, 8, 2, "day");
  if (m < 1 || m > 12 || d < 1 || d > 31)
    throw ParseError("date out of range: '" + std::string(s) + "'");
  return days_from_civil(y, m, d);
}

int64_t parse_time_seconds(std::string_view s) {
  if (s.size() != 5 && s.size() != 8)
    throw ParseError("expected hh:mm[:ss], got '" + std::string(s) + "'");
  if (s[2] != ':' || (s.size() == 8 && s[5] != ':'))
    throw ParseError("expected hh:mm[:ss], got '" + std::string(s) + "'");
  int h = parse_int_field(s, 0, 2, "hour");
  int m = parse_int_field(s, 3, 2, "minute");
  int sec = s.size() == 8 ? parse_int_field(s, 6, 2, "second") : 0;
  if (h > 23 || m > 59 || sec > 59)
    throw ParseError("time out of range: '" + std::string(s) + "'");
  return h * 3600 + m * 60 + sec;
}

}  // namespace

Value Value::parse_date(std::string_view iso) {
  return Value(DateValue{parse_date_days(iso)});
}

Value Value::parse_time(std::string_view hms) {
  return Value(TimeValue{parse_time_seconds(hms)});
}

Value Value::parse_timestamp(std::string_view text) {
  if (text.size() != 19 || text[10] != ' ')
    throw ParseError("expected 'yyyy-mm-dd hh:mm:ss', got '" +
                     std::string(text) + "'");
  int64_t days = parse_date_days(text.substr(0, 10));
  int64_t secs = parse_time_seconds(text.substr(11));
  return Value(TimestampValue{days * 86400 + secs});
}

ValueTag Value::tag() const {
  return static_cast<ValueTag>(v_.index());
}

double Value::numeric() const {
  switch (tag()) {
    case ValueTag::Integer:
      return static_cast<double>(as_integer());
    case ValueTag::Decimal:
      return as_decimal();
    case ValueTag::Date:
      return static_cast<double>(as_date().days);
    case ValueTag::Time:
      return static_cast<double>(as_time().seconds);
    case ValueTag::Timestamp:
      return static_cast<double>(as_timestamp().seconds);
    case ValueTag::Text:
      break;
  }
  throw TypeMismatchError("text value has no numeric projection");
}

int Value::compare(const Value& other) const {
  if (tag() != other.tag())
    throw TypeMismatchError(std::string("cannot compare ") +
                            std::string(tag_name(tag())) + " with " +
                            std::string(tag_name(other.tag())));
  auto cmp3 = [](auto a, auto b) { return a < b ? -1 : (b < a ? 1 : 0); };
  switch (tag()) {
    case ValueTag::Integer:
      return cmp3(as_integer(), other.as_integer());
    case ValueTag::Decimal:
      return cmp3(as_decimal(), other.as_decimal());
    case ValueTag::Text:
      return as_text().compare(other.as_text()) < 0
                 ? -1
                 : (other.as_text().compare(as_text()) < 0 ? 1 : 0);
    case ValueTag::Date:
      return cmp3(as_date().days, other.as_date().days);
    case ValueTag::Time:
      return cmp3(as_time().seconds, other.as_time().seconds);
    case ValueTag::Timestamp:
      return cmp3(as_timestamp().seconds, other.as_timestamp().seconds);
  }
  return 0;
}

bool Value::equals(const Value& other) const {
  return compare(other) == 0;
}

namespace {

std::string format_date(int64_t days) {
  int y, m, d;
  civil_from_days(days, y, m, d);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, m, d);
  return buf;
}

std::string format_time(int64_t secs) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d:%02d:%02d",
                static_cast<int>(secs / 3600),
                static_cast<int>((secs / 60) % 60), static_cast<int>(secs % 60));
  return buf;
}

std::string format_decimal(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string Value::to_string() const {
  switch (tag()) {
    case ValueTag::Integer:
      return std::to_string(as_integer());
    case ValueTag::Decimal:
      return format_decimal(as_decimal());
    case ValueTag::Text:
      return as_text();
    case ValueTag::Date:
      return format_date(as_date().days);
    case ValueTag::Time:
      return format_time(as_time().seconds);
    case ValueTag::Timestamp: {
      int64_t s = as_timestamp().seconds;
      int64_t days = s >= 0 ? s / 86400 : (s - 86399) / 86400;
      return format_date(days) + " " + format_time(s - days * 86400);
    }
  }
  return {};
}

std::string Value::to_sql() const {
  switch (tag()) {
    case ValueTag::Integer:
    case ValueTag::Decimal:
      return to_string();
    default:
      return "'" + to_string() + "'";
  }
}

}  // namespace sieve
