#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

namespace sieve {

class SieveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Comparison between values of different tags, or an attribute bound to the
/// wrong tag.
class TypeMismatchError : public SieveError {
 public:
  using SieveError::SieveError;
};

class ParseError : public SieveError {
 public:
  using SieveError::SieveError;
};

enum class ValueTag { Integer, Decimal, Text, Date, Time, Timestamp };

std::string_view tag_name(ValueTag tag);

/// Calendar day, stored as days since 1970-01-01 (proleptic Gregorian).
struct DateValue {
  int64_t days = 0;
  auto operator<=>(const DateValue&) const = default;
};

/// Time of day at seconds resolution.
struct TimeValue {
  int64_t seconds = 0;
  auto operator<=>(const TimeValue&) const = default;
};

/// Seconds since 1970-01-01 00:00:00.
struct TimestampValue {
  int64_t seconds = 0;
  auto operator<=>(const TimestampValue&) const = default;
};

int64_t days_from_civil(int year, int month, int day);
void civil_from_days(int64_t days, int& year, int& month, int& day);

/// Tagged scalar. Values of different tags never compare; within a tag the
/// natural ordering applies.
class Value {
 public:
  Value() : v_(int64_t{0}) {}

  static Value integer(int64_t v) { return Value(v); }
  static Value decimal(double v) { return Value(v); }
  static Value text(std::string v) { return Value(std::move(v)); }
  static Value date(DateValue v) { return Value(v); }
  static Value time(TimeValue v) { return Value(v); }
  static Value timestamp(TimestampValue v) { return Value(v); }

  /// "2018-02-01"
  static Value parse_date(std::string_view iso);
  /// "09:30" or "09:30:15"
  static Value parse_time(std::string_view hms);
  /// "2018-02-01 09:30:15"
  static Value parse_timestamp(std::string_view text);

  ValueTag tag() const;

  int64_t as_integer() const { return std::get<int64_t>(v_); }
  double as_decimal() const { return std::get<double>(v_); }
  const std::string& as_text() const { return std::get<std::string>(v_); }
  DateValue as_date() const { return std::get<DateValue>(v_); }
  TimeValue as_time() const { return std::get<TimeValue>(v_); }
  TimestampValue as_timestamp() const { return std::get<TimestampValue>(v_); }

  /// Numeric projection used by histograms and interval math: integers and
  /// decimals map to themselves, date to day count, time/timestamp to
  /// seconds. Text has no numeric projection.
  double numeric() const;
  bool has_numeric() const { return tag() != ValueTag::Text; }

  /// Three-way comparison within one tag. Throws TypeMismatchError across
  /// tags.
  int compare(const Value& other) const;
  bool equals(const Value& other) const;

  /// Strict weak order usable as an index comparator (same-tag values only).
  bool less(const Value& other) const { return compare(other) < 0; }

  /// Canonical display form: dates as 2018-02-01, times as 09:30:00,
  /// timestamps as 2018-02-01 09:30:00.
  std::string to_string() const;
  /// SQL literal form (text/date/time quoted).
  std::string to_sql() const;

  bool operator==(const Value& other) const {
    return tag() == other.tag() && compare(other) == 0;
  }

 private:
  explicit Value(int64_t v) : v_(v) {}
  explicit Value(double v) : v_(v) {}
  explicit Value(std::string v) : v_(std::move(v)) {}
  explicit Value(DateValue v) : v_(v) {}
  explicit Value(TimeValue v) : v_(v) {}
  explicit Value(TimestampValue v) : v_(v) {}

  std::variant<int64_t, double, std::string, DateValue, TimeValue,
               TimestampValue>
      v_;
};

struct ValueLess {
  bool operator()(const Value& a, const Value& b) const { return a.less(b); }
};

}  // namespace sieve
