#include <doctest.h>

#include "sieve/value.hpp"

using namespace sieve;

TEST_SUITE("value") {

TEST_CASE("date parsing and formatting round trip") {
  Value d = Value::parse_date("2018-02-01");
  CHECK(d.tag() == ValueTag::Date);
  CHECK(d.to_string() == "2018-02-01");
  CHECK(Value::parse_date("1970-01-01").as_date().days == 0);
  CHECK(Value::parse_date("1970-01-02").as_date().days == 1);
  CHECK_THROWS_AS(Value::parse_date("2018-2-1"), ParseError);
  CHECK_THROWS_AS(Value::parse_date("2018-13-01"), ParseError);
}

TEST_CASE("time parsing at seconds resolution") {
  CHECK(Value::parse_time("09:30").as_time().seconds == 9 * 3600 + 30 * 60);
  CHECK(Value::parse_time("09:30:15").as_time().seconds ==
        9 * 3600 + 30 * 60 + 15);
  CHECK(Value::parse_time("09:30:15").to_string() == "09:30:15");
  CHECK_THROWS_AS(Value::parse_time("25:00"), ParseError);
}

TEST_CASE("timestamp combines day and seconds") {
  Value ts = Value::parse_timestamp("1970-01-02 01:00:00");
  CHECK(ts.as_timestamp().seconds == 86400 + 3600);
  CHECK(ts.to_string() == "1970-01-02 01:00:00");
}

TEST_CASE("comparison follows natural ordering within a tag") {
  CHECK(Value::integer(3).compare(Value::integer(7)) < 0);
  CHECK(Value::text("abc").compare(Value::text("abd")) < 0);
  CHECK(Value::parse_date("2018-02-01").compare(
            Value::parse_date("2018-04-30")) < 0);
  CHECK(Value::decimal(1.5).equals(Value::decimal(1.5)));
}

TEST_CASE("values of different tags never compare") {
  CHECK_THROWS_AS(Value::integer(1).compare(Value::text("1")),
                  TypeMismatchError);
  CHECK_THROWS_AS(Value::integer(1).compare(Value::decimal(1.0)),
                  TypeMismatchError);
  CHECK_THROWS_AS(
      Value::parse_date("2018-02-01").compare(Value::parse_time("09:00")),
      TypeMismatchError);
}

TEST_CASE("sql literal quoting") {
  CHECK(Value::integer(42).to_sql() == "42");
  CHECK(Value::text("x").to_sql() == "'x'");
  CHECK(Value::parse_date("2018-02-01").to_sql() == "'2018-02-01'");
  CHECK(Value::parse_time("08:00").to_sql() == "'08:00:00'");
}

TEST_CASE("numeric projection") {
  CHECK(Value::integer(5).numeric() == 5.0);
  CHECK(Value::parse_time("01:00").numeric() == 3600.0);
  CHECK_THROWS_AS(Value::text("x").numeric(), TypeMismatchError);
}

}  // TEST_SUITE
