#include <doctest.h>

#include <random>

#include "sieve/eval.hpp"

using namespace sieve;

namespace {

Tuple make_tuple(std::initializer_list<std::pair<std::string, Value>> attrs,
                 const std::string& relation = "wifi") {
  Tuple t;
  t.relation = relation;
  for (auto& [k, v] : attrs) t.attrs.emplace(k, v);
  return t;
}

Policy make_policy(PolicyId id, int owner, const std::string& querier,
                   const std::string& purpose,
                   std::vector<ObjectCondition> extra = {}) {
  Policy p;
  p.id = id;
  p.relation = "wifi";
  p.owner = std::to_string(owner);
  p.querier = querier;
  p.purpose = purpose;
  p.object_conditions.push_back(
      ObjectCondition::eq("owner", Value::integer(owner)));
  for (auto& oc : extra) p.object_conditions.push_back(std::move(oc));
  return p;
}

ObjectCondition time_range(const char* lo, const char* hi) {
  return ObjectCondition::range("time", CompareOp::Ge, Value::parse_time(lo),
                                CompareOp::Le, Value::parse_time(hi));
}

// Independent reading of the implication-form semantics, used as the oracle
// for the evaluator itself.
bool implication_eval(const std::vector<ObjectCondition>& conds,
                      const Tuple& t) {
  for (const auto& oc : conds) {
    const Value* v = t.find(oc.attribute);
    bool attr_matches = v != nullptr;
    bool holds = attr_matches ? eval_predicate(oc.pred, *v) : false;
    // (t has attr) implies (comparison holds)
    if (attr_matches && !holds) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("policy-model") {

TEST_CASE("eval_object_conditions: conjunction over present attributes") {
  std::vector<ObjectCondition> conds{
      ObjectCondition::eq("owner", Value::integer(7)),
      time_range("09:00", "10:00")};
  CHECK(eval_object_conditions(
      conds, make_tuple({{"owner", Value::integer(7)},
                         {"time", Value::parse_time("09:30")}})));
  CHECK_FALSE(eval_object_conditions(
      conds, make_tuple({{"owner", Value::integer(7)},
                         {"time", Value::parse_time("11:00")}})));
}

TEST_CASE("eval_object_conditions: absent attribute is vacuously true") {
  std::vector<ObjectCondition> conds{
      ObjectCondition::eq("owner", Value::integer(7)),
      ObjectCondition::eq("badge", Value::text("A"))};
  Tuple t = make_tuple(
      {{"owner", Value::integer(7)}, {"time", Value::parse_time("09:30")}});
  CHECK(eval_object_conditions(conds, t));
  CHECK(implication_eval(conds, t));
}

TEST_CASE("eval_object_conditions matches the implication form on random "
          "instances") {
  std::mt19937_64 rng(7);
  for (int iter = 0; iter < 500; ++iter) {
    std::vector<ObjectCondition> conds;
    int n = 1 + static_cast<int>(rng() % 4);
    for (int i = 0; i < n; ++i) {
      std::string attr(1, static_cast<char>('a' + rng() % 5));
      int64_t lo = static_cast<int64_t>(rng() % 50);
      if (rng() % 2) {
        conds.push_back(ObjectCondition::eq(attr, Value::integer(lo)));
      } else {
        conds.push_back(ObjectCondition::range(
            attr, CompareOp::Ge, Value::integer(lo), CompareOp::Le,
            Value::integer(lo + static_cast<int64_t>(rng() % 20))));
      }
    }
    Tuple t;
    t.relation = "wifi";
    for (char c = 'a'; c <= 'e'; ++c)
      if (rng() % 2)
        t.attrs.emplace(std::string(1, c),
                        Value::integer(static_cast<int64_t>(rng() % 60)));
    CHECK(eval_object_conditions(conds, t) == implication_eval(conds, t));
  }
}

TEST_CASE("derived conditions are rejected by the evaluator") {
  std::vector<ObjectCondition> conds{
      ObjectCondition::derived("wifiAP", "SELECT 1")};
  CHECK_THROWS_AS(eval_object_conditions(conds, make_tuple({})),
                  UnsupportedConditionError);
}

TEST_CASE("filter_policies_by_metadata keeps matching purpose and querier") {
  GroupDirectory groups;
  groups.build();
  std::vector<Policy> all;
  for (int i = 0; i < 3; ++i)
    all.push_back(make_policy(i + 1, 10 + i, "Smith", "attendance"));
  for (int i = 0; i < 2; ++i)
    all.push_back(make_policy(i + 4, 20 + i, "Smith", "grading"));

  auto got = filter_policies_by_metadata(all, {"Smith", "attendance"}, groups);
  CHECK(got.size() == 3);
  for (const auto& p : got) CHECK(p.purpose == "attendance");
}

TEST_CASE("group queriers are matched through the hierarchy closure") {
  GroupDirectory groups;
  groups.add_member("Smith", "faculty");
  groups.add_subgroup("faculty", "staff_all");
  groups.build();
  CHECK(groups.in_group("Smith", "staff_all"));

  std::vector<Policy> all{make_policy(1, 5, "faculty", "attendance"),
                          make_policy(2, 6, "staff_all", "attendance"),
                          make_policy(3, 7, "Jones", "attendance")};
  auto got = filter_policies_by_metadata(all, {"Smith", "attendance"}, groups);
  REQUIRE(got.size() == 2);
  CHECK(got[0].id == 1);
  CHECK(got[1].id == 2);

  CHECK(filter_policies_by_metadata({}, {"Smith", "attendance"}, groups)
            .empty());
}

TEST_CASE("oracle: default deny and per-policy disjunction") {
  GroupDirectory groups;
  groups.build();
  std::vector<Tuple> rel;
  for (int i = 0; i < 10; ++i)
    rel.push_back(make_tuple({{"owner", Value::integer(i < 4 ? 7 : 8)},
                              {"time", Value::parse_time("09:15")}}));

  CHECK(oracle_allowed_tuples(rel, {}, {"q", "p"}, groups).empty());

  std::vector<Policy> policies{
      make_policy(1, 7, "q", "p", {time_range("09:00", "10:00")})};
  auto allowed = oracle_allowed_tuples(rel, policies, {"q", "p"}, groups);
  CHECK(allowed.size() == 4);
  for (const auto& t : allowed)
    CHECK(t.find("owner")->as_integer() == 7);

  // A second overlapping policy must not duplicate tuples.
  policies.push_back(make_policy(2, 7, "q", "p"));
  CHECK(oracle_allowed_tuples(rel, policies, {"q", "p"}, groups).size() == 4);
}

TEST_CASE("delta_filter: trivial cases") {
  GroupDirectory groups;
  groups.build();
  std::vector<Policy> policies{make_policy(1, 3, "q", "p"),
                               make_policy(2, 7, "q", "p")};
  CHECK(delta_filter(policies, {"q", "p"}, groups,
                     make_tuple({{"owner", Value::integer(7)}})));
  CHECK_FALSE(delta_filter(policies, {"q", "p"}, groups,
                           make_tuple({{"owner", Value::integer(9)}})));
  CHECK(delta_filter({&policies[0], 1}, {"q", "p"}, groups,
                     make_tuple({{"owner", Value::integer(3)}})));
}

TEST_CASE("properties: delta equivalence, monotonicity, idempotence, filter "
          "soundness") {
  std::mt19937_64 rng(42);
  GroupDirectory groups;
  groups.add_member("q1", "faculty");
  groups.build();

  for (int iter = 0; iter < 20; ++iter) {
    std::vector<Tuple> rel;
    size_t rows = 50 + rng() % 200;
    for (size_t i = 0; i < rows; ++i)
      rel.push_back(make_tuple(
          {{"owner", Value::integer(static_cast<int64_t>(rng() % 20))},
           {"time",
            Value::time(TimeValue{static_cast<int64_t>(rng() % 86400)})}}));

    std::vector<Policy> policies;
    size_t n = 1 + rng() % 40;
    for (size_t i = 0; i < n; ++i) {
      int owner = static_cast<int>(rng() % 20);
      std::string querier = rng() % 3 == 0 ? "faculty" : "q1";
      int64_t lo = static_cast<int64_t>(rng() % 80000);
      policies.push_back(make_policy(
          static_cast<PolicyId>(i + 1), owner, querier, "p",
          {ObjectCondition::range(
              "time", CompareOp::Ge, Value::time(TimeValue{lo}), CompareOp::Le,
              Value::time(TimeValue{lo + static_cast<int64_t>(rng() % 20000)}))}));
    }
    QueryMetadata qm{"q1", "p"};

    auto allowed = oracle_allowed_tuples(rel, policies, qm, groups);

    // delta_filter equals oracle membership tuple by tuple.
    auto allowed_fp = [&allowed]() {
      std::multiset<std::string> fp;
      for (const auto& t : allowed) {
        std::string key;
        for (const auto& [k, v] : t.attrs) key += k + "=" + v.to_string() + ";";
        fp.insert(key);
      }
      return fp;
    }();
    std::multiset<std::string> delta_fp;
    for (const auto& t : rel) {
      if (delta_filter(policies, qm, groups, t)) {
        std::string key;
        for (const auto& [k, v] : t.attrs) key += k + "=" + v.to_string() + ";";
        delta_fp.insert(key);
      }
    }
    CHECK(allowed_fp == delta_fp);

    // Adding an allow policy never removes tuples.
    auto more = policies;
    more.push_back(make_policy(static_cast<PolicyId>(n + 1),
                               static_cast<int>(rng() % 20), "q1", "p"));
    auto after = oracle_allowed_tuples(rel, more, qm, groups);
    CHECK(after.size() >= allowed.size());

    // Idempotence.
    auto twice = oracle_allowed_tuples(allowed, policies, qm, groups);
    CHECK(twice.size() == allowed.size());

    // Metadata filtering never changes the allowed set.
    auto filtered = filter_policies_by_metadata(policies, qm, groups);
    auto via_filtered = oracle_allowed_tuples(rel, filtered, qm, groups);
    CHECK(via_filtered.size() == allowed.size());
  }
}

TEST_CASE("policy invariants are validated") {
  Policy p = make_policy(1, 7, "q", "p");
  CHECK_NOTHROW(p.validate());
  p.object_conditions.push_back(
      ObjectCondition::eq("owner", Value::integer(9)));
  CHECK_THROWS_AS(p.validate(), ContractViolation);

  Policy no_owner;
  no_owner.id = 2;
  no_owner.relation = "wifi";
  no_owner.querier = "q";
  no_owner.purpose = "p";
  CHECK_THROWS_AS(no_owner.validate(), ContractViolation);
}

TEST_CASE("range condition invariants") {
  CHECK_THROWS_AS(
      ObjectCondition::range("a", CompareOp::Ge, Value::integer(10),
                             CompareOp::Le, Value::integer(3)),
      ContractViolation);
  CHECK_THROWS_AS(
      ObjectCondition::range("a", CompareOp::Lt, Value::integer(1),
                             CompareOp::Le, Value::integer(3)),
      ContractViolation);
}

}  // TEST_SUITE
