#include <doctest.h>

#include <sstream>

#include "sieve/store.hpp"

using namespace sieve;

namespace {

Policy make_policy(PolicyId id, int owner, const std::string& querier,
                   const std::string& purpose = "attendance") {
  Policy p;
  p.id = id;
  p.relation = "wifi";
  p.owner = std::to_string(owner);
  p.querier = querier;
  p.purpose = purpose;
  p.object_conditions.push_back(
      ObjectCondition::eq("owner", Value::integer(owner)));
  return p;
}

GuardedPolicyExpression make_ge(const GeKey& key,
                                std::vector<PolicyId> partition) {
  GuardedPolicyExpression ge;
  ge.key = key;
  ge.built_at = 1;
  GuardedExpressionTerm term;
  term.guard = ObjectCondition::eq("owner", Value::integer(7));
  term.partition = partition;
  term.guard_id = 1;
  for (PolicyId id : partition) ge.built_over.insert(id);
  ge.guards.push_back(std::move(term));
  return ge;
}

}  // namespace

TEST_SUITE("policy-store") {

TEST_CASE("insert assigns monotone timestamps and detects conflicts") {
  PolicyStore store;
  PolicyId a = store.insert_policy(make_policy(0, 7, "smith"));
  CHECK(a == 1);  // empty store starts at id 1
  PolicyId b = store.insert_policy(make_policy(0, 8, "smith"));
  CHECK(store.get_policy(a)->inserted_at < store.get_policy(b)->inserted_at);
  CHECK_THROWS_AS(store.insert_policy(make_policy(a, 9, "smith")),
                  ConflictError);
}

TEST_CASE("insert marks matching cached GEs outdated") {
  PolicyStore store;
  GeKey key{"smith", "attendance", "wifi"};
  store.insert_policy(make_policy(0, 7, "smith"));
  store.store_ge(make_ge(key, {1}));
  CHECK_FALSE(store.fetch_ge(key)->outdated);

  store.insert_policy(make_policy(0, 8, "smith"));
  CHECK(store.fetch_ge(key)->outdated);

  // Different purpose leaves it alone.
  store.store_ge(make_ge(key, {1}));
  store.insert_policy(make_policy(0, 9, "smith", "grading"));
  CHECK_FALSE(store.fetch_ge(key)->outdated);
}

TEST_CASE("group-querier policies invalidate member GEs") {
  GroupDirectory groups;
  groups.add_member("smith", "faculty");
  groups.build();
  PolicyStore store(groups);
  GeKey key{"smith", "attendance", "wifi"};
  store.store_ge(make_ge(key, {}));
  store.insert_policy(make_policy(0, 7, "faculty"));
  CHECK(store.fetch_ge(key)->outdated);
  CHECK(store.fetch_policies(key, 0).size() == 1);
}

TEST_CASE("fetch_policies honours the since watermark") {
  PolicyStore store;
  GeKey key{"smith", "attendance", "wifi"};
  for (int i = 0; i < 5; ++i) store.insert_policy(make_policy(0, i, "smith"));

  auto all = store.fetch_policies(key, 0);
  REQUIRE(all.size() == 5);
  for (size_t i = 1; i < all.size(); ++i)
    CHECK(all[i - 1].inserted_at < all[i].inserted_at);

  CHECK(store.fetch_policies(key, all.back().inserted_at).empty());
  CHECK(store.fetch_policies(key, all[2].inserted_at).size() == 2);

  // Split at any watermark reconstructs the full set.
  auto early = store.fetch_policies(key, 0);
  auto tail = store.fetch_policies(key, all[1].inserted_at);
  CHECK(tail.size() + 2 == early.size());
}

TEST_CASE("delete removes the policy and flags GEs") {
  PolicyStore store;
  GeKey key{"smith", "attendance", "wifi"};
  PolicyId id = store.insert_policy(make_policy(0, 7, "smith"));
  store.store_ge(make_ge(key, {id}));

  int64_t epoch_before = store.deletion_epoch(key);
  store.delete_policy(id);
  CHECK(store.fetch_ge(key)->outdated);
  CHECK_FALSE(store.get_policy(id).has_value());
  CHECK(store.deletion_epoch(key) == epoch_before + 1);
  CHECK_THROWS_AS(store.delete_policy(id), NotFoundError);
}

TEST_CASE("store_ge replaces prior entry and resets freshness") {
  PolicyStore store;
  GeKey key{"smith", "attendance", "wifi"};
  PolicyId id = store.insert_policy(make_policy(0, 7, "smith"));
  store.store_ge(make_ge(key, {id}));
  store.insert_policy(make_policy(0, 8, "smith"));
  CHECK(store.fetch_ge(key)->outdated);
  store.store_ge(make_ge(key, {id, 2}));
  auto stored = store.fetch_ge(key);
  REQUIRE(stored.has_value());
  CHECK_FALSE(stored->outdated);
  CHECK(stored->ge.built_over.size() == 2);
  CHECK_FALSE(store.fetch_ge(GeKey{"other", "attendance", "wifi"}).has_value());
}

TEST_CASE("GE invariants: disjoint partitions covering built_over") {
  GuardedPolicyExpression ge = make_ge({"q", "p", "wifi"}, {1, 2});
  CHECK_NOTHROW(ge.check_invariants());
  GuardedExpressionTerm dup;
  dup.guard = ObjectCondition::eq("owner", Value::integer(9));
  dup.partition = {2};
  ge.guards.push_back(dup);
  CHECK_THROWS_AS(ge.check_invariants(), ContractViolation);
}

TEST_CASE("export then import round-trips byte-exactly") {
  PolicyStore store;
  for (int i = 0; i < 4; ++i)
    store.insert_policy(make_policy(0, i, i % 2 ? "smith" : "jones"));
  store.store_ge(make_ge({"smith", "attendance", "wifi"}, {2, 4}));

  std::ostringstream dump1;
  store.export_state(dump1);

  PolicyStore copy;
  std::istringstream in(dump1.str());
  copy.import_state(in);
  std::ostringstream dump2;
  copy.export_state(dump2);
  CHECK(dump1.str() == dump2.str());
  CHECK(copy.policy_count() == 4);

  // The timestamp counter resumes past the imported maximum.
  PolicyId next = copy.insert_policy(make_policy(0, 99, "smith"));
  CHECK(copy.get_policy(next)->inserted_at > 4);
}

TEST_CASE("journal records inserts and deletes") {
  std::string path = "journal_test.jsonl";
  std::remove(path.c_str());
  {
    PolicyStore store;
    store.attach_journal(path);
    PolicyId id = store.insert_policy(make_policy(0, 7, "smith"));
    store.insert_policy(make_policy(0, 8, "smith"));
    store.delete_policy(id);
  }
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  int lines = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++lines;
  CHECK(lines == 3);

  PolicyStore replay;
  std::ifstream again(path);
  replay.import_state(again);
  CHECK(replay.policy_count() == 1);
  std::remove(path.c_str());
}

}  // TEST_SUITE
