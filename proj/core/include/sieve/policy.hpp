#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sieve/value.hpp"

namespace sieve {

using PolicyId = int64_t;
using LogicalTs = int64_t;

class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ConflictError : public SieveError {
 public:
  using SieveError::SieveError;
};

class NotFoundError : public SieveError {
 public:
  using SieveError::SieveError;
};

/// Oracle asked to evaluate a derived (subquery-valued) condition.
class UnsupportedConditionError : public SieveError {
 public:
  using SieveError::SieveError;
};

enum class CompareOp { Eq, Ne, Lt, Gt, Ge, Le, In, NotIn };

std::string_view op_sql(CompareOp op);
CompareOp op_from_sql(std::string_view text);

struct ScalarPredicate {
  CompareOp op = CompareOp::Eq;
  Value value;
};

/// IN / NOT IN over an explicit value list.
struct ListPredicate {
  bool negated = false;
  std::vector<Value> values;
};

/// Two-sided range: lo_op in {>, >=}, hi_op in {<, <=}, lo <= hi.
struct RangePredicate {
  CompareOp lo_op = CompareOp::Ge;
  Value lo;
  CompareOp hi_op = CompareOp::Le;
  Value hi;
};

/// Opaque SQL fragment; carried verbatim through rewrites, never evaluated.
struct DerivedPredicate {
  std::string sql;
};

using Predicate =
    std::variant<ScalarPredicate, ListPredicate, RangePredicate,
                 DerivedPredicate>;

/// Closed numeric interval in the value's numeric projection. Discrete tags
/// get half-open continuity corrections (>4 becomes lo=4.5) so that adjacent
/// integer ranges partition exactly.
struct Interval {
  double lo;
  double hi;

  bool empty() const { return lo > hi; }
  bool overlaps(const Interval& o) const { return lo <= o.hi && o.lo <= hi; }
  bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
  Interval intersect(const Interval& o) const {
    return {lo > o.lo ? lo : o.lo, hi < o.hi ? hi : o.hi};
  }
  Interval hull(const Interval& o) const {
    return {lo < o.lo ? lo : o.lo, hi > o.hi ? hi : o.hi};
  }
};

struct ObjectCondition {
  std::string attribute;
  Predicate pred;

  static ObjectCondition eq(std::string attr, Value v);
  static ObjectCondition scalar(std::string attr, CompareOp op, Value v);
  static ObjectCondition range(std::string attr, CompareOp lo_op, Value lo,
                               CompareOp hi_op, Value hi);
  static ObjectCondition in_list(std::string attr, std::vector<Value> vs,
                                 bool negated = false);
  static ObjectCondition derived(std::string attr, std::string sql);

  bool is_derived() const {
    return std::holds_alternative<DerivedPredicate>(pred);
  }
  bool is_equality() const;

  /// Interval view for guard math: Eq -> degenerate point, ranges and
  /// one-sided comparisons -> adjusted interval. No interval for !=, lists,
  /// derived, or text values.
  std::optional<Interval> interval() const;

  /// The tag of the constant(s); nullopt for derived.
  std::optional<ValueTag> value_tag() const;

  /// Deterministic SQL text, e.g. "W.time >= '09:00:00' AND W.time <= ...".
  std::string to_sql(std::string_view qualifier = {}) const;
  /// Stable identity string used for tie-breaking and dedup.
  std::string identity() const;

  bool operator==(const ObjectCondition& other) const {
    return identity() == other.identity();
  }
};

/// True iff the tuple value satisfies the predicate. Throws
/// UnsupportedConditionError for derived predicates and TypeMismatchError
/// across tags.
bool eval_predicate(const Predicate& pred, const Value& tuple_value);

/// Containment test: does `inner` restricted to the same attribute imply
/// `outer`? Used by guard coverage and mergeability. Conservative: false for
/// predicates without an interval view, except list predicates whose every
/// member lies inside `outer`'s interval.
bool condition_implies(const ObjectCondition& inner,
                       const ObjectCondition& outer);

struct Policy {
  PolicyId id = 0;
  std::string relation;
  std::string owner;
  std::vector<ObjectCondition> object_conditions;
  std::string querier;
  std::string purpose;
  // action is always `allow`: default-deny semantics, deny rules are
  // pre-factored away.
  LogicalTs inserted_at = 0;

  /// The single owner-equality condition every policy must carry.
  const ObjectCondition& owner_condition() const;
  void validate() const;
};

struct QueryMetadata {
  std::string querier;
  std::string purpose;
};

struct Tuple {
  std::string relation;
  std::map<std::string, Value> attrs;

  const Value* find(std::string_view attr) const;
};

/// User to group membership with the hierarchy closure precomputed, so
/// groups(u) answers "all groups u transitively belongs to" in one lookup.
class GroupDirectory {
 public:
  GroupDirectory() = default;

  /// Direct membership edge: user (or group) -> group.
  void add_member(const std::string& member, const std::string& group);
  /// Group hierarchy edge: child group is subsumed by parent group.
  void add_subgroup(const std::string& child, const std::string& parent);

  /// Materialize the transitive closure. Must be called after the last edge
  /// and before lookups; repeated calls are fine.
  void build();

  const std::set<std::string>& groups(const std::string& user) const;
  bool in_group(const std::string& user, const std::string& group) const;

 private:
  std::map<std::string, std::set<std::string>> direct_;
  std::map<std::string, std::set<std::string>> parents_;
  std::map<std::string, std::set<std::string>> closure_;
  bool built_ = true;
};

}  // namespace sieve
