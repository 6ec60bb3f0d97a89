#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sieve/engine.hpp"
#include "sieve/policy.hpp"

namespace sieve {

struct ColumnRef {
  std::string alias;  // empty when unqualified
  std::string attr;

  std::string to_string() const {
    return alias.empty() ? attr : alias + "." + attr;
  }
  bool operator==(const ColumnRef&) const = default;
};

struct QueryPredicate {
  ColumnRef col;
  Predicate pred;
};

struct JoinPredicate {
  ColumnRef left;
  ColumnRef right;
};

enum class AggKind { Column, CountStar, Count, CountDistinct };

struct SelectItem {
  AggKind agg = AggKind::Column;
  ColumnRef col;  // unused for CountStar
};

struct FromEntry {
  std::string relation;
  std::string alias;
};

/// Bounded SELECT-FROM-WHERE surface: conjunctive WHERE with comparisons,
/// BETWEEN, IN lists and equi-joins, optional GROUP BY with COUNT.
/// Anything outside this grammar is a syntax error.
struct ParsedQuery {
  bool select_star = false;
  std::vector<SelectItem> select;
  std::vector<FromEntry> from;
  std::vector<QueryPredicate> predicates;
  std::vector<JoinPredicate> joins;
  std::vector<ColumnRef> group_by;

  const FromEntry* find_alias(const std::string& alias) const;
  /// Canonical SQL text with stable whitespace; relation names can be
  /// remapped (used by the rewriter to substitute projections).
  std::string to_sql(
      const std::map<std::string, std::string>& relation_subst = {}) const;
};

ParsedQuery parse_query(const std::string& sql);

/// Quoted literals are typed by shape: yyyy-mm-dd becomes a date,
/// hh:mm[:ss] a time, anything else text.
Value parse_literal_text(const std::string& text);

struct QueryResult {
  std::vector<std::string> columns;
  std::vector<std::vector<Value>> rows;

  /// Order-insensitive fingerprint for result comparison.
  std::multiset<std::string> fingerprint() const;
};

/// Runs the query over the database with each governed relation restricted
/// to the given row ids (the policy-compliant projection). Ungoverned
/// relations and relations absent from the map read all rows. Single-alias
/// predicates apply first, then hash equi-joins in FROM order, then GROUP BY
/// / aggregation, then projection.
QueryResult execute_query(const Database& db, const ParsedQuery& q,
                          const std::map<std::string, std::set<size_t>>&
                              allowed_ids,
                          ExecCounters& counters);

}  // namespace sieve
