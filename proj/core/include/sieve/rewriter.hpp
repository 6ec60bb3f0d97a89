#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>

#include "sieve/engine.hpp"
#include "sieve/guard_select.hpp"
#include "sieve/sql.hpp"
#include "sieve/store.hpp"

namespace sieve {

/// A governed relation has no guarded expression available: fail closed.
class EnforcementUnavailableError : public SieveError {
 public:
  using SieveError::SieveError;
};

struct DialectCapabilities {
  bool supports_index_hints = true;
  /// Hint appended after the FROM item; {index} expands to the index name.
  std::string hint_template = "FORCE INDEX({index})";
  std::string ignore_index_template = "USE INDEX()";
  bool supports_union_branch_rewrite = true;
  enum class ExplainProvides { CardinalityAndAccessPath, None };
  ExplainProvides explain = ExplainProvides::CardinalityAndAccessPath;

  static DialectCapabilities embedded();
  static DialectCapabilities hinted();
  static DialectCapabilities plain();
  /// key=value template config (hint_template, ignore_index_template,
  /// supports_index_hints, supports_union_branch_rewrite, explain).
  static DialectCapabilities from_config(const std::string& text);
};

struct RewrittenQuery {
  std::string sql;
  ParsedQuery query;  // original form; relations substituted at execution
  QueryMetadata qm;
  std::map<std::string, RelationAccessPlan> plans;  // governed relations only
};

using PolicyResolver = std::function<std::optional<Policy>(PolicyId)>;

/// Builds a guarded policy expression for the key over the given policies:
/// candidate generation, merge sweep, greedy selection, per-guard exec mode.
GuardedPolicyExpression build_guarded_expression(
    const GeKey& key, std::span<const Policy> policies, LogicalTs built_at,
    const Database& db, const CostConstants& k,
    GuardIdSource* guard_ids = nullptr);

/// EXPLAIN over the parsed query: per relation, the planned access path and
/// its estimated cardinality (the most selective index-usable predicate, or
/// a table scan).
std::vector<ExplainEntry> explain_query(const Database& db,
                                        const ParsedQuery& q);

/// Rewrites the query into policy-compliant form: one WITH projection per
/// governed relation, per-guard branches under the chosen strategy,
/// selective query predicates pushed into branches, delta calls for delta
/// partitions. Rejects queries that already reference a rewritten
/// projection. The resolver maps partition policy ids to policies.
RewrittenQuery rewrite_query(
    const Database& db, const ParsedQuery& q, const QueryMetadata& qm,
    const std::map<std::string, GuardedPolicyExpression>& ge_per_relation,
    const DialectCapabilities& caps, const CostConstants& k,
    const PolicyResolver& resolver);

/// Runs the rewritten query on the embedded engine: every governed relation
/// is filtered through its access plan before joins or aggregation.
QueryResult execute_rewritten(const Database& db, const RewrittenQuery& rq,
                              ExecCounters& counters);

using GeProvider = std::function<GuardedPolicyExpression(const GeKey&)>;

struct EnforcementResult {
  RewrittenQuery rewritten;
  QueryResult rows;
  ExecCounters counters;
};

/// Full pipeline for one query: obtain a GE per governed relation (cache or
/// direct build), rewrite, execute.
EnforcementResult enforce_and_execute(const Database& db, const ParsedQuery& q,
                                      const QueryMetadata& qm,
                                      const DialectCapabilities& caps,
                                      const CostConstants& k,
                                      const GeProvider& ge_provider,
                                      const PolicyResolver& resolver);

/// Suffix a rewritten projection carries; also the rewrite-idempotence marker.
std::string rewritten_relation_name(const std::string& relation);

}  // namespace sieve
