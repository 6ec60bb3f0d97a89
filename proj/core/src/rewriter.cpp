#include "sieve/rewriter.hpp"

#include <algorithm>
#include <sstream>

namespace sieve {

DialectCapabilities DialectCapabilities::embedded() {
  return DialectCapabilities{};
}

DialectCapabilities DialectCapabilities::hinted() {
  return DialectCapabilities{};
}

DialectCapabilities DialectCapabilities::plain() {
  DialectCapabilities caps;
  caps.supports_index_hints = false;
  caps.supports_union_branch_rewrite = false;
  caps.explain = ExplainProvides::None;
  return caps;
}

DialectCapabilities DialectCapabilities::from_config(const std::string& text) {
  DialectCapabilities caps;
  std::istringstream in(text);
  std::string line;
  auto trim = [](std::string s) {
    size_t b = s.find_first_not_of(" \t\r");
    size_t e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty()) continue;
    if (key == "hint_template")
      caps.hint_template = val;
    else if (key == "ignore_index_template")
      caps.ignore_index_template = val;
    else if (key == "supports_index_hints")
      caps.supports_index_hints = val == "true" || val == "1";
    else if (key == "supports_union_branch_rewrite")
      caps.supports_union_branch_rewrite = val == "true" || val == "1";
    else if (key == "explain")
      caps.explain = val == "none" ? ExplainProvides::None
                                   : ExplainProvides::CardinalityAndAccessPath;
    else
      throw ParseError("unknown dialect config key '" + key + "'");
  }
  return caps;
}

std::string rewritten_relation_name(const std::string& relation) {
  return relation + "_pol";
}

GuardedPolicyExpression build_guarded_expression(const GeKey& key,
                                                 std::span<const Policy>
                                                     policies,
                                                 LogicalTs built_at,
                                                 const Database& db,
                                                 const CostConstants& k,
                                                 GuardIdSource* guard_ids) {
  GuardedPolicyExpression ge;
  ge.key = key;
  ge.built_at = built_at;
  if (policies.empty()) return ge;  // default deny: empty projection

  const auto& est = db.estimator(key.relation);
  IndexCatalog idx = db.index_catalog();
  auto cands = generate_candidate_set(policies, idx, est, k);
  std::vector<PolicyId> ids;
  ids.reserve(policies.size());
  for (const auto& p : policies) ids.push_back(p.id);
  return select_guards(cands, ids, key, built_at, est, k, guard_ids);
}

namespace {

bool index_scannable(const Predicate& pred) {
  if (const auto* s = std::get_if<ScalarPredicate>(&pred))
    return s->op != CompareOp::Ne;
  if (const auto* l = std::get_if<ListPredicate>(&pred)) return !l->negated;
  return std::holds_alternative<RangePredicate>(pred);
}

// Single-alias predicates of the query that land on the given relation,
// provided the relation appears exactly once in FROM (a self-join would bind
// per-alias predicates to different row sets, so nothing is pushed then).
std::vector<ObjectCondition> relation_predicates(const Database& db,
                                                 const ParsedQuery& q,
                                                 const std::string& relation) {
  size_t occurrences = 0;
  for (const auto& f : q.from)
    if (f.relation == relation) ++occurrences;
  if (occurrences != 1) return {};

  std::vector<ObjectCondition> out;
  for (const auto& p : q.predicates) {
    std::string target_rel;
    if (!p.col.alias.empty()) {
      const FromEntry* f = q.find_alias(p.col.alias);
      if (f == nullptr) continue;
      target_rel = f->relation;
    } else {
      for (const auto& f : q.from)
        if (db.has_relation(f.relation) &&
            db.relation(f.relation).has_attribute(p.col.attr)) {
          target_rel = f.relation;
          break;
        }
    }
    if (target_rel == relation) out.push_back({p.col.attr, p.pred});
  }
  return out;
}

}  // namespace

std::vector<ExplainEntry> explain_query(const Database& db,
                                        const ParsedQuery& q) {
  std::vector<ExplainEntry> out;
  std::set<std::string> seen;
  for (const auto& f : q.from) {
    if (!seen.insert(f.relation).second) continue;
    const Relation& rel = db.relation(f.relation);
    const auto& est = db.estimator(f.relation);
    ExplainEntry entry;
    entry.relation = f.relation;
    entry.access_path = "table_scan";
    entry.estimated_rows = static_cast<double>(rel.row_count());
    for (const auto& oc : relation_predicates(db, q, f.relation)) {
      if (!rel.has_index(oc.attribute) || !index_scannable(oc.pred)) continue;
      double sel = est.estimate(oc);
      if (sel < entry.estimated_rows || entry.access_path == "table_scan") {
        entry.access_path = "index_scan(" + oc.attribute + ")";
        entry.estimated_rows = sel;
        entry.driving_pred = oc;
      }
    }
    out.push_back(std::move(entry));
  }
  return out;
}

namespace {

std::string index_name(const std::string& relation, const std::string& attr) {
  return "idx_" + relation + "_" + attr;
}

std::string apply_hint_template(const std::string& tmpl,
                                const std::string& index) {
  std::string out = tmpl;
  auto pos = out.find("{index}");
  if (pos != std::string::npos) out.replace(pos, 7, index);
  return out;
}

std::string partition_sql(const GuardBranchPlan& branch,
                          const QueryMetadata& qm, const Relation& rel) {
  if (branch.exec_mode == ExecMode::Delta) {
    std::string call = "delta(" + std::to_string(branch.guard_id) + ", '" +
                       qm.querier + "', '" + qm.purpose + "'";
    for (const auto& [attr, _] : rel.schema()) call += ", '" + attr + "'";
    return call + ") = TRUE";
  }
  std::string out = "(";
  for (size_t i = 0; i < branch.partition.size(); ++i) {
    if (i) out += " OR ";
    const Policy& p = branch.partition[i];
    out += "(";
    for (size_t c = 0; c < p.object_conditions.size(); ++c) {
      if (c) out += " AND ";
      out += p.object_conditions[c].to_sql();
    }
    out += ")";
  }
  return out + ")";
}

std::string branch_where(const GuardBranchPlan& branch,
                         const QueryMetadata& qm, const Relation& rel) {
  std::string out = branch.guard.to_sql();
  for (const auto& pred : branch.pushed_preds) out += " AND " + pred.to_sql();
  out += " AND " + partition_sql(branch, qm, rel);
  return out;
}

}  // namespace

RewrittenQuery rewrite_query(
    const Database& db, const ParsedQuery& q, const QueryMetadata& qm,
    const std::map<std::string, GuardedPolicyExpression>& ge_per_relation,
    const DialectCapabilities& caps, const CostConstants& k,
    const PolicyResolver& resolver) {
  for (const auto& f : q.from) {
    const std::string marker = "_pol";
    if (f.relation.size() > marker.size() &&
        f.relation.compare(f.relation.size() - marker.size(), marker.size(),
                           marker) == 0)
      throw SieveError("query already rewritten: relation '" + f.relation +
                       "' carries the projection marker");
  }

  RewrittenQuery rq;
  rq.query = q;
  rq.qm = qm;

  auto explain = explain_query(db, q);

  std::vector<std::string> with_clauses;
  std::map<std::string, std::string> subst;

  std::set<std::string> governed_done;
  for (const auto& f : q.from) {
    if (!governed_done.insert(f.relation).second) continue;
    const Relation& rel = db.relation(f.relation);
    if (!rel.governed()) continue;

    auto ge_it = ge_per_relation.find(f.relation);
    if (ge_it == ge_per_relation.end())
      throw EnforcementUnavailableError(
          "no guarded expression for governed relation '" + f.relation + "'");
    const GuardedPolicyExpression& ge = ge_it->second;
    const auto& est = db.estimator(f.relation);

    RelationAccessPlan plan;
    plan.relation = f.relation;

    std::string pol_name = rewritten_relation_name(f.relation);
    subst[f.relation] = pol_name;

    if (ge.guards.empty()) {
      plan.deny_all = true;
      plan.strategy = Strategy::LinearScan;
      rq.plans[f.relation] = plan;
      with_clauses.push_back(pol_name + " AS (\n  SELECT * FROM " +
                             f.relation + " WHERE FALSE\n)");
      continue;
    }

    // Query predicates over this relation worth duplicating into branches.
    std::vector<ObjectCondition> pushable;
    for (auto& oc : relation_predicates(db, q, f.relation)) {
      if (oc.attribute == "owner") continue;  // policy side owns this column
      if (est.estimate(oc) < 0.5 * est.relation_rows())
        pushable.push_back(std::move(oc));
    }

    // Strategy selection from the cost model plus the optimizer probe.
    std::optional<double> query_pred_sel;
    std::optional<ObjectCondition> driving;
    if (caps.explain == DialectCapabilities::ExplainProvides::
                            CardinalityAndAccessPath) {
      for (const auto& e : explain) {
        if (e.relation != f.relation || !e.driving_pred) continue;
        query_pred_sel = e.estimated_rows;
        driving = e.driving_pred;
      }
    }
    std::vector<double> guard_sels;
    for (const auto& term : ge.guards)
      guard_sels.push_back(est.estimate(term.guard));
    auto costs =
        strategy_costs(query_pred_sel, guard_sels, est.relation_rows(), k);
    plan.strategy = costs.best;
    if (plan.strategy == Strategy::IndexQuery) plan.index_query_pred = driving;

    for (const auto& term : ge.guards) {
      GuardBranchPlan branch;
      branch.guard = term.guard;
      branch.pushed_preds = pushable;
      branch.exec_mode = term.exec_mode;
      branch.guard_id = term.guard_id;
      for (PolicyId id : term.partition) {
        auto p = resolver(id);
        if (!p)
          throw NotFoundError("partition references missing policy " +
                              std::to_string(id));
        branch.partition.push_back(std::move(*p));
      }
      plan.branches.push_back(std::move(branch));
    }

    // SQL text for the WITH body.
    std::string body;
    bool hints = caps.supports_index_hints;
    switch (plan.strategy) {
      case Strategy::IndexGuards: {
        if (hints && caps.supports_union_branch_rewrite) {
          for (size_t b = 0; b < plan.branches.size(); ++b) {
            if (b) body += "\n  UNION\n";
            const auto& branch = plan.branches[b];
            body += "  SELECT * FROM " + f.relation + " " +
                    apply_hint_template(
                        caps.hint_template,
                        index_name(f.relation, branch.guard.attribute)) +
                    " WHERE " + branch_where(branch, qm, rel);
          }
        } else {
          body += "  SELECT * FROM " + f.relation + " WHERE ";
          for (size_t b = 0; b < plan.branches.size(); ++b) {
            if (b) body += " OR ";
            body += "(" + branch_where(plan.branches[b], qm, rel) + ")";
          }
        }
        break;
      }
      case Strategy::IndexQuery: {
        body += "  SELECT * FROM " + f.relation;
        if (hints && driving)
          body += " " + apply_hint_template(
                            caps.hint_template,
                            index_name(f.relation, driving->attribute));
        body += " WHERE ";
        if (driving) body += driving->to_sql() + " AND ";
        body += "(";
        for (size_t b = 0; b < plan.branches.size(); ++b) {
          if (b) body += " OR ";
          body += "(" + branch_where(plan.branches[b], qm, rel) + ")";
        }
        body += ")";
        break;
      }
      case Strategy::LinearScan: {
        body += "  SELECT * FROM " + f.relation;
        if (hints) body += " " + caps.ignore_index_template;
        body += " WHERE ";
        for (size_t b = 0; b < plan.branches.size(); ++b) {
          if (b) body += " OR ";
          body += "(" + branch_where(plan.branches[b], qm, rel) + ")";
        }
        break;
      }
    }
    with_clauses.push_back(pol_name + " AS (\n" + body + "\n)");
    rq.plans[f.relation] = std::move(plan);
  }

  std::string sql;
  if (!with_clauses.empty()) {
    sql = "WITH ";
    for (size_t i = 0; i < with_clauses.size(); ++i) {
      if (i) sql += ",\n";
      sql += with_clauses[i];
    }
    sql += "\n";
  }
  sql += q.to_sql(subst);
  rq.sql = std::move(sql);
  return rq;
}

QueryResult execute_rewritten(const Database& db, const RewrittenQuery& rq,
                              ExecCounters& counters) {
  std::map<std::string, std::set<size_t>> allowed;
  for (const auto& [relation, plan] : rq.plans)
    allowed[relation] =
        execute_access_plan(db.relation(relation), plan, counters);
  return execute_query(db, rq.query, allowed, counters);
}

EnforcementResult enforce_and_execute(const Database& db, const ParsedQuery& q,
                                      const QueryMetadata& qm,
                                      const DialectCapabilities& caps,
                                      const CostConstants& k,
                                      const GeProvider& ge_provider,
                                      const PolicyResolver& resolver) {
  std::map<std::string, GuardedPolicyExpression> ges;
  std::set<std::string> seen;
  for (const auto& f : q.from) {
    if (!seen.insert(f.relation).second) continue;
    if (!db.relation(f.relation).governed()) continue;
    ges[f.relation] = ge_provider(GeKey{qm.querier, qm.purpose, f.relation});
  }
  EnforcementResult result;
  result.rewritten = rewrite_query(db, q, qm, ges, caps, k, resolver);
  result.rows = execute_rewritten(db, result.rewritten, result.counters);
  return result;
}

}  // namespace sieve
