#include "sieve/engine.hpp"

#include <algorithm>
#include <istream>

#include "sieve/eval.hpp"
#include "sieve/json_io.hpp"

namespace sieve {

ExecCounters& ExecCounters::operator+=(const ExecCounters& o) {
  rows_read_random += o.rows_read_random;
  rows_read_sequential += o.rows_read_sequential;
  predicate_evals += o.predicate_evals;
  policy_evals += o.policy_evals;
  delta_invocations += o.delta_invocations;
  delta_policies_scanned += o.delta_policies_scanned;
  return *this;
}

double ExecCounters::cost_units(const CostConstants& k) const {
  return static_cast<double>(rows_read_random) * k.c_r +
         static_cast<double>(rows_read_sequential) * k.c_r / k.seq_ratio +
         static_cast<double>(policy_evals) * k.c_e +
         static_cast<double>(delta_invocations) * k.udf_inv +
         static_cast<double>(delta_policies_scanned) * k.udf_exec;
}

bool Relation::governed() const {
  return schema_.count("owner") > 0;
}

void Relation::load_rows(std::vector<Tuple> rows) {
  rows_ = std::move(rows);
  schema_.clear();
  for (const auto& t : rows_)
    for (const auto& [attr, v] : t.attrs)
      schema_.emplace(attr, v.tag());
  // Rebuild any indexes declared before the load.
  auto attrs = indexed_attributes();
  indexes_.clear();
  for (const auto& attr : attrs) build_index(attr);
}

void Relation::build_index(const std::string& attr) {
  auto& index = indexes_[attr];
  index.clear();
  for (size_t id = 0; id < rows_.size(); ++id) {
    const Value* v = rows_[id].find(attr);
    if (v != nullptr) index.emplace(*v, id);
  }
}

bool Relation::has_attribute(const std::string& attr) const {
  return schema_.count(attr) > 0;
}

bool Relation::has_index(const std::string& attr) const {
  return indexes_.count(attr) > 0;
}

std::set<std::string> Relation::indexed_attributes() const {
  std::set<std::string> out;
  for (const auto& [attr, _] : indexes_) out.insert(attr);
  return out;
}

std::vector<size_t> Relation::index_scan(const ObjectCondition& pred) const {
  auto it = indexes_.find(pred.attribute);
  if (it == indexes_.end())
    throw ContractViolation("no index on " + name_ + "." + pred.attribute);
  const auto& index = it->second;
  std::vector<size_t> out;

  auto scan_range = [&](const Value* lo, bool lo_strict, const Value* hi,
                        bool hi_strict) {
    auto begin = lo ? (lo_strict ? index.upper_bound(*lo)
                                 : index.lower_bound(*lo))
                    : index.begin();
    auto end = hi ? (hi_strict ? index.lower_bound(*hi)
                               : index.upper_bound(*hi))
                  : index.end();
    for (auto i = begin; i != end; ++i) out.push_back(i->second);
  };

  if (const auto* s = std::get_if<ScalarPredicate>(&pred.pred)) {
    switch (s->op) {
      case CompareOp::Eq:
        scan_range(&s->value, false, &s->value, false);
        break;
      case CompareOp::Ge:
        scan_range(&s->value, false, nullptr, false);
        break;
      case CompareOp::Gt:
        scan_range(&s->value, true, nullptr, false);
        break;
      case CompareOp::Le:
        scan_range(nullptr, false, &s->value, false);
        break;
      case CompareOp::Lt:
        scan_range(nullptr, false, &s->value, true);
        break;
      default:
        throw ContractViolation("predicate '" + pred.identity() +
                                "' is not index-scannable");
    }
  } else if (const auto* r = std::get_if<RangePredicate>(&pred.pred)) {
    scan_range(&r->lo, r->lo_op == CompareOp::Gt, &r->hi,
               r->hi_op == CompareOp::Lt);
  } else if (const auto* l = std::get_if<ListPredicate>(&pred.pred)) {
    if (l->negated)
      throw ContractViolation("NOT IN is not index-scannable");
    for (const auto& v : l->values) scan_range(&v, false, &v, false);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  } else {
    throw ContractViolation("derived predicates are not index-scannable");
  }
  return out;
}

Relation& Database::create_relation(const std::string& name) {
  return relations_[name] = Relation(name);
}

Relation& Database::relation(const std::string& name) {
  auto it = relations_.find(name);
  if (it == relations_.end())
    throw NotFoundError("unknown relation " + name);
  return it->second;
}

const Relation& Database::relation(const std::string& name) const {
  auto it = relations_.find(name);
  if (it == relations_.end())
    throw NotFoundError("unknown relation " + name);
  return it->second;
}

bool Database::has_relation(const std::string& name) const {
  return relations_.count(name) > 0;
}

std::vector<std::string> Database::relation_names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : relations_) out.push_back(name);
  return out;
}

Relation& Database::load_relation(const std::string& name,
                                  std::vector<Tuple> rows,
                                  const std::vector<std::string>& indexed) {
  Relation& rel = relations_[name] = Relation(name);
  rel.load_rows(std::move(rows));
  if (rel.has_attribute("owner")) rel.build_index("owner");
  for (const auto& attr : indexed)
    if (rel.has_attribute(attr)) rel.build_index(attr);
  std::set<std::string> est_attrs;
  for (const auto& [attr, _] : rel.schema()) est_attrs.insert(attr);
  estimators_[name] =
      SelectivityEstimator::build(rel.rows(), est_attrs);
  return rel;
}

Relation& Database::load_relation(const std::string& name,
                                  std::istream& rows_jsonl,
                                  const std::vector<std::string>& indexed) {
  std::vector<Tuple> rows;
  std::string line;
  while (std::getline(rows_jsonl, line)) {
    if (line.empty()) continue;
    rows.push_back(tuple_from_json(Json::parse(line), name));
  }
  return load_relation(name, std::move(rows), indexed);
}

const SelectivityEstimator& Database::estimator(
    const std::string& relation) const {
  auto it = estimators_.find(relation);
  if (it == estimators_.end())
    throw NotFoundError("no estimator for relation " + relation);
  return it->second;
}

IndexCatalog Database::index_catalog() const {
  IndexCatalog cat;
  for (const auto& [name, rel] : relations_)
    for (const auto& attr : rel.indexed_attributes())
      cat.add_index(name, attr);
  return cat;
}

namespace {

// Short-circuit disjunction over the partition, cheapest conjuncts first
// within each policy. Every started policy check counts once.
bool check_partition_inline(const Tuple& t, std::span<const Policy> partition,
                            ExecCounters& counters) {
  for (const auto& p : partition) {
    ++counters.policy_evals;
    if (eval_object_conditions(p.object_conditions, t)) return true;
  }
  return false;
}

// Tuple-aware filter: scans the partition's policy rows (charged per policy),
// then evaluates only the owner-matching subset.
struct DeltaFilter {
  std::map<Value, std::vector<const Policy*>, ValueLess> by_owner;

  explicit DeltaFilter(std::span<const Policy> partition) {
    for (const auto& p : partition) {
      const auto& oc = p.owner_condition();
      by_owner[std::get<ScalarPredicate>(oc.pred).value].push_back(&p);
    }
  }

  bool check(const Tuple& t, size_t partition_size,
             ExecCounters& counters) const {
    ++counters.delta_invocations;
    counters.delta_policies_scanned += static_cast<int64_t>(partition_size);
    const Value* owner = t.find("owner");
    if (owner == nullptr) return false;
    auto it = by_owner.find(*owner);
    if (it == by_owner.end()) return false;
    for (const Policy* p : it->second) {
      ++counters.policy_evals;
      if (eval_object_conditions(p->object_conditions, t)) return true;
    }
    return false;
  }
};

bool check_pushed_preds(const Tuple& t,
                        std::span<const ObjectCondition> preds,
                        ExecCounters& counters) {
  for (const auto& pred : preds) {
    ++counters.predicate_evals;
    const Value* v = t.find(pred.attribute);
    if (v == nullptr || !eval_predicate(pred.pred, *v)) return false;
  }
  return true;
}

}  // namespace

std::set<size_t> execute_access_plan(const Relation& rel,
                                     const RelationAccessPlan& plan,
                                     ExecCounters& counters) {
  std::set<size_t> out;
  if (plan.deny_all) return out;

  std::vector<std::unique_ptr<DeltaFilter>> delta_filters(plan.branches.size());
  auto branch_accepts = [&](size_t branch_idx, size_t row_id,
                            bool guard_known_true) -> bool {
    const GuardBranchPlan& branch = plan.branches[branch_idx];
    const Tuple& t = rel.row(row_id);
    if (!guard_known_true) {
      ++counters.predicate_evals;
      const Value* v = t.find(branch.guard.attribute);
      if (v == nullptr || !eval_predicate(branch.guard.pred, *v)) return false;
    }
    if (!check_pushed_preds(t, branch.pushed_preds, counters)) return false;
    if (branch.exec_mode == ExecMode::Delta) {
      if (!delta_filters[branch_idx])
        delta_filters[branch_idx] =
            std::make_unique<DeltaFilter>(branch.partition);
      return delta_filters[branch_idx]->check(t, branch.partition.size(),
                                              counters);
    }
    return check_partition_inline(t, branch.partition, counters);
  };

  switch (plan.strategy) {
    case Strategy::IndexGuards: {
      for (size_t b = 0; b < plan.branches.size(); ++b) {
        auto ids = rel.index_scan(plan.branches[b].guard);
        counters.rows_read_random += static_cast<int64_t>(ids.size());
        for (size_t id : ids)
          if (branch_accepts(b, id, /*guard_known_true=*/true)) out.insert(id);
      }
      break;
    }
    case Strategy::IndexQuery: {
      if (!plan.index_query_pred)
        throw ContractViolation("IndexQuery plan without a driving predicate");
      auto ids = rel.index_scan(*plan.index_query_pred);
      counters.rows_read_random += static_cast<int64_t>(ids.size());
      for (size_t id : ids)
        for (size_t b = 0; b < plan.branches.size(); ++b)
          if (branch_accepts(b, id, false)) {
            out.insert(id);
            break;
          }
      break;
    }
    case Strategy::LinearScan: {
      counters.rows_read_sequential += static_cast<int64_t>(rel.row_count());
      for (size_t id = 0; id < rel.row_count(); ++id)
        for (size_t b = 0; b < plan.branches.size(); ++b)
          if (branch_accepts(b, id, false)) {
            out.insert(id);
            break;
          }
      break;
    }
  }
  return out;
}

}  // namespace sieve
