#include "sieve/eval.hpp"

namespace sieve {

bool eval_object_conditions(std::span<const ObjectCondition> conds,
                            const Tuple& t) {
  for (const auto& oc : conds) {
    if (oc.is_derived())
      throw UnsupportedConditionError("derived condition on attribute '" +
                                      oc.attribute + "'");
    const Value* v = t.find(oc.attribute);
    if (v == nullptr) continue;  // vacuously true
    if (!eval_predicate(oc.pred, *v)) return false;
  }
  return true;
}

std::vector<Policy> filter_policies_by_metadata(
    std::span<const Policy> all, const QueryMetadata& qm,
    const GroupDirectory& groups) {
  std::vector<Policy> out;
  for (const auto& p : all) {
    if (p.purpose != qm.purpose) continue;
    if (p.querier == qm.querier || groups.in_group(qm.querier, p.querier))
      out.push_back(p);
  }
  return out;
}

bool oracle_allows(const Tuple& t, std::span<const Policy> policies,
                   const QueryMetadata& qm, const GroupDirectory& groups) {
  for (const auto& p : policies) {
    if (p.purpose != qm.purpose) continue;
    if (p.querier != qm.querier && !groups.in_group(qm.querier, p.querier))
      continue;
    if (p.relation != t.relation) continue;
    if (eval_object_conditions(p.object_conditions, t)) return true;
  }
  return false;
}

std::vector<Tuple> oracle_allowed_tuples(std::span<const Tuple> rel,
                                         std::span<const Policy> policies,
                                         const QueryMetadata& qm,
                                         const GroupDirectory& groups) {
  auto relevant = filter_policies_by_metadata(policies, qm, groups);
  std::vector<Tuple> out;
  for (const auto& t : rel) {
    for (const auto& p : relevant) {
      if (p.relation != t.relation) continue;
      if (eval_object_conditions(p.object_conditions, t)) {
        out.push_back(t);
        break;
      }
    }
  }
  return out;
}

bool delta_filter(std::span<const Policy> policies, const QueryMetadata& qm,
                  const GroupDirectory& groups, const Tuple& t) {
  const Value* owner = t.find("owner");
  if (owner == nullptr) return false;
  for (const auto& p : policies) {
    if (p.purpose != qm.purpose) continue;
    if (p.querier != qm.querier && !groups.in_group(qm.querier, p.querier))
      continue;
    if (p.relation != t.relation) continue;
    const auto& oc = p.owner_condition();
    const auto& owner_val = std::get<ScalarPredicate>(oc.pred).value;
    if (owner->tag() != owner_val.tag() || !owner->equals(owner_val)) continue;
    if (eval_object_conditions(p.object_conditions, t)) return true;
  }
  return false;
}

}  // namespace sieve
