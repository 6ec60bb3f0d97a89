#include "sieve/guard_gen.hpp"

#include <algorithm>

namespace sieve {

void IndexCatalog::add_index(const std::string& relation,
                             const std::string& attribute) {
  indexes_[relation].insert(attribute);
}

bool IndexCatalog::is_indexed(const std::string& relation,
                              const std::string& attribute) const {
  if (attribute == "owner") return true;
  auto it = indexes_.find(relation);
  return it != indexes_.end() && it->second.count(attribute) > 0;
}

std::set<std::string> IndexCatalog::indexed_attributes(
    const std::string& relation) const {
  std::set<std::string> out{"owner"};
  auto it = indexes_.find(relation);
  if (it != indexes_.end())
    out.insert(it->second.begin(), it->second.end());
  return out;
}

namespace {

bool guard_eligible(const ObjectCondition& oc, const std::string& relation,
                    const IndexCatalog& idx) {
  if (oc.is_derived()) return false;
  if (!idx.is_indexed(relation, oc.attribute)) return false;
  return oc.interval().has_value();
}

PolicyId min_policy_id(const std::set<PolicyId>& ids) {
  return ids.empty() ? 0 : *ids.begin();
}

}  // namespace

void sort_candidates(std::vector<CandidateGuard>& cands) {
  std::sort(cands.begin(), cands.end(),
            [](const CandidateGuard& a, const CandidateGuard& b) {
              Interval ia = *a.predicate.interval();
              Interval ib = *b.predicate.interval();
              if (ia.lo != ib.lo) return ia.lo < ib.lo;
              if (ia.hi != ib.hi) return ia.hi < ib.hi;
              return min_policy_id(a.covered_policies) <
                     min_policy_id(b.covered_policies);
            });
}

std::map<std::string, std::vector<CandidateGuard>> collect_candidates(
    std::span<const Policy> policies, const IndexCatalog& idx) {
  std::map<std::string, std::map<std::string, CandidateGuard>> per_attr;
  for (const auto& p : policies) {
    p.validate();  // guarantees the owner fallback candidate exists
    for (const auto& oc : p.object_conditions) {
      if (!guard_eligible(oc, p.relation, idx)) continue;
      auto& slot = per_attr[oc.attribute][oc.identity()];
      if (slot.covered_policies.empty()) slot.predicate = oc;
      slot.covered_policies.insert(p.id);
    }
  }
  std::map<std::string, std::vector<CandidateGuard>> out;
  for (auto& [attr, by_identity] : per_attr) {
    std::vector<CandidateGuard> list;
    list.reserve(by_identity.size());
    for (auto& [identity, cand] : by_identity) list.push_back(std::move(cand));
    sort_candidates(list);
    out.emplace(attr, std::move(list));
  }
  return out;
}

std::vector<CandidateGuard> merge_pass(std::vector<CandidateGuard> cands,
                                       const SelectivityEstimator& est,
                                       const CostConstants& k) {
  for (size_t i = 0; i < cands.size(); ++i) {
    size_t j = i + 1;
    while (j < cands.size()) {
      Interval ix = *cands[i].predicate.interval();
      Interval iy = *cands[j].predicate.interval();
      if (!ix.overlaps(iy)) break;  // sorted by left bound: later ones too
      auto merged = should_merge(cands[i].predicate, cands[j].predicate, est, k);
      if (merged) {
        cands[i].predicate = std::move(*merged);
        cands[i].covered_policies.insert(cands[j].covered_policies.begin(),
                                         cands[j].covered_policies.end());
        cands[i].merged_from += cands[j].merged_from;
        cands.erase(cands.begin() + static_cast<ptrdiff_t>(j));
      } else {
        ++j;
      }
    }
  }
  return cands;
}

std::vector<CandidateGuard> generate_candidate_set(
    std::span<const Policy> policies, const IndexCatalog& idx,
    const SelectivityEstimator& est, const CostConstants& k) {
  std::vector<CandidateGuard> out;
  for (auto& [attr, list] : collect_candidates(policies, idx)) {
    auto merged = merge_pass(std::move(list), est, k);
    out.insert(out.end(), std::make_move_iterator(merged.begin()),
               std::make_move_iterator(merged.end()));
  }
  return out;
}

std::vector<CandidateGuard> merge_to_fixpoint_reference(
    std::vector<CandidateGuard> cands, const SelectivityEstimator& est,
    const CostConstants& k) {
  bool changed = true;
  while (changed) {
    changed = false;
    sort_candidates(cands);
    for (size_t i = 0; i < cands.size() && !changed; ++i) {
      for (size_t j = i + 1; j < cands.size() && !changed; ++j) {
        if (!cands[i].predicate.interval()->overlaps(
                *cands[j].predicate.interval()))
          continue;
        auto merged =
            should_merge(cands[i].predicate, cands[j].predicate, est, k);
        if (!merged) continue;
        cands[i].predicate = std::move(*merged);
        cands[i].covered_policies.insert(cands[j].covered_policies.begin(),
                                         cands[j].covered_policies.end());
        cands[i].merged_from += cands[j].merged_from;
        cands.erase(cands.begin() + static_cast<ptrdiff_t>(j));
        changed = true;
      }
    }
  }
  sort_candidates(cands);
  return cands;
}

}  // namespace sieve
