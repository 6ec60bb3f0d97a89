#pragma once

#include <span>
#include <vector>

#include "sieve/guard_gen.hpp"
#include "sieve/guarded_expression.hpp"

namespace sieve {

/// Greedy utility-ordered selection: repeatedly adopt the max-utility
/// candidate, subtract its partition from every remaining candidate's
/// coverage, drop emptied candidates, recompute utilities and reinsert.
/// Stale priority-queue entries are skipped via a version counter rather
/// than decrease-key. Terminates with disjoint partitions covering every
/// policy; per-guard exec mode assigned afterwards from the final partition
/// size.
GuardedPolicyExpression select_guards(std::span<const CandidateGuard> cands,
                                      std::span<const PolicyId> all_policies,
                                      const GeKey& key, LogicalTs built_at,
                                      const SelectivityEstimator& est,
                                      const CostConstants& k,
                                      GuardIdSource* guard_ids = nullptr);

/// Sum of per-guard costs under the cost model.
double ge_total_cost(const GuardedPolicyExpression& ge,
                     const SelectivityEstimator& est, const CostConstants& k);

/// Exhaustive reference for small instances: minimum-cost guard subset with
/// each policy assigned to its cheapest covering guard. Exponential in the
/// candidate count.
double optimal_cover_cost(std::span<const CandidateGuard> cands,
                          std::span<const PolicyId> all_policies,
                          const SelectivityEstimator& est,
                          const CostConstants& k);

}  // namespace sieve
