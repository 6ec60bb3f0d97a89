#pragma once

#include <span>
#include <vector>

#include "sieve/policy.hpp"

namespace sieve {

/// Reference access-control semantics. These are the oracle every execution
/// path is checked against; they stay deliberately simple and unoptimized.

/// True iff every condition whose attribute exists on the tuple holds.
/// Conditions over attributes absent from the tuple are vacuously true
/// (implication form). Derived conditions are rejected.
bool eval_object_conditions(std::span<const ObjectCondition> conds,
                            const Tuple& t);

/// Policies relevant to the query metadata: matching purpose, and querier
/// either named directly or via one of the querier's groups. A superset of
/// everything that can influence the answer.
std::vector<Policy> filter_policies_by_metadata(
    std::span<const Policy> all, const QueryMetadata& qm,
    const GroupDirectory& groups);

/// Default-deny projection: a tuple passes iff some relevant policy's object
/// conditions accept it.
std::vector<Tuple> oracle_allowed_tuples(std::span<const Tuple> rel,
                                         std::span<const Policy> policies,
                                         const QueryMetadata& qm,
                                         const GroupDirectory& groups);

/// Membership variant of the oracle for a single tuple.
bool oracle_allows(const Tuple& t, std::span<const Policy> policies,
                   const QueryMetadata& qm, const GroupDirectory& groups);

/// Tuple-aware policy filter: narrows the set to policies owned by the
/// tuple's owner (and matching the metadata) before evaluating. Equals
/// oracle membership for the same inputs.
bool delta_filter(std::span<const Policy> policies, const QueryMetadata& qm,
                  const GroupDirectory& groups, const Tuple& t);

}  // namespace sieve
