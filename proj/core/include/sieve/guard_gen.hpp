#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "sieve/cost_model.hpp"
#include "sieve/histogram.hpp"
#include "sieve/policy.hpp"

namespace sieve {

/// Indexed attributes per relation; owner is always indexed.
class IndexCatalog {
 public:
  IndexCatalog() = default;

  void add_index(const std::string& relation, const std::string& attribute);
  bool is_indexed(const std::string& relation,
                  const std::string& attribute) const;
  std::set<std::string> indexed_attributes(const std::string& relation) const;

 private:
  std::map<std::string, std::set<std::string>> indexes_;
};

struct CandidateGuard {
  ObjectCondition predicate;
  std::set<PolicyId> covered_policies;
  /// Guards produced by merging record how many inputs they absorbed; used
  /// by the no-disjoint-merge property check.
  int merged_from = 1;
};

/// Every guard-eligible object condition (indexed attribute, constant value)
/// becomes a singleton candidate; identical predicates share one candidate.
/// Per-attribute lists are sorted by left range value, with ties broken by
/// right bound then smallest covered policy id.
std::map<std::string, std::vector<CandidateGuard>> collect_candidates(
    std::span<const Policy> policies, const IndexCatalog& idx);

/// Left-to-right merge sweep over one attribute's sorted candidates. The
/// cursor probes forward, absorbing beneficial merges and skipping
/// overlapping-but-unprofitable neighbours, and stops probing at the first
/// disjoint candidate.
std::vector<CandidateGuard> merge_pass(std::vector<CandidateGuard> sorted,
                                       const SelectivityEstimator& est,
                                       const CostConstants& k);

/// collect + merge across all attributes. Postcondition: every input policy
/// is covered by at least one candidate (the owner condition guarantees it).
std::vector<CandidateGuard> generate_candidate_set(
    std::span<const Policy> policies, const IndexCatalog& idx,
    const SelectivityEstimator& est, const CostConstants& k);

/// Reference procedure for small instances: exhaustive pairwise merging to a
/// fixpoint, scanning pairs in sorted order. merge_pass must agree with it.
std::vector<CandidateGuard> merge_to_fixpoint_reference(
    std::vector<CandidateGuard> cands, const SelectivityEstimator& est,
    const CostConstants& k);

void sort_candidates(std::vector<CandidateGuard>& cands);

}  // namespace sieve
