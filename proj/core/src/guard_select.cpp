#include "sieve/guard_select.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <set>

namespace sieve {

namespace {

struct QueueEntry {
  double utility;
  double sel;
  std::string identity;
  size_t cand;
  uint64_t version;

  // Max-heap: higher utility first; ties by smaller selectivity, then
  // lexicographic identity, so selection is deterministic.
  bool operator<(const QueueEntry& other) const {
    if (utility != other.utility) return utility < other.utility;
    if (sel != other.sel) return sel > other.sel;
    return identity > other.identity;
  }
};

}  // namespace

GuardedPolicyExpression select_guards(std::span<const CandidateGuard> cands,
                                      std::span<const PolicyId> all_policies,
                                      const GeKey& key, LogicalTs built_at,
                                      const SelectivityEstimator& est,
                                      const CostConstants& k,
                                      GuardIdSource* guard_ids) {
  std::set<PolicyId> uncovered(all_policies.begin(), all_policies.end());
  {
    std::set<PolicyId> coverable;
    for (const auto& c : cands)
      coverable.insert(c.covered_policies.begin(), c.covered_policies.end());
    for (PolicyId id : uncovered)
      if (!coverable.count(id))
        throw ContractViolation("candidate set does not cover policy " +
                                std::to_string(id));
  }

  struct LiveCandidate {
    ObjectCondition predicate;
    std::set<PolicyId> coverage;
    double sel;
    uint64_t version = 0;
  };
  std::vector<LiveCandidate> live;
  live.reserve(cands.size());
  std::priority_queue<QueueEntry> queue;
  for (const auto& c : cands) {
    LiveCandidate lc{c.predicate, c.covered_policies, est.estimate(c.predicate)};
    double u = guard_utility(lc.predicate, lc.coverage.size(), est, k);
    queue.push(QueueEntry{u, lc.sel, lc.predicate.identity(), live.size(), 0});
    live.push_back(std::move(lc));
  }

  GuardedPolicyExpression ge;
  ge.key = key;
  ge.built_at = built_at;
  ge.built_over.insert(all_policies.begin(), all_policies.end());

  while (!queue.empty() && !uncovered.empty()) {
    QueueEntry top = queue.top();
    queue.pop();
    LiveCandidate& chosen = live[top.cand];
    if (top.version != chosen.version || chosen.coverage.empty()) continue;

    GuardedExpressionTerm term;
    term.guard = chosen.predicate;
    term.partition.assign(chosen.coverage.begin(), chosen.coverage.end());
    term.guard_id = guard_ids ? guard_ids->next_guard_id()
                              : static_cast<int64_t>(ge.guards.size() + 1);

    for (PolicyId id : chosen.coverage) uncovered.erase(id);
    std::set<PolicyId> adopted = std::move(chosen.coverage);
    chosen.coverage.clear();
    ++chosen.version;

    for (size_t i = 0; i < live.size(); ++i) {
      LiveCandidate& other = live[i];
      if (other.coverage.empty()) continue;
      bool shrunk = false;
      for (PolicyId id : adopted) shrunk |= other.coverage.erase(id) > 0;
      if (!shrunk) continue;
      ++other.version;
      if (other.coverage.empty()) continue;
      double u = guard_utility(other.predicate, other.coverage.size(), est, k);
      queue.push(QueueEntry{u, other.sel, other.predicate.identity(), i,
                            other.version});
    }

    ge.guards.push_back(std::move(term));
  }

  if (!uncovered.empty())
    throw ContractViolation("guard selection left policies uncovered");
  ge.check_invariants();

  for (auto& term : ge.guards)
    term.exec_mode = choose_inline_or_delta(term.partition.size(), k);
  return ge;
}

double ge_total_cost(const GuardedPolicyExpression& ge,
                     const SelectivityEstimator& est, const CostConstants& k) {
  double total = 0;
  for (const auto& term : ge.guards)
    total += cost_guarded_expression(term.guard, term.partition.size(), est, k);
  return total;
}

double optimal_cover_cost(std::span<const CandidateGuard> cands,
                          std::span<const PolicyId> all_policies,
                          const SelectivityEstimator& est,
                          const CostConstants& k) {
  const size_t n = cands.size();
  if (n > 20)
    throw ContractViolation("optimal_cover_cost is exponential; cap inputs");
  std::vector<double> sels(n);
  for (size_t i = 0; i < n; ++i) sels[i] = est.estimate(cands[i].predicate);

  double best = std::numeric_limits<double>::infinity();
  for (uint64_t mask = 1; mask < (uint64_t{1} << n); ++mask) {
    // Assign each policy to the cheapest-read selected guard covering it.
    std::vector<size_t> partition_sizes(n, 0);
    bool feasible = true;
    for (PolicyId id : all_policies) {
      size_t best_guard = n;
      for (size_t i = 0; i < n; ++i) {
        if (!(mask & (uint64_t{1} << i))) continue;
        if (!cands[i].covered_policies.count(id)) continue;
        if (best_guard == n || sels[i] < sels[best_guard]) best_guard = i;
      }
      if (best_guard == n) {
        feasible = false;
        break;
      }
      ++partition_sizes[best_guard];
    }
    if (!feasible) continue;
    double cost = 0;
    for (size_t i = 0; i < n; ++i) {
      if (!(mask & (uint64_t{1} << i)) || partition_sizes[i] == 0) continue;
      cost += sels[i] * (k.c_r + cost_eval_partition(partition_sizes[i], k));
    }
    best = std::min(best, cost);
  }
  return best;
}

}  // namespace sieve
