#pragma once

#include <set>
#include <string>
#include <vector>

#include "sieve/policy.hpp"

namespace sieve {

enum class ExecMode { Inline, Delta };

/// Source of process-unique guard ids (referenced by emitted delta calls).
struct GuardIdSource {
  virtual ~GuardIdSource() = default;
  virtual int64_t next_guard_id() = 0;
};

/// One disjunct of a guarded policy expression: an index-friendly guard
/// predicate plus the policies it fronts for.
struct GuardedExpressionTerm {
  ObjectCondition guard;
  std::vector<PolicyId> partition;
  ExecMode exec_mode = ExecMode::Inline;
  /// Stable id referenced by emitted delta(...) calls.
  int64_t guard_id = 0;
};

struct GeKey {
  std::string querier;
  std::string purpose;
  std::string relation;

  auto operator<=>(const GeKey&) const = default;
  std::string to_string() const {
    return querier + "/" + purpose + "/" + relation;
  }
};

struct GuardedPolicyExpression {
  GeKey key;
  std::vector<GuardedExpressionTerm> guards;
  LogicalTs built_at = 0;
  std::set<PolicyId> built_over;

  bool covers(PolicyId id) const { return built_over.count(id) > 0; }

  /// Partitions pairwise disjoint; their union equals built_over.
  void check_invariants() const;
};

}  // namespace sieve
