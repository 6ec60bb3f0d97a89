#pragma once

#include <fstream>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "sieve/guarded_expression.hpp"
#include "sieve/policy.hpp"

namespace sieve {

struct StoredGuardedPolicyExpression {
  int64_t id = 0;
  GuardedPolicyExpression ge;
  bool outdated = false;
  LogicalTs inserted_at = 0;
};

/// In-process store for policies and guarded expressions with freshness
/// tracking. Logical monotone timestamps instead of wall clock so workload
/// replays are deterministic. Single writer, concurrent readers.
class PolicyStore : public GuardIdSource {
 public:
  PolicyStore() = default;
  explicit PolicyStore(GroupDirectory groups) : groups_(std::move(groups)) {}

  /// Drops all state and restarts the counters.
  void reset();

  void set_groups(GroupDirectory groups);
  const GroupDirectory& groups() const { return groups_; }

  /// Stores the policy and marks every cached GE it can affect as outdated.
  /// inserted_at is assigned from the store-wide monotone counter; a zero id
  /// gets the next free id, an explicit duplicate id is a conflict.
  PolicyId insert_policy(Policy p);

  /// Removes the policy, marks affected GEs outdated, and bumps the deletion
  /// epoch of every registered key the policy governed.
  void delete_policy(PolicyId id);

  bool has_policy(PolicyId id) const;
  std::optional<Policy> get_policy(PolicyId id) const;
  size_t policy_count() const;
  std::vector<Policy> all_policies() const;

  /// Matching policies with inserted_at > since, ordered by inserted_at.
  /// since = 0 returns everything relevant to the key.
  std::vector<Policy> fetch_policies(const GeKey& key, LogicalTs since) const;
  std::vector<Policy> fetch_policies(const std::string& querier,
                                     const std::string& purpose,
                                     const std::string& relation,
                                     LogicalTs since) const;

  /// Replaces any prior GE under the same key; stored fresh (outdated=false).
  int64_t store_ge(GuardedPolicyExpression ge);
  std::optional<StoredGuardedPolicyExpression> fetch_ge(const GeKey& key) const;

  /// Current value of the monotone timestamp counter.
  LogicalTs now() const;

  /// Per-key deletion counter. Reading registers the key so later deletions
  /// that affect it are observable; fetch_policies(key, ts) alone cannot see
  /// removals.
  int64_t deletion_epoch(const GeKey& key) const;

  /// Optional append-only JSONL journal of mutations.
  void attach_journal(const std::string& path);

  /// Canonical state dump: policies ordered by id, then GE records ordered
  /// by key. import/export round-trips byte-exactly.
  void export_state(std::ostream& out) const;
  void import_state(std::istream& in);

 private:
  bool key_matches_policy_locked(const GeKey& key, const Policy& p) const;
  void journal_line_locked(const std::string& line);

  mutable std::shared_mutex mu_;
  GroupDirectory groups_;
  std::map<PolicyId, Policy> policies_;
  // Secondary index: policy querier -> ids, so per-key fetches stay
  // proportional to the querier's own policies.
  std::map<std::string, std::set<PolicyId>> by_querier_;
  std::map<GeKey, StoredGuardedPolicyExpression> ges_;
  mutable std::map<GeKey, int64_t> deletion_epochs_;
  LogicalTs ts_counter_ = 0;
  PolicyId max_id_ = 0;
  int64_t next_ge_id_ = 0;
  int64_t next_guard_id_ = 0;
  std::unique_ptr<std::ofstream> journal_;

 public:
  int64_t next_guard_id() override;
};

}  // namespace sieve
