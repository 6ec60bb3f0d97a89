#pragma once

#include <functional>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sieve/cost_model.hpp"
#include "sieve/guarded_expression.hpp"
#include "sieve/json_io.hpp"
#include "sieve/store.hpp"

namespace sieve {

enum class RefreshStrategy {
  B1AlwaysRegenerate,
  B2UpdateLimit,
  O1Mergeability,
  O2RelaxedMergeability,
};

RefreshStrategy refresh_strategy_from_name(const std::string& name);
std::string_view refresh_strategy_name(RefreshStrategy s);

struct CacheMetrics {
  int64_t hits = 0;
  int64_t soft_hits = 0;
  int64_t misses = 0;
  int64_t regenerations = 0;
  int64_t updates = 0;
  int64_t evictions = 0;

  int64_t lookups() const { return hits + soft_hits + misses; }
  double hit_rate() const;
  double soft_hit_rate() const;
  double miss_rate() const;
  Json to_json() const;
};

/// Fraction of the new policies some guard of the expression already covers
/// (an object condition of the policy implies the guard).
double mergeable_fraction(const GuardedPolicyExpression& ge,
                          std::span<const Policy> new_policies);

/// Builds a GE for the key over exactly these policies, stamped built_at.
using GeBuilder = std::function<GuardedPolicyExpression(
    const GeKey&, const std::vector<Policy>&, LogicalTs built_at)>;

/// Fixed-capacity cache of guarded expressions keyed by
/// (querier, purpose, relation), clock (second-chance) replacement, and a
/// pluggable refresh strategy for entries whose policy set changed.
class GeCache {
 public:
  GeCache(size_t capacity, RefreshStrategy strategy, CostConstants k = {});

  /// Hit: no policy churn since the entry was built; returns it untouched.
  /// Soft-hit: new policies (or deletions) exist; refreshes per strategy.
  /// Miss: builds from the full policy set, inserting via clock eviction.
  /// The returned GE always covers the currently relevant policies.
  GuardedPolicyExpression lookup_or_build(const QueryMetadata& qm,
                                          const std::string& relation,
                                          PolicyStore& store,
                                          const GeBuilder& builder);

  size_t capacity() const { return capacity_; }
  size_t occupied() const;
  const CacheMetrics& metrics() const { return metrics_; }
  void reset_metrics() { metrics_ = CacheMetrics{}; }

  RefreshStrategy strategy() const { return strategy_; }
  /// Mergeable-fraction threshold that triggers regeneration for the
  /// mergeability strategies (1.0 for O1, 0.5 for O2). Exposed for
  /// sensitivity runs.
  void set_regenerate_threshold(double threshold);
  double regenerate_threshold() const { return regen_threshold_; }
  /// Consecutive-update limit for B2.
  void set_update_limit(int limit) { update_limit_ = limit; }
  /// Whether an appended guard with an identical predicate folds into the
  /// existing term instead of adding a duplicate branch.
  void set_coalesce_on_update(bool on) { coalesce_on_update_ = on; }

  /// Keys evicted so far, in order.
  const std::vector<GeKey>& eviction_log() const { return eviction_log_; }
  std::vector<std::optional<GeKey>> slot_keys() const;
  std::vector<bool> slot_use_bits() const;
  size_t hand() const { return hand_; }

 private:
  struct Entry {
    GeKey key;
    GuardedPolicyExpression ge;
    bool use_bit = false;
    int consecutive_updates = 0;
    int64_t deletion_epoch = 0;
  };

  size_t clock_evict_locked();
  void insert_locked(Entry entry);
  GuardedPolicyExpression refresh_locked(Entry& entry,
                                         std::vector<Policy> new_policies,
                                         bool had_deletions, PolicyStore& store,
                                         const GeBuilder& builder);

  mutable std::mutex mu_;
  size_t capacity_;
  RefreshStrategy strategy_;
  CostConstants k_;
  double regen_threshold_;
  int update_limit_ = 10;
  bool coalesce_on_update_ = true;
  std::vector<std::optional<Entry>> slots_;
  std::map<GeKey, size_t> index_;
  size_t hand_ = 0;
  CacheMetrics metrics_;
  std::vector<GeKey> eviction_log_;
  std::map<GeKey, std::shared_future<GuardedPolicyExpression>> building_;
};

}  // namespace sieve
