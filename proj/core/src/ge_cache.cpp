#include "sieve/ge_cache.hpp"

#include <algorithm>

namespace sieve {

RefreshStrategy refresh_strategy_from_name(const std::string& name) {
  if (name == "b1") return RefreshStrategy::B1AlwaysRegenerate;
  if (name == "b2") return RefreshStrategy::B2UpdateLimit;
  if (name == "o1") return RefreshStrategy::O1Mergeability;
  if (name == "o2") return RefreshStrategy::O2RelaxedMergeability;
  throw ParseError("unknown refresh strategy '" + name +
                   "' (expected b1, b2, o1, o2)");
}

std::string_view refresh_strategy_name(RefreshStrategy s) {
  switch (s) {
    case RefreshStrategy::B1AlwaysRegenerate:
      return "b1";
    case RefreshStrategy::B2UpdateLimit:
      return "b2";
    case RefreshStrategy::O1Mergeability:
      return "o1";
    case RefreshStrategy::O2RelaxedMergeability:
      return "o2";
  }
  return "?";
}

double CacheMetrics::hit_rate() const {
  return lookups() ? static_cast<double>(hits) / lookups() : 0.0;
}

double CacheMetrics::soft_hit_rate() const {
  return lookups() ? static_cast<double>(soft_hits) / lookups() : 0.0;
}

double CacheMetrics::miss_rate() const {
  return lookups() ? static_cast<double>(misses) / lookups() : 0.0;
}

Json CacheMetrics::to_json() const {
  Json j;
  j["hits"] = hits;
  j["soft_hits"] = soft_hits;
  j["misses"] = misses;
  j["regenerations"] = regenerations;
  j["updates"] = updates;
  j["evictions"] = evictions;
  j["hit_rate"] = hit_rate();
  j["soft_hit_rate"] = soft_hit_rate();
  j["miss_rate"] = miss_rate();
  return j;
}

double mergeable_fraction(const GuardedPolicyExpression& ge,
                          std::span<const Policy> new_policies) {
  if (new_policies.empty()) return 0.0;
  size_t mergeable = 0;
  for (const auto& p : new_policies) {
    bool covered = false;
    for (const auto& term : ge.guards) {
      for (const auto& oc : p.object_conditions) {
        if (oc.is_derived()) continue;
        if (condition_implies(oc, term.guard)) {
          covered = true;
          break;
        }
      }
      if (covered) break;
    }
    if (covered) ++mergeable;
  }
  return static_cast<double>(mergeable) /
         static_cast<double>(new_policies.size());
}

GeCache::GeCache(size_t capacity, RefreshStrategy strategy, CostConstants k)
    : capacity_(capacity),
      strategy_(strategy),
      k_(k),
      regen_threshold_(strategy == RefreshStrategy::O2RelaxedMergeability
                           ? 0.5
                           : 1.0),
      slots_(capacity) {}

void GeCache::set_regenerate_threshold(double threshold) {
  regen_threshold_ = threshold;
}

size_t GeCache::occupied() const {
  std::lock_guard lock(mu_);
  return index_.size();
}

std::vector<std::optional<GeKey>> GeCache::slot_keys() const {
  std::lock_guard lock(mu_);
  std::vector<std::optional<GeKey>> out(slots_.size());
  for (size_t i = 0; i < slots_.size(); ++i)
    if (slots_[i]) out[i] = slots_[i]->key;
  return out;
}

std::vector<bool> GeCache::slot_use_bits() const {
  std::lock_guard lock(mu_);
  std::vector<bool> out(slots_.size(), false);
  for (size_t i = 0; i < slots_.size(); ++i)
    if (slots_[i]) out[i] = slots_[i]->use_bit;
  return out;
}

size_t GeCache::clock_evict_locked() {
  // Second chance: clear set use bits until an unset one is found.
  for (size_t step = 0; step < 2 * capacity_ + 1; ++step) {
    auto& slot = slots_[hand_];
    if (!slot) return hand_;
    if (!slot->use_bit) {
      size_t victim = hand_;
      eviction_log_.push_back(slot->key);
      index_.erase(slot->key);
      slot.reset();
      ++metrics_.evictions;
      hand_ = (hand_ + 1) % capacity_;
      return victim;
    }
    slot->use_bit = false;
    hand_ = (hand_ + 1) % capacity_;
  }
  throw ContractViolation("clock sweep failed to find a victim");
}

void GeCache::insert_locked(Entry entry) {
  size_t slot_idx;
  auto free_slot = std::find_if(slots_.begin(), slots_.end(),
                                [](const auto& s) { return !s.has_value(); });
  if (free_slot != slots_.end()) {
    slot_idx = static_cast<size_t>(free_slot - slots_.begin());
  } else {
    slot_idx = clock_evict_locked();
  }
  index_[entry.key] = slot_idx;
  slots_[slot_idx] = std::move(entry);
}

GuardedPolicyExpression GeCache::refresh_locked(
    Entry& entry, std::vector<Policy> new_policies, bool had_deletions,
    PolicyStore& store, const GeBuilder& builder) {
  bool regenerate;
  if (had_deletions) {
    // Appending cannot express removal.
    regenerate = true;
  } else {
    switch (strategy_) {
      case RefreshStrategy::B1AlwaysRegenerate:
        regenerate = true;
        break;
      case RefreshStrategy::B2UpdateLimit:
        regenerate = entry.consecutive_updates + 1 >= update_limit_;
        break;
      case RefreshStrategy::O1Mergeability:
      case RefreshStrategy::O2RelaxedMergeability: {
        double fraction = mergeable_fraction(entry.ge, new_policies);
        regenerate = fraction >= regen_threshold_;
        break;
      }
    }
  }

  LogicalTs build_ts = store.now();
  if (regenerate) {
    auto all = store.fetch_policies(entry.key, 0);
    entry.ge = builder(entry.key, all, build_ts);
    entry.consecutive_updates = 0;
    ++metrics_.regenerations;
  } else {
    // Guard-set union: a term whose predicate already appears absorbs into
    // the existing term's partition; everything else is appended.
    GuardedPolicyExpression delta_ge =
        builder(entry.key, new_policies, build_ts);
    std::map<std::string, size_t> by_identity;
    for (size_t i = 0; i < entry.ge.guards.size(); ++i)
      by_identity.emplace(entry.ge.guards[i].guard.identity(), i);
    for (auto& term : delta_ge.guards) {
      auto existing = coalesce_on_update_
                          ? by_identity.find(term.guard.identity())
                          : by_identity.end();
      if (existing != by_identity.end()) {
        auto& host = entry.ge.guards[existing->second];
        host.partition.insert(host.partition.end(), term.partition.begin(),
                              term.partition.end());
        host.exec_mode = choose_inline_or_delta(host.partition.size(), k_);
      } else {
        by_identity.emplace(term.guard.identity(), entry.ge.guards.size());
        entry.ge.guards.push_back(std::move(term));
      }
    }
    entry.ge.built_over.insert(delta_ge.built_over.begin(),
                               delta_ge.built_over.end());
    entry.ge.built_at = build_ts;
    entry.ge.check_invariants();
    ++entry.consecutive_updates;
    ++metrics_.updates;
  }
  entry.deletion_epoch = store.deletion_epoch(entry.key);
  store.store_ge(entry.ge);
  return entry.ge;
}

GuardedPolicyExpression GeCache::lookup_or_build(const QueryMetadata& qm,
                                                 const std::string& relation,
                                                 PolicyStore& store,
                                                 const GeBuilder& builder) {
  GeKey key{qm.querier, qm.purpose, relation};

  std::unique_lock lock(mu_);
  auto it = index_.find(key);
  if (it != index_.end()) {
    Entry& entry = *slots_[it->second];
    auto new_policies = store.fetch_policies(key, entry.ge.built_at);
    int64_t epoch = store.deletion_epoch(key);
    if (new_policies.empty() && epoch == entry.deletion_epoch) {
      ++metrics_.hits;
      entry.use_bit = true;
      return entry.ge;
    }
    ++metrics_.soft_hits;
    auto ge = refresh_locked(entry, std::move(new_policies),
                             epoch != entry.deletion_epoch, store, builder);
    entry.use_bit = true;
    return ge;
  }

  // Miss. Concurrent misses for the same key share one build.
  auto building = building_.find(key);
  if (building != building_.end()) {
    auto fut = building->second;
    ++metrics_.misses;
    lock.unlock();
    return fut.get();
  }
  std::promise<GuardedPolicyExpression> promise;
  building_[key] = promise.get_future().share();
  ++metrics_.misses;
  LogicalTs build_ts = store.now();
  int64_t epoch = store.deletion_epoch(key);
  lock.unlock();

  GuardedPolicyExpression ge;
  try {
    auto all = store.fetch_policies(key, 0);
    ge = builder(key, all, build_ts);
  } catch (...) {
    lock.lock();
    building_.erase(key);
    lock.unlock();
    promise.set_exception(std::current_exception());
    throw;
  }
  store.store_ge(ge);

  lock.lock();
  building_.erase(key);
  if (capacity_ > 0 && !index_.count(key)) {
    Entry entry;
    entry.key = key;
    entry.ge = ge;
    entry.use_bit = true;
    entry.deletion_epoch = epoch;
    insert_locked(std::move(entry));
  }
  lock.unlock();
  promise.set_value(ge);
  return ge;
}

}  // namespace sieve
