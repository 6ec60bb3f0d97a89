#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sieve/engine.hpp"
#include "sieve/ge_cache.hpp"
#include "sieve/rewriter.hpp"
#include "sieve/workload.hpp"

namespace sieve {

/// A rewritten query produced rows the oracle pipeline disagrees with.
class VerificationError : public SieveError {
 public:
  using SieveError::SieveError;
};

struct BenchOptions {
  double cache_size_pct = 80.0;
  bool cache_enabled = true;
  RefreshStrategy strategy = RefreshStrategy::O1Mergeability;
  /// Cross-check every query against the oracle pipeline. Defaults on below
  /// 10k tuples, off above; set explicitly to override.
  std::optional<bool> verify;
  size_t data_rows = 2000;
  bool coalesce_on_update = true;
  CostConstants constants;
  DialectCapabilities caps;
};

struct EpochStat {
  int cycle = 0;
  int64_t hits = 0;
  int64_t soft_hits = 0;
  int64_t misses = 0;
  int64_t regenerations = 0;
  int64_t updates = 0;

  double hit_rate() const {
    int64_t total = hits + soft_hits + misses;
    return total ? static_cast<double>(hits) / total : 0.0;
  }
};

struct BaselineRow {
  std::string name;
  int64_t policy_evals = 0;
  int64_t rows_read = 0;
  double wall_ms = 0;
  double cost_units = 0;
  size_t result_rows = 0;
};

struct RunReport {
  // Phase wall times.
  double ge_build_ms = 0;
  double rewrite_ms = 0;
  double execute_ms = 0;
  // Abstract cost totals.
  double ge_build_cost_units = 0;
  double execute_cost_units = 0;

  CacheMetrics cache;
  ExecCounters counters;
  int64_t queries_executed = 0;
  int64_t policies_inserted = 0;
  int64_t policies_deleted = 0;
  int64_t verified_queries = 0;
  std::vector<EpochStat> per_epoch;
  std::vector<BaselineRow> baselines;
  Json config_echo;
  uint64_t seed = 0;

  Json to_json() const;
  std::string to_text() const;
  /// Per-epoch hit/soft-hit/miss series.
  std::string to_csv() const;
};

/// Replays a workload through store -> cache -> builder -> rewriter ->
/// engine. Construction loads the synthetic relation and indexes it.
class BenchHarness {
 public:
  BenchHarness(const ScenarioSpec& spec, const WorkloadConfig& cfg,
               const BenchOptions& opts);
  /// Use an externally loaded database (relation must exist already).
  BenchHarness(Database db, const BenchOptions& opts);

  RunReport run(const GeneratedWorkload& wl);
  /// Replays raw events (e.g. read back from a workload file).
  RunReport run_events(const std::vector<WorkloadEvent>& events,
                       size_t distinct_queriers);

  Database& db() { return db_; }
  PolicyStore& store() { return store_; }

  /// Enforcement baselines over one query: flat policy DNF on a scan
  /// (Baseline_P), per-policy index union (Baseline_I), per-tuple filter
  /// operator (Baseline_U), and the guarded rewrite (Sieve). All four return
  /// the same rows; counters and timings differ.
  std::vector<BaselineRow> run_baselines(const QueryInstance& query);

 private:
  GuardedPolicyExpression provide_ge(const GeKey& key);
  void verify_one(const ParsedQuery& q, const QueryMetadata& qm,
                  const QueryResult& actual, int64_t seq,
                  const std::string& sql);

  Database db_;
  PolicyStore store_;
  BenchOptions opts_;
  std::unique_ptr<GeCache> cache_;
  RunReport report_;
  std::string relation_;
};

/// Calibration. Deterministic mode returns the fixed default schedule the
/// engine charges with. Measured mode times object-condition evaluation,
/// random and sequential reads on the loaded relation, and the
/// average-policies-checked factor over a sample; filter-operator costs stay
/// at the schedule defaults since in-process calls have no UDF boundary.
CostConstants calibrate(const Database& db, const std::string& relation,
                        std::span<const Policy> sample_policies,
                        bool deterministic);

}  // namespace sieve
