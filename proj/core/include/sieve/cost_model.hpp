#pragma once

#include <optional>
#include <span>
#include <string>

#include "sieve/guarded_expression.hpp"
#include "sieve/histogram.hpp"
#include "sieve/policy.hpp"

namespace sieve {

/// Calibrated cost constants. Units are abstract: only ratios drive
/// decisions (merge threshold, strategy choice, inline vs delta).
struct CostConstants {
  /// Cost of one (tuple x policy) object-condition evaluation.
  double c_e = 1.0;
  /// Cost of one random tuple read.
  double c_r = 10.0;
  /// Average-policies-checked factor in the partition evaluation model
  /// (fraction of the partition checked before a tuple settles).
  double alpha = 0.5;
  /// Per-invocation overhead of the tuple-aware policy filter.
  double udf_inv = 30.0;
  /// Per-partition-policy cost of one filter execution.
  double udf_exec = 0.25;
  /// How much cheaper a sequential read is than a random one.
  double seq_ratio = 10.0;

  void validate() const;

  /// Flat key=value calibration file.
  static CostConstants load_file(const std::string& path);
  void save_file(const std::string& path) const;
  static CostConstants parse(const std::string& text);
  std::string format() const;
};

/// Model cost of evaluating one tuple against a partition of the given size:
/// alpha * |partition| * c_e.
double cost_eval_partition(size_t partition_size, const CostConstants& k);

/// Model cost of one guarded expression: sel(guard) * (c_r + partition eval).
double cost_guarded_expression(const ObjectCondition& guard,
                               size_t partition_size,
                               const SelectivityEstimator& est,
                               const CostConstants& k);

/// Merging is never useful for disjoint ranges; for overlapping ones it pays
/// off when the overlap ratio sel(x & y) / sel(x | y) clears this threshold.
double merge_threshold(const CostConstants& k);

/// Returns the merged range when combining the two same-attribute conditions
/// is beneficial, nullopt otherwise. Point conditions count as zero-width
/// ranges, so equality guards on distinct values never merge.
std::optional<ObjectCondition> should_merge(const ObjectCondition& x,
                                            const ObjectCondition& y,
                                            const SelectivityEstimator& est,
                                            const CostConstants& k);

/// Tuple checks a guard saves versus an unguarded scan:
/// c_e * |partition| * (|R| - sel(guard)).
double guard_benefit(const ObjectCondition& guard, size_t partition_size,
                     const SelectivityEstimator& est, const CostConstants& k);

/// Benefit per unit read cost; +inf for a zero-read guard with benefit.
double guard_utility(const ObjectCondition& guard, size_t partition_size,
                     const SelectivityEstimator& est, const CostConstants& k);

enum class Strategy { LinearScan, IndexQuery, IndexGuards };

std::string_view strategy_name(Strategy s);

struct StrategyCosts {
  double linear_scan = 0;
  double index_query = 0;
  double index_guards = 0;
  Strategy best = Strategy::LinearScan;
};

/// Access-cost comparison of the three execution strategies.
/// query_pred_sel is the optimizer-reported cardinality of an index-usable
/// query predicate; without one, IndexQuery is infeasible.
StrategyCosts strategy_costs(std::optional<double> query_pred_sel,
                             std::span<const double> guard_sels,
                             double relation_rows, const CostConstants& k);

/// Delta pays off once the per-tuple filter cost undercuts inlining:
/// udf_inv + udf_exec * n < alpha * n * c_e.
ExecMode choose_inline_or_delta(size_t partition_size, const CostConstants& k);

/// Model-predicted partition size where delta first beats inline, if any.
std::optional<size_t> delta_crossover(const CostConstants& k,
                                      size_t max_partition = 100000);

/// Average number of policies a tuple is checked against before it satisfies
/// one (full partition size for tuples that satisfy none). This is the raw
/// measurement behind the alpha calibration; alpha itself is this average
/// divided by the partition size.
double measure_avg_policies_checked(std::span<const Policy> partition,
                                    std::span<const Tuple> sample);

}  // namespace sieve
