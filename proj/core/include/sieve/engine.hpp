#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "sieve/cost_model.hpp"
#include "sieve/guard_gen.hpp"
#include "sieve/guarded_expression.hpp"
#include "sieve/histogram.hpp"
#include "sieve/policy.hpp"

namespace sieve {

/// Exact instrumentation counters; never estimates.
struct ExecCounters {
  int64_t rows_read_random = 0;
  int64_t rows_read_sequential = 0;
  int64_t predicate_evals = 0;
  int64_t policy_evals = 0;
  int64_t delta_invocations = 0;
  int64_t delta_policies_scanned = 0;

  void reset() { *this = ExecCounters{}; }
  ExecCounters& operator+=(const ExecCounters& o);

  /// Abstract cost of the counted work under the calibration: random reads
  /// at c_r, sequential reads at c_r/seq_ratio, policy checks at c_e, filter
  /// invocations at udf_inv plus udf_exec per scanned partition policy.
  double cost_units(const CostConstants& k) const;
};

class Relation {
 public:
  Relation() = default;
  explicit Relation(std::string name) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }
  /// Relations carrying an owner attribute are subject to access control.
  bool governed() const;

  void load_rows(std::vector<Tuple> rows);
  void build_index(const std::string& attr);

  size_t row_count() const { return rows_.size(); }
  const Tuple& row(size_t id) const { return rows_[id]; }
  const std::vector<Tuple>& rows() const { return rows_; }
  const std::map<std::string, ValueTag>& schema() const { return schema_; }
  bool has_attribute(const std::string& attr) const;
  bool has_index(const std::string& attr) const;
  std::set<std::string> indexed_attributes() const;

  /// Row ids whose attribute value falls in the predicate's index range.
  /// Only equality/range shaped predicates are index-scannable.
  std::vector<size_t> index_scan(const ObjectCondition& pred) const;

 private:
  std::string name_;
  std::vector<Tuple> rows_;
  std::map<std::string, ValueTag> schema_;
  std::map<std::string, std::multimap<Value, size_t, ValueLess>> indexes_;
};

class Database {
 public:
  Relation& create_relation(const std::string& name);
  Relation& relation(const std::string& name);
  const Relation& relation(const std::string& name) const;
  bool has_relation(const std::string& name) const;
  std::vector<std::string> relation_names() const;

  /// Loads JSONL rows, builds the default indexes (owner plus any listed
  /// attributes) and the selectivity estimator.
  Relation& load_relation(const std::string& name, std::istream& rows_jsonl,
                          const std::vector<std::string>& indexed_attrs);
  Relation& load_relation(const std::string& name, std::vector<Tuple> rows,
                          const std::vector<std::string>& indexed_attrs);

  const SelectivityEstimator& estimator(const std::string& relation) const;
  IndexCatalog index_catalog() const;

 private:
  std::map<std::string, Relation> relations_;
  std::map<std::string, SelectivityEstimator> estimators_;
};

/// How one governed relation is filtered down to its policy-compliant
/// projection.
struct GuardBranchPlan {
  ObjectCondition guard;
  std::vector<ObjectCondition> pushed_preds;
  ExecMode exec_mode = ExecMode::Inline;
  int64_t guard_id = 0;
  std::vector<Policy> partition;
};

struct RelationAccessPlan {
  std::string relation;
  Strategy strategy = Strategy::IndexGuards;
  bool deny_all = false;
  std::vector<GuardBranchPlan> branches;
  /// Present when strategy == IndexQuery: the query predicate whose index
  /// drives the scan.
  std::optional<ObjectCondition> index_query_pred;
};

/// Materializes the policy-compliant row-id set for one relation, honoring
/// index hints literally: a forced-index branch reads only rows in the index
/// range, a linear scan reads every row sequentially. UNION branches
/// deduplicate by row id; counters record both branches' work.
std::set<size_t> execute_access_plan(const Relation& rel,
                                     const RelationAccessPlan& plan,
                                     ExecCounters& counters);

struct ExplainEntry {
  std::string relation;
  std::string access_path;  // "index_scan(attr)" or "table_scan"
  double estimated_rows = 0;
  std::optional<ObjectCondition> driving_pred;
};

}  // namespace sieve
