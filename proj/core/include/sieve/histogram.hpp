#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "sieve/policy.hpp"

namespace sieve {

/// Single-attribute equi-depth histogram over the numeric projection of the
/// values. Buckets hold disjoint value ranges (duplicates of a boundary value
/// never straddle buckets), so estimates over a partition of the domain sum
/// to the row count.
class EquiDepthHistogram {
 public:
  struct Bucket {
    double lo = 0;
    double hi = 0;
    int64_t count = 0;
    int64_t distinct = 0;
  };

  EquiDepthHistogram() = default;

  /// spacing: half the distance between adjacent representable values
  /// (0.5 for integer-like tags, 0 for decimals). Gives buckets a continuous
  /// extent [lo - spacing, hi + spacing] for interpolation.
  static EquiDepthHistogram build(std::vector<double> values, int bucket_count,
                                  double spacing);

  int64_t total_count() const { return total_; }
  bool empty() const { return buckets_.empty(); }
  double domain_lo() const;
  double domain_hi() const;

  double estimate_equal(double v) const;
  double estimate_interval(const Interval& iv) const;

  const std::vector<Bucket>& buckets() const { return buckets_; }

 private:
  std::vector<Bucket> buckets_;
  int64_t total_ = 0;
  double spacing_ = 0.5;
};

/// Per-attribute histograms for one relation. Attributes without a histogram
/// (or text-valued predicates) fall back to the full row count, which is
/// conservative for guard costing.
class SelectivityEstimator {
 public:
  SelectivityEstimator() = default;

  static constexpr int kDefaultBuckets = 64;

  static SelectivityEstimator build(std::span<const Tuple> rows,
                                    const std::set<std::string>& attributes,
                                    int bucket_count = kDefaultBuckets);

  double relation_rows() const { return static_cast<double>(row_count_); }
  bool has_histogram(const std::string& attr) const;
  const EquiDepthHistogram* histogram(const std::string& attr) const;

  /// Estimated cardinality of the predicate, in rows.
  double estimate(const ObjectCondition& pred) const;
  double estimate_interval(const std::string& attr, const Interval& iv) const;

 private:
  std::map<std::string, EquiDepthHistogram> histograms_;
  int64_t row_count_ = 0;
};

}  // namespace sieve
