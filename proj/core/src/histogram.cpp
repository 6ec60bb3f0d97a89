#include "sieve/histogram.hpp"

#include <algorithm>
#include <cmath>

namespace sieve {

EquiDepthHistogram EquiDepthHistogram::build(std::vector<double> values,
                                             int bucket_count,
                                             double spacing) {
  EquiDepthHistogram h;
  h.spacing_ = spacing;
  h.total_ = static_cast<int64_t>(values.size());
  if (values.empty()) return h;
  std::sort(values.begin(), values.end());

  const size_t n = values.size();
  const size_t target =
      std::max<size_t>(1, (n + bucket_count - 1) / bucket_count);
  size_t i = 0;
  while (i < n) {
    size_t j = std::min(n, i + target);
    // Never split a run of duplicates across buckets.
    while (j < n && values[j] == values[j - 1]) ++j;
    Bucket b;
    b.lo = values[i];
    b.hi = values[j - 1];
    b.count = static_cast<int64_t>(j - i);
    b.distinct = 1;
    for (size_t k = i + 1; k < j; ++k)
      if (values[k] != values[k - 1]) ++b.distinct;
    h.buckets_.push_back(b);
    i = j;
  }
  return h;
}

double EquiDepthHistogram::domain_lo() const {
  return buckets_.empty() ? 0 : buckets_.front().lo - spacing_;
}

double EquiDepthHistogram::domain_hi() const {
  return buckets_.empty() ? 0 : buckets_.back().hi + spacing_;
}

double EquiDepthHistogram::estimate_equal(double v) const {
  for (const auto& b : buckets_) {
    if (v < b.lo || v > b.hi) continue;
    return static_cast<double>(b.count) / static_cast<double>(b.distinct);
  }
  return 0.0;
}

double EquiDepthHistogram::estimate_interval(const Interval& iv) const {
  if (iv.empty()) return 0.0;
  double total = 0.0;
  for (const auto& b : buckets_) {
    double blo = b.lo - spacing_;
    double bhi = b.hi + spacing_;
    if (iv.hi < blo || iv.lo > bhi) continue;
    if (iv.lo <= blo && bhi <= iv.hi) {
      total += static_cast<double>(b.count);
      continue;
    }
    double width = bhi - blo;
    if (width <= 0) {
      // Degenerate bucket (single point, zero spacing): all or nothing.
      total += static_cast<double>(b.count);
      continue;
    }
    double overlap = std::min(iv.hi, bhi) - std::max(iv.lo, blo);
    if (overlap > 0)
      total += static_cast<double>(b.count) * (overlap / width);
  }
  return total;
}

namespace {

double tag_spacing(ValueTag tag) {
  return tag == ValueTag::Decimal ? 0.0 : 0.5;
}

}  // namespace

SelectivityEstimator SelectivityEstimator::build(
    std::span<const Tuple> rows, const std::set<std::string>& attributes,
    int bucket_count) {
  SelectivityEstimator est;
  est.row_count_ = static_cast<int64_t>(rows.size());
  for (const auto& attr : attributes) {
    std::vector<double> values;
    values.reserve(rows.size());
    double spacing = 0.5;
    bool numeric = true;
    for (const auto& t : rows) {
      const Value* v = t.find(attr);
      if (v == nullptr) continue;
      if (!v->has_numeric()) {
        numeric = false;
        break;
      }
      spacing = tag_spacing(v->tag());
      values.push_back(v->numeric());
    }
    if (!numeric || values.empty()) continue;
    est.histograms_.emplace(
        attr, EquiDepthHistogram::build(std::move(values), bucket_count,
                                        spacing));
  }
  return est;
}

bool SelectivityEstimator::has_histogram(const std::string& attr) const {
  return histograms_.count(attr) > 0;
}

const EquiDepthHistogram* SelectivityEstimator::histogram(
    const std::string& attr) const {
  auto it = histograms_.find(attr);
  return it == histograms_.end() ? nullptr : &it->second;
}

double SelectivityEstimator::estimate_interval(const std::string& attr,
                                               const Interval& iv) const {
  const auto* h = histogram(attr);
  if (h == nullptr) return relation_rows();
  return h->estimate_interval(iv);
}

double SelectivityEstimator::estimate(const ObjectCondition& pred) const {
  const auto* h = histogram(pred.attribute);
  if (h == nullptr) return relation_rows();

  if (const auto* s = std::get_if<ScalarPredicate>(&pred.pred)) {
    if (!s->value.has_numeric()) return relation_rows();
    if (s->op == CompareOp::Eq) return h->estimate_equal(s->value.numeric());
    if (s->op == CompareOp::Ne)
      return std::max(0.0, static_cast<double>(h->total_count()) -
                               h->estimate_equal(s->value.numeric()));
  }
  if (const auto* l = std::get_if<ListPredicate>(&pred.pred)) {
    double sum = 0;
    for (const auto& v : l->values) {
      if (!v.has_numeric()) return relation_rows();
      sum += h->estimate_equal(v.numeric());
    }
    sum = std::min(sum, static_cast<double>(h->total_count()));
    return l->negated ? static_cast<double>(h->total_count()) - sum : sum;
  }
  if (auto iv = pred.interval()) return h->estimate_interval(*iv);
  return relation_rows();
}

}  // namespace sieve
