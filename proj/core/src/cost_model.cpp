#include "sieve/cost_model.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "sieve/eval.hpp"

namespace sieve {

void CostConstants::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0) || !std::isfinite(v))
      throw ContractViolation(std::string("cost constant ") + name +
                              " must be strictly positive");
  };
  positive(c_e, "c_e");
  positive(c_r, "c_r");
  positive(alpha, "alpha");
  positive(udf_inv, "udf_inv");
  positive(udf_exec, "udf_exec");
  positive(seq_ratio, "seq_ratio");
}

CostConstants CostConstants::parse(const std::string& text) {
  CostConstants k;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      size_t b = s.find_first_not_of(" \t\r");
      size_t e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty()) continue;
    double v = std::stod(val);
    if (key == "c_e")
      k.c_e = v;
    else if (key == "c_r")
      k.c_r = v;
    else if (key == "alpha_default" || key == "alpha")
      k.alpha = v;
    else if (key == "udf_inv")
      k.udf_inv = v;
    else if (key == "udf_exec")
      k.udf_exec = v;
    else if (key == "seq_ratio")
      k.seq_ratio = v;
    else
      throw ParseError("unknown calibration key '" + key + "'");
  }
  k.validate();
  return k;
}

std::string CostConstants::format() const {
  std::ostringstream out;
  out << "c_e=" << c_e << "\n"
      << "c_r=" << c_r << "\n"
      << "alpha_default=" << alpha << "\n"
      << "udf_inv=" << udf_inv << "\n"
      << "udf_exec=" << udf_exec << "\n"
      << "seq_ratio=" << seq_ratio << "\n";
  return out.str();
}

CostConstants CostConstants::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SieveError("cannot open calibration file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void CostConstants::save_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw SieveError("cannot write calibration file " + path);
  out << format();
}

double cost_eval_partition(size_t partition_size, const CostConstants& k) {
  return k.alpha * static_cast<double>(partition_size) * k.c_e;
}

double cost_guarded_expression(const ObjectCondition& guard,
                               size_t partition_size,
                               const SelectivityEstimator& est,
                               const CostConstants& k) {
  return est.estimate(guard) *
         (k.c_r + cost_eval_partition(partition_size, k));
}

double merge_threshold(const CostConstants& k) {
  return k.c_e / (k.c_r + k.c_e);
}

namespace {

struct Bound {
  CompareOp op;
  Value value;
};

struct ConditionBounds {
  std::optional<Bound> lo;
  std::optional<Bound> hi;
};

ConditionBounds bounds_of(const ObjectCondition& oc) {
  if (const auto* s = std::get_if<ScalarPredicate>(&oc.pred)) {
    switch (s->op) {
      case CompareOp::Eq:
        return {Bound{CompareOp::Ge, s->value}, Bound{CompareOp::Le, s->value}};
      case CompareOp::Gt:
      case CompareOp::Ge:
        return {Bound{s->op, s->value}, std::nullopt};
      case CompareOp::Lt:
      case CompareOp::Le:
        return {std::nullopt, Bound{s->op, s->value}};
      default:
        break;
    }
  }
  if (const auto* r = std::get_if<RangePredicate>(&oc.pred))
    return {Bound{r->lo_op, r->lo}, Bound{r->hi_op, r->hi}};
  throw ContractViolation("condition '" + oc.identity() +
                          "' has no range form");
}

// min over lower bounds; an absent bound is -inf. Equal values prefer the
// inclusive operator.
std::optional<Bound> outer_lo(const std::optional<Bound>& a,
                              const std::optional<Bound>& b) {
  if (!a || !b) return std::nullopt;
  int c = a->value.compare(b->value);
  if (c < 0) return a;
  if (c > 0) return b;
  return a->op == CompareOp::Ge ? a : b;
}

std::optional<Bound> outer_hi(const std::optional<Bound>& a,
                              const std::optional<Bound>& b) {
  if (!a || !b) return std::nullopt;
  int c = a->value.compare(b->value);
  if (c > 0) return a;
  if (c < 0) return b;
  return a->op == CompareOp::Le ? a : b;
}

ObjectCondition make_merged(const std::string& attr,
                            const std::optional<Bound>& lo,
                            const std::optional<Bound>& hi) {
  if (lo && hi) {
    if (lo->value.compare(hi->value) == 0 && lo->op == CompareOp::Ge &&
        hi->op == CompareOp::Le)
      return ObjectCondition::eq(attr, lo->value);
    return ObjectCondition::range(attr, lo->op, lo->value, hi->op, hi->value);
  }
  if (lo) return ObjectCondition::scalar(attr, lo->op, lo->value);
  if (hi) return ObjectCondition::scalar(attr, hi->op, hi->value);
  throw ContractViolation("merged condition would be unbounded on both sides");
}

}  // namespace

std::optional<ObjectCondition> should_merge(const ObjectCondition& x,
                                            const ObjectCondition& y,
                                            const SelectivityEstimator& est,
                                            const CostConstants& k) {
  if (x.attribute != y.attribute)
    throw ContractViolation("should_merge across attributes '" + x.attribute +
                            "' and '" + y.attribute + "'");
  auto ix = x.interval();
  auto iy = y.interval();
  if (!ix || !iy)
    throw ContractViolation("should_merge requires range-form conditions");

  if (!ix->overlaps(*iy)) return std::nullopt;

  auto bx = bounds_of(x);
  auto by = bounds_of(y);
  auto lo = outer_lo(bx.lo, by.lo);
  auto hi = outer_hi(bx.hi, by.hi);

  Interval inter = ix->intersect(*iy);
  Interval uni = ix->hull(*iy);
  double ratio;
  if (ix->lo == iy->lo && ix->hi == iy->hi) {
    ratio = 1.0;  // identical ranges
  } else {
    double sel_union = est.estimate_interval(x.attribute, uni);
    if (sel_union <= 0) return std::nullopt;
    ratio = est.estimate_interval(x.attribute, inter) / sel_union;
  }
  if (ratio > merge_threshold(k)) return make_merged(x.attribute, lo, hi);
  return std::nullopt;
}

double guard_benefit(const ObjectCondition& guard, size_t partition_size,
                     const SelectivityEstimator& est, const CostConstants& k) {
  double saved_rows = est.relation_rows() - est.estimate(guard);
  if (saved_rows < 0) saved_rows = 0;
  return k.c_e * static_cast<double>(partition_size) * saved_rows;
}

double guard_utility(const ObjectCondition& guard, size_t partition_size,
                     const SelectivityEstimator& est, const CostConstants& k) {
  double benefit = guard_benefit(guard, partition_size, est, k);
  double read_cost = est.estimate(guard) * k.c_r;
  if (read_cost <= 0)
    return benefit > 0 ? std::numeric_limits<double>::infinity() : 0.0;
  return benefit / read_cost;
}

std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::LinearScan:
      return "linear_scan";
    case Strategy::IndexQuery:
      return "index_query";
    case Strategy::IndexGuards:
      return "index_guards";
  }
  return "?";
}

StrategyCosts strategy_costs(std::optional<double> query_pred_sel,
                             std::span<const double> guard_sels,
                             double relation_rows, const CostConstants& k) {
  StrategyCosts out;
  out.index_guards = 0;
  for (double sel : guard_sels) out.index_guards += sel * k.c_r;
  out.index_query = query_pred_sel
                        ? *query_pred_sel * k.c_r
                        : std::numeric_limits<double>::infinity();
  out.linear_scan = relation_rows * k.c_r / k.seq_ratio;

  out.best = Strategy::IndexGuards;
  double best_cost = out.index_guards;
  if (out.index_query <= best_cost) {
    out.best = Strategy::IndexQuery;
    best_cost = out.index_query;
  }
  if (out.linear_scan <= best_cost) out.best = Strategy::LinearScan;
  return out;
}

ExecMode choose_inline_or_delta(size_t partition_size, const CostConstants& k) {
  double n = static_cast<double>(partition_size);
  double delta_cost = k.udf_inv + k.udf_exec * n;
  double inline_cost = cost_eval_partition(partition_size, k);
  return delta_cost < inline_cost ? ExecMode::Delta : ExecMode::Inline;
}

std::optional<size_t> delta_crossover(const CostConstants& k,
                                      size_t max_partition) {
  for (size_t n = 1; n <= max_partition; ++n)
    if (choose_inline_or_delta(n, k) == ExecMode::Delta) return n;
  return std::nullopt;
}

double measure_avg_policies_checked(std::span<const Policy> partition,
                                    std::span<const Tuple> sample) {
  if (partition.empty() || sample.empty()) return 0.0;
  size_t checks = 0;
  for (const auto& t : sample) {
    size_t checked = 0;
    for (const auto& p : partition) {
      ++checked;
      if (eval_object_conditions(p.object_conditions, t)) break;
    }
    checks += checked;
  }
  return static_cast<double>(checks) / static_cast<double>(sample.size());
}

}  // namespace sieve
