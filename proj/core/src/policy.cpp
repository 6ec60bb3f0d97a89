#include "sieve/policy.hpp"

#include <algorithm>

namespace sieve {

std::string_view op_sql(CompareOp op) {
  switch (op) {
    case CompareOp::Eq:
      return "=";
    case CompareOp::Ne:
      return "!=";
    case CompareOp::Lt:
      return "<";
    case CompareOp::Gt:
      return ">";
    case CompareOp::Ge:
      return ">=";
    case CompareOp::Le:
      return "<=";
    case CompareOp::In:
      return "IN";
    case CompareOp::NotIn:
      return "NOT IN";
  }
  return "?";
}

CompareOp op_from_sql(std::string_view text) {
  if (text == "=") return CompareOp::Eq;
  if (text == "!=" || text == "<>") return CompareOp::Ne;
  if (text == "<") return CompareOp::Lt;
  if (text == ">") return CompareOp::Gt;
  if (text == ">=") return CompareOp::Ge;
  if (text == "<=") return CompareOp::Le;
  if (text == "IN") return CompareOp::In;
  if (text == "NOT IN") return CompareOp::NotIn;
  throw ParseError("unknown comparison operator '" + std::string(text) + "'");
}

ObjectCondition ObjectCondition::eq(std::string attr, Value v) {
  return {std::move(attr), ScalarPredicate{CompareOp::Eq, std::move(v)}};
}

ObjectCondition ObjectCondition::scalar(std::string attr, CompareOp op,
                                        Value v) {
  if (op == CompareOp::In || op == CompareOp::NotIn)
    throw ContractViolation("list operator needs an explicit value list");
  return {std::move(attr), ScalarPredicate{op, std::move(v)}};
}

ObjectCondition ObjectCondition::range(std::string attr, CompareOp lo_op,
                                       Value lo, CompareOp hi_op, Value hi) {
  if (lo_op != CompareOp::Gt && lo_op != CompareOp::Ge)
    throw ContractViolation("range lower operator must be > or >=");
  if (hi_op != CompareOp::Lt && hi_op != CompareOp::Le)
    throw ContractViolation("range upper operator must be < or <=");
  if (lo.compare(hi) > 0)
    throw ContractViolation("range requires lo <= hi");
  return {std::move(attr),
          RangePredicate{lo_op, std::move(lo), hi_op, std::move(hi)}};
}

ObjectCondition ObjectCondition::in_list(std::string attr,
                                         std::vector<Value> vs, bool negated) {
  return {std::move(attr), ListPredicate{negated, std::move(vs)}};
}

ObjectCondition ObjectCondition::derived(std::string attr, std::string sql) {
  return {std::move(attr), DerivedPredicate{std::move(sql)}};
}

bool ObjectCondition::is_equality() const {
  const auto* s = std::get_if<ScalarPredicate>(&pred);
  return s && s->op == CompareOp::Eq;
}

namespace {

// Discrete tags take a half-step correction so that e.g. integer ranges
// [3,10] and [11,20] partition [3,20] without gap or overlap.
double half_step(ValueTag tag) {
  return tag == ValueTag::Decimal ? 0.0 : 0.5;
}

}  // namespace

std::optional<Interval> ObjectCondition::interval() const {
  if (const auto* s = std::get_if<ScalarPredicate>(&pred)) {
    if (!s->value.has_numeric()) return std::nullopt;
    double v = s->value.numeric();
    double h = half_step(s->value.tag());
    switch (s->op) {
      case CompareOp::Eq:
        return Interval{v - h, v + h};
      case CompareOp::Lt:
        return Interval{-1e308, v - (h > 0 ? h : 1e-9)};
      case CompareOp::Le:
        return Interval{-1e308, v + h};
      case CompareOp::Gt:
        return Interval{v + (h > 0 ? h : 1e-9), 1e308};
      case CompareOp::Ge:
        return Interval{v - h, 1e308};
      default:
        return std::nullopt;
    }
  }
  if (const auto* r = std::get_if<RangePredicate>(&pred)) {
    if (!r->lo.has_numeric() || !r->hi.has_numeric()) return std::nullopt;
    double h = half_step(r->lo.tag());
    double lo = r->lo.numeric() +
                (r->lo_op == CompareOp::Gt ? (h > 0 ? h : 1e-9) : -h);
    double hi = r->hi.numeric() -
                (r->hi_op == CompareOp::Lt ? (h > 0 ? h : 1e-9) : -h);
    return Interval{lo, hi};
  }
  return std::nullopt;
}

std::optional<ValueTag> ObjectCondition::value_tag() const {
  if (const auto* s = std::get_if<ScalarPredicate>(&pred))
    return s->value.tag();
  if (const auto* r = std::get_if<RangePredicate>(&pred)) return r->lo.tag();
  if (const auto* l = std::get_if<ListPredicate>(&pred))
    return l->values.empty() ? std::nullopt
                             : std::optional(l->values.front().tag());
  return std::nullopt;
}

std::string ObjectCondition::to_sql(std::string_view qualifier) const {
  std::string col = qualifier.empty()
                        ? attribute
                        : std::string(qualifier) + "." + attribute;
  if (const auto* s = std::get_if<ScalarPredicate>(&pred))
    return col + " " + std::string(op_sql(s->op)) + " " + s->value.to_sql();
  if (const auto* r = std::get_if<RangePredicate>(&pred))
    return col + " " + std::string(op_sql(r->lo_op)) + " " + r->lo.to_sql() +
           " AND " + col + " " + std::string(op_sql(r->hi_op)) + " " +
           r->hi.to_sql();
  if (const auto* l = std::get_if<ListPredicate>(&pred)) {
    std::string out = col + (l->negated ? " NOT IN (" : " IN (");
    for (size_t i = 0; i < l->values.size(); ++i) {
      if (i) out += ", ";
      out += l->values[i].to_sql();
    }
    return out + ")";
  }
  return std::get<DerivedPredicate>(pred).sql;
}

std::string ObjectCondition::identity() const {
  return to_sql();
}

bool eval_predicate(const Predicate& pred, const Value& tuple_value) {
  if (const auto* s = std::get_if<ScalarPredicate>(&pred)) {
    int c = tuple_value.compare(s->value);
    switch (s->op) {
      case CompareOp::Eq:
        return c == 0;
      case CompareOp::Ne:
        return c != 0;
      case CompareOp::Lt:
        return c < 0;
      case CompareOp::Gt:
        return c > 0;
      case CompareOp::Ge:
        return c >= 0;
      case CompareOp::Le:
        return c <= 0;
      default:
        throw ContractViolation("scalar predicate with list operator");
    }
  }
  if (const auto* r = std::get_if<RangePredicate>(&pred)) {
    int lo = tuple_value.compare(r->lo);
    if (r->lo_op == CompareOp::Gt ? lo <= 0 : lo < 0) return false;
    int hi = tuple_value.compare(r->hi);
    return r->hi_op == CompareOp::Lt ? hi < 0 : hi <= 0;
  }
  if (const auto* l = std::get_if<ListPredicate>(&pred)) {
    bool found = std::any_of(
        l->values.begin(), l->values.end(),
        [&](const Value& v) { return tuple_value.equals(v); });
    return l->negated ? !found : found;
  }
  throw UnsupportedConditionError(
      "derived-value conditions cannot be evaluated");
}

bool condition_implies(const ObjectCondition& inner,
                       const ObjectCondition& outer) {
  if (inner.attribute != outer.attribute) return false;
  auto out_iv = outer.interval();
  if (!out_iv) return inner.identity() == outer.identity();
  if (auto in_iv = inner.interval()) return out_iv->contains(*in_iv);
  if (const auto* l = std::get_if<ListPredicate>(&inner.pred)) {
    if (l->negated || l->values.empty()) return false;
    return std::all_of(l->values.begin(), l->values.end(), [&](const Value& v) {
      if (!v.has_numeric()) return false;
      double x = v.numeric();
      return out_iv->lo <= x && x <= out_iv->hi;
    });
  }
  return false;
}

const ObjectCondition& Policy::owner_condition() const {
  for (const auto& oc : object_conditions)
    if (oc.attribute == "owner" && oc.is_equality()) return oc;
  throw ContractViolation("policy " + std::to_string(id) +
                          " has no owner equality condition");
}

void Policy::validate() const {
  int owner_conds = 0;
  for (const auto& oc : object_conditions)
    if (oc.attribute == "owner" && oc.is_equality()) ++owner_conds;
  if (owner_conds != 1)
    throw ContractViolation("policy " + std::to_string(id) +
                            " must have exactly one owner = <id> condition");
  if (querier.empty() || purpose.empty())
    throw ContractViolation("policy " + std::to_string(id) +
                            " needs querier and purpose conditions");
}

const Value* Tuple::find(std::string_view attr) const {
  auto it = attrs.find(std::string(attr));
  return it == attrs.end() ? nullptr : &it->second;
}

void GroupDirectory::add_member(const std::string& member,
                                const std::string& group) {
  direct_[member].insert(group);
  built_ = false;
}

void GroupDirectory::add_subgroup(const std::string& child,
                                  const std::string& parent) {
  parents_[child].insert(parent);
  built_ = false;
}

void GroupDirectory::build() {
  closure_.clear();
  // Close the group hierarchy first, then expand each user's direct sets.
  std::map<std::string, std::set<std::string>> group_closure;
  for (const auto& [child, ps] : parents_) {
    std::set<std::string> seen;
    std::vector<std::string> stack(ps.begin(), ps.end());
    while (!stack.empty()) {
      std::string g = std::move(stack.back());
      stack.pop_back();
      if (!seen.insert(g).second) continue;
      auto it = parents_.find(g);
      if (it != parents_.end())
        stack.insert(stack.end(), it->second.begin(), it->second.end());
    }
    group_closure[child] = std::move(seen);
  }
  for (const auto& [user, gs] : direct_) {
    std::set<std::string> all(gs);
    for (const auto& g : gs) {
      auto it = group_closure.find(g);
      if (it != group_closure.end())
        all.insert(it->second.begin(), it->second.end());
    }
    closure_[user] = std::move(all);
  }
  built_ = true;
}

const std::set<std::string>& GroupDirectory::groups(
    const std::string& user) const {
  if (!built_)
    throw ContractViolation("GroupDirectory::build() not called after edits");
  static const std::set<std::string> kEmpty;
  auto it = closure_.find(user);
  return it == closure_.end() ? kEmpty : it->second;
}

bool GroupDirectory::in_group(const std::string& user,
                              const std::string& group) const {
  return groups(user).count(group) > 0;
}

}  // namespace sieve
