#include "sieve/json_io.hpp"

namespace sieve {

Json value_to_json(const Value& v) {
  switch (v.tag()) {
    case ValueTag::Integer:
      return v.as_integer();
    case ValueTag::Decimal:
      return v.as_decimal();
    case ValueTag::Text:
      return v.as_text();
    case ValueTag::Date:
      return Json{{"date", v.to_string()}};
    case ValueTag::Time:
      return Json{{"time", v.to_string()}};
    case ValueTag::Timestamp:
      return Json{{"ts", v.to_string()}};
  }
  return nullptr;
}

Value value_from_json(const Json& j) {
  if (j.is_number_integer()) return Value::integer(j.get<int64_t>());
  if (j.is_number_float()) return Value::decimal(j.get<double>());
  if (j.is_string()) return Value::text(j.get<std::string>());
  if (j.is_object()) {
    if (j.contains("date")) return Value::parse_date(j["date"].get<std::string>());
    if (j.contains("time")) return Value::parse_time(j["time"].get<std::string>());
    if (j.contains("ts")) return Value::parse_timestamp(j["ts"].get<std::string>());
  }
  throw ParseError("cannot decode value from " + j.dump());
}

Json condition_to_json(const ObjectCondition& oc) {
  Json j;
  j["attr"] = oc.attribute;
  if (const auto* s = std::get_if<ScalarPredicate>(&oc.pred)) {
    j["op"] = std::string(op_sql(s->op));
    j["val"] = value_to_json(s->value);
  } else if (const auto* r = std::get_if<RangePredicate>(&oc.pred)) {
    j["lo_op"] = std::string(op_sql(r->lo_op));
    j["lo"] = value_to_json(r->lo);
    j["hi_op"] = std::string(op_sql(r->hi_op));
    j["hi"] = value_to_json(r->hi);
  } else if (const auto* l = std::get_if<ListPredicate>(&oc.pred)) {
    j["op"] = l->negated ? "NOT IN" : "IN";
    Json vals = Json::array();
    for (const auto& v : l->values) vals.push_back(value_to_json(v));
    j["val"] = std::move(vals);
  } else {
    j["op"] = "derived";
    j["sql"] = std::get<DerivedPredicate>(oc.pred).sql;
  }
  return j;
}

ObjectCondition condition_from_json(const Json& j) {
  std::string attr = j.at("attr").get<std::string>();
  if (j.contains("lo")) {
    return ObjectCondition::range(
        attr, op_from_sql(j.at("lo_op").get<std::string>()),
        value_from_json(j.at("lo")),
        op_from_sql(j.at("hi_op").get<std::string>()),
        value_from_json(j.at("hi")));
  }
  std::string op = j.at("op").get<std::string>();
  if (op == "derived")
    return ObjectCondition::derived(attr, j.at("sql").get<std::string>());
  if (op == "IN" || op == "NOT IN") {
    std::vector<Value> vals;
    for (const auto& v : j.at("val")) vals.push_back(value_from_json(v));
    return ObjectCondition::in_list(attr, std::move(vals), op == "NOT IN");
  }
  return ObjectCondition::scalar(attr, op_from_sql(op),
                                 value_from_json(j.at("val")));
}

Json policy_to_json(const Policy& p) {
  Json j;
  j["id"] = p.id;
  j["relation"] = p.relation;
  j["owner"] = p.owner;
  Json conds = Json::array();
  for (const auto& oc : p.object_conditions)
    conds.push_back(condition_to_json(oc));
  j["object_conditions"] = std::move(conds);
  j["querier"] = p.querier;
  j["purpose"] = p.purpose;
  j["action"] = "allow";
  j["inserted_at"] = p.inserted_at;
  return j;
}

Policy policy_from_json(const Json& j) {
  Policy p;
  p.id = j.at("id").get<PolicyId>();
  p.relation = j.at("relation").get<std::string>();
  p.owner = j.at("owner").get<std::string>();
  for (const auto& c : j.at("object_conditions"))
    p.object_conditions.push_back(condition_from_json(c));
  p.querier = j.at("querier").get<std::string>();
  p.purpose = j.at("purpose").get<std::string>();
  if (j.contains("action") && j.at("action").get<std::string>() != "allow")
    throw ParseError("policy " + std::to_string(p.id) +
                     ": only allow policies are supported");
  p.inserted_at = j.value("inserted_at", LogicalTs{0});
  return p;
}

Json tuple_to_json(const Tuple& t) {
  Json j;
  for (const auto& [attr, v] : t.attrs) j[attr] = value_to_json(v);
  return j;
}

Tuple tuple_from_json(const Json& j, const std::string& relation) {
  Tuple t;
  t.relation = relation;
  for (auto it = j.begin(); it != j.end(); ++it)
    t.attrs.emplace(it.key(), value_from_json(it.value()));
  return t;
}

std::string to_jsonl_line(const Json& j) {
  return j.dump();
}

}  // namespace sieve
