#pragma once

#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "sieve/policy.hpp"

namespace sieve {

// All wire formats use insertion-ordered JSON so that export is byte-stable.
using Json = nlohmann::ordered_json;

/// Integers and decimals serialize as JSON numbers, text as a JSON string,
/// and the temporal tags as single-key wrapper objects: {"date":"2018-02-01"},
/// {"time":"09:30:00"}, {"ts":"2018-02-01 09:30:00"}.
Json value_to_json(const Value& v);
Value value_from_json(const Json& j);

Json condition_to_json(const ObjectCondition& oc);
ObjectCondition condition_from_json(const Json& j);

/// Corpus line: {id, relation, owner, object_conditions, querier, purpose,
/// action, inserted_at}.
Json policy_to_json(const Policy& p);
Policy policy_from_json(const Json& j);

Json tuple_to_json(const Tuple& t);
Tuple tuple_from_json(const Json& j, const std::string& relation);

std::string to_jsonl_line(const Json& j);

}  // namespace sieve
