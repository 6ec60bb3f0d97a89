#include "sieve/store.hpp"

#include <algorithm>
#include <ostream>

#include "sieve/json_io.hpp"

namespace sieve {

void GuardedPolicyExpression::check_invariants() const {
  std::set<PolicyId> seen;
  for (const auto& term : guards) {
    for (PolicyId id : term.partition) {
      if (!seen.insert(id).second)
        throw ContractViolation("policy " + std::to_string(id) +
                                " appears in two partitions of GE " +
                                key.to_string());
    }
  }
  if (seen != built_over)
    throw ContractViolation("partition union differs from built_over for GE " +
                            key.to_string());
}

void PolicyStore::reset() {
  std::unique_lock lock(mu_);
  policies_.clear();
  by_querier_.clear();
  ges_.clear();
  deletion_epochs_.clear();
  ts_counter_ = 0;
  max_id_ = 0;
  next_ge_id_ = 0;
  next_guard_id_ = 0;
  journal_.reset();
}

void PolicyStore::set_groups(GroupDirectory groups) {
  std::unique_lock lock(mu_);
  groups_ = std::move(groups);
}

bool PolicyStore::key_matches_policy_locked(const GeKey& key,
                                            const Policy& p) const {
  if (key.purpose != p.purpose || key.relation != p.relation) return false;
  return key.querier == p.querier || groups_.in_group(key.querier, p.querier);
}

void PolicyStore::journal_line_locked(const std::string& line) {
  if (journal_) *journal_ << line << '\n' << std::flush;
}

PolicyId PolicyStore::insert_policy(Policy p) {
  p.validate();
  std::unique_lock lock(mu_);
  if (p.id == 0) p.id = max_id_ + 1;
  if (policies_.count(p.id))
    throw ConflictError("policy id " + std::to_string(p.id) +
                        " already exists");
  p.inserted_at = ++ts_counter_;
  max_id_ = std::max(max_id_, p.id);
  for (auto& [key, stored] : ges_)
    if (key_matches_policy_locked(key, p)) stored.outdated = true;
  PolicyId id = p.id;
  journal_line_locked(to_jsonl_line(policy_to_json(p)));
  by_querier_[p.querier].insert(id);
  policies_.emplace(id, std::move(p));
  return id;
}

void PolicyStore::delete_policy(PolicyId id) {
  std::unique_lock lock(mu_);
  auto it = policies_.find(id);
  if (it == policies_.end())
    throw NotFoundError("policy id " + std::to_string(id) + " not found");
  const Policy& p = it->second;
  for (auto& [key, stored] : ges_)
    if (key_matches_policy_locked(key, p)) stored.outdated = true;
  for (auto& [key, epoch] : deletion_epochs_)
    if (key_matches_policy_locked(key, p)) ++epoch;
  ++ts_counter_;
  journal_line_locked(to_jsonl_line(Json{{"delete_policy", id}}));
  by_querier_[p.querier].erase(id);
  policies_.erase(it);
}

bool PolicyStore::has_policy(PolicyId id) const {
  std::shared_lock lock(mu_);
  return policies_.count(id) > 0;
}

std::optional<Policy> PolicyStore::get_policy(PolicyId id) const {
  std::shared_lock lock(mu_);
  auto it = policies_.find(id);
  if (it == policies_.end()) return std::nullopt;
  return it->second;
}

size_t PolicyStore::policy_count() const {
  std::shared_lock lock(mu_);
  return policies_.size();
}

std::vector<Policy> PolicyStore::all_policies() const {
  std::shared_lock lock(mu_);
  std::vector<Policy> out;
  out.reserve(policies_.size());
  for (const auto& [id, p] : policies_) out.push_back(p);
  return out;
}

std::vector<Policy> PolicyStore::fetch_policies(const GeKey& key,
                                                LogicalTs since) const {
  std::shared_lock lock(mu_);
  std::vector<Policy> out;
  auto scan_bucket = [&](const std::string& querier) {
    auto bucket = by_querier_.find(querier);
    if (bucket == by_querier_.end()) return;
    for (PolicyId id : bucket->second) {
      const Policy& p = policies_.at(id);
      if (p.inserted_at <= since) continue;
      if (p.purpose == key.purpose && p.relation == key.relation)
        out.push_back(p);
    }
  };
  scan_bucket(key.querier);
  for (const auto& group : groups_.groups(key.querier)) scan_bucket(group);
  std::sort(out.begin(), out.end(), [](const Policy& a, const Policy& b) {
    return a.inserted_at < b.inserted_at;
  });
  return out;
}

std::vector<Policy> PolicyStore::fetch_policies(const std::string& querier,
                                                const std::string& purpose,
                                                const std::string& relation,
                                                LogicalTs since) const {
  return fetch_policies(GeKey{querier, purpose, relation}, since);
}

int64_t PolicyStore::store_ge(GuardedPolicyExpression ge) {
  ge.check_invariants();
  std::unique_lock lock(mu_);
  StoredGuardedPolicyExpression stored;
  stored.id = ++next_ge_id_;
  stored.outdated = false;
  stored.inserted_at = ++ts_counter_;
  GeKey key = ge.key;
  stored.ge = std::move(ge);
  ges_[key] = std::move(stored);
  return ges_[key].id;
}

std::optional<StoredGuardedPolicyExpression> PolicyStore::fetch_ge(
    const GeKey& key) const {
  std::shared_lock lock(mu_);
  auto it = ges_.find(key);
  if (it == ges_.end()) return std::nullopt;
  return it->second;
}

LogicalTs PolicyStore::now() const {
  std::shared_lock lock(mu_);
  return ts_counter_;
}

int64_t PolicyStore::deletion_epoch(const GeKey& key) const {
  std::shared_lock lock(mu_);
  auto it = deletion_epochs_.find(key);
  if (it != deletion_epochs_.end()) return it->second;
  lock.unlock();
  std::unique_lock wlock(mu_);
  return deletion_epochs_[key];  // register at 0
}

int64_t PolicyStore::next_guard_id() {
  std::unique_lock lock(mu_);
  return ++next_guard_id_;
}

void PolicyStore::attach_journal(const std::string& path) {
  std::unique_lock lock(mu_);
  journal_ = std::make_unique<std::ofstream>(path, std::ios::app);
  if (!*journal_) throw SieveError("cannot open journal file " + path);
}

namespace {

Json ge_record_to_json(const StoredGuardedPolicyExpression& s) {
  Json j;
  j["ge_id"] = s.id;
  j["querier"] = s.ge.key.querier;
  j["purpose"] = s.ge.key.purpose;
  j["relation"] = s.ge.key.relation;
  j["outdated"] = s.outdated;
  j["inserted_at"] = s.inserted_at;
  j["built_at"] = s.ge.built_at;
  Json guards = Json::array();
  for (const auto& term : s.ge.guards) {
    Json g;
    g["guard"] = condition_to_json(term.guard);
    g["partition"] = term.partition;
    g["exec_mode"] = term.exec_mode == ExecMode::Delta ? "delta" : "inline";
    g["guard_id"] = term.guard_id;
    guards.push_back(std::move(g));
  }
  j["guards"] = std::move(guards);
  return j;
}

StoredGuardedPolicyExpression ge_record_from_json(const Json& j) {
  StoredGuardedPolicyExpression s;
  s.id = j.at("ge_id").get<int64_t>();
  s.ge.key = GeKey{j.at("querier").get<std::string>(),
                   j.at("purpose").get<std::string>(),
                   j.at("relation").get<std::string>()};
  s.outdated = j.at("outdated").get<bool>();
  s.inserted_at = j.at("inserted_at").get<LogicalTs>();
  s.ge.built_at = j.at("built_at").get<LogicalTs>();
  for (const auto& g : j.at("guards")) {
    GuardedExpressionTerm term;
    term.guard = condition_from_json(g.at("guard"));
    term.partition = g.at("partition").get<std::vector<PolicyId>>();
    term.exec_mode = g.at("exec_mode").get<std::string>() == "delta"
                         ? ExecMode::Delta
                         : ExecMode::Inline;
    term.guard_id = g.at("guard_id").get<int64_t>();
    for (PolicyId id : term.partition) s.ge.built_over.insert(id);
    s.ge.guards.push_back(std::move(term));
  }
  return s;
}

}  // namespace

void PolicyStore::export_state(std::ostream& out) const {
  std::shared_lock lock(mu_);
  for (const auto& [id, p] : policies_)
    out << to_jsonl_line(policy_to_json(p)) << '\n';
  for (const auto& [key, stored] : ges_)
    out << to_jsonl_line(ge_record_to_json(stored)) << '\n';
}

void PolicyStore::import_state(std::istream& in) {
  std::unique_lock lock(mu_);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json j = Json::parse(line);
    if (j.contains("ge_id")) {
      auto stored = ge_record_from_json(j);
      ts_counter_ = std::max(ts_counter_, stored.inserted_at);
      next_ge_id_ = std::max(next_ge_id_, stored.id);
      for (const auto& t : stored.ge.guards)
        next_guard_id_ = std::max(next_guard_id_, t.guard_id);
      ges_[stored.ge.key] = std::move(stored);
    } else if (j.contains("delete_policy")) {
      PolicyId id = j.at("delete_policy").get<PolicyId>();
      auto it = policies_.find(id);
      if (it != policies_.end()) {
        by_querier_[it->second.querier].erase(id);
        policies_.erase(it);
      }
    } else {
      Policy p = policy_from_json(j);
      if (policies_.count(p.id))
        throw ConflictError("duplicate policy id " + std::to_string(p.id) +
                            " in import");
      ts_counter_ = std::max(ts_counter_, p.inserted_at);
      max_id_ = std::max(max_id_, p.id);
      by_querier_[p.querier].insert(p.id);
      policies_.emplace(p.id, std::move(p));
    }
  }
}

}  // namespace sieve
