#include "sieve/bench.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

#include "sieve/eval.hpp"

namespace sieve {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start)
      .count();
}

}  // namespace

Json RunReport::to_json() const {
  Json j;
  j["seed"] = seed;
  j["config"] = config_echo;
  j["timings_ms"] = Json{{"ge_build", ge_build_ms},
                         {"rewrite", rewrite_ms},
                         {"execute", execute_ms}};
  j["cost_units"] = Json{{"ge_build", ge_build_cost_units},
                         {"execute", execute_cost_units}};
  j["cache"] = cache.to_json();
  j["counters"] = Json{{"rows_read_random", counters.rows_read_random},
                       {"rows_read_sequential", counters.rows_read_sequential},
                       {"predicate_evals", counters.predicate_evals},
                       {"policy_evals", counters.policy_evals},
                       {"delta_invocations", counters.delta_invocations},
                       {"delta_policies_scanned",
                        counters.delta_policies_scanned}};
  j["queries_executed"] = queries_executed;
  j["policies_inserted"] = policies_inserted;
  j["policies_deleted"] = policies_deleted;
  j["verified_queries"] = verified_queries;
  Json epochs = Json::array();
  for (const auto& e : per_epoch)
    epochs.push_back(Json{{"cycle", e.cycle},
                          {"hits", e.hits},
                          {"soft_hits", e.soft_hits},
                          {"misses", e.misses},
                          {"regenerations", e.regenerations},
                          {"updates", e.updates}});
  j["per_epoch"] = std::move(epochs);
  Json rows = Json::array();
  for (const auto& b : baselines)
    rows.push_back(Json{{"name", b.name},
                        {"policy_evals", b.policy_evals},
                        {"rows_read", b.rows_read},
                        {"wall_ms", b.wall_ms},
                        {"cost_units", b.cost_units},
                        {"result_rows", b.result_rows}});
  j["baselines"] = std::move(rows);
  return j;
}

std::string RunReport::to_text() const {
  std::ostringstream out;
  out << "queries executed    " << queries_executed << "\n"
      << "policies inserted   " << policies_inserted << "\n"
      << "policies deleted    " << policies_deleted << "\n"
      << "verified queries    " << verified_queries << "\n"
      << "cache hits          " << cache.hits << "\n"
      << "cache soft hits     " << cache.soft_hits << "\n"
      << "cache misses        " << cache.misses << "\n"
      << "regenerations       " << cache.regenerations << "\n"
      << "updates             " << cache.updates << "\n"
      << "evictions           " << cache.evictions << "\n"
      << "policy evals        " << counters.policy_evals << "\n"
      << "ge build ms         " << ge_build_ms << "\n"
      << "rewrite ms          " << rewrite_ms << "\n"
      << "execute ms          " << execute_ms << "\n"
      << "ge build cost units " << ge_build_cost_units << "\n"
      << "execute cost units  " << execute_cost_units << "\n";
  if (!baselines.empty()) {
    out << "\nbaseline             policy_evals   rows_read   wall_ms   rows\n";
    for (const auto& b : baselines) {
      out << b.name;
      for (size_t i = b.name.size(); i < 21; ++i) out << ' ';
      out << b.policy_evals << "  " << b.rows_read << "  " << b.wall_ms << "  "
          << b.result_rows << "\n";
    }
  }
  return out.str();
}

std::string RunReport::to_csv() const {
  std::ostringstream out;
  out << "cycle,hits,soft_hits,misses,regenerations,updates\n";
  for (const auto& e : per_epoch)
    out << e.cycle << ',' << e.hits << ',' << e.soft_hits << ',' << e.misses
        << ',' << e.regenerations << ',' << e.updates << "\n";
  return out.str();
}

BenchHarness::BenchHarness(const ScenarioSpec& spec, const WorkloadConfig& cfg,
                           const BenchOptions& opts)
    : opts_(opts), relation_(spec.relation) {
  WorkloadGenerator gen(spec, cfg);
  db_.load_relation(spec.relation, gen.generate_data(opts.data_rows),
                    {"wifiAP", "time", "date"});
}

BenchHarness::BenchHarness(Database db, const BenchOptions& opts)
    : db_(std::move(db)), opts_(opts) {
  auto names = db_.relation_names();
  for (const auto& name : names)
    if (db_.relation(name).governed()) relation_ = name;
}

GuardedPolicyExpression BenchHarness::provide_ge(const GeKey& key) {
  GeBuilder builder = [this](const GeKey& k, const std::vector<Policy>& ps,
                             LogicalTs built_at) {
    report_.ge_build_cost_units +=
        opts_.constants.c_e * static_cast<double>(ps.size());
    return build_guarded_expression(k, ps, built_at, db_, opts_.constants,
                                    &store_);
  };
  auto start = Clock::now();
  GuardedPolicyExpression ge;
  if (cache_) {
    ge = cache_->lookup_or_build(QueryMetadata{key.querier, key.purpose},
                                 key.relation, store_, builder);
  } else {
    auto all = store_.fetch_policies(key, 0);
    ge = builder(key, all, store_.now());
    store_.store_ge(ge);
  }
  report_.ge_build_ms += ms_since(start);
  return ge;
}

void BenchHarness::verify_one(const ParsedQuery& q, const QueryMetadata& qm,
                              const QueryResult& actual, int64_t seq,
                              const std::string& sql) {
  // Oracle pipeline: filter governed base relations tuple by tuple, then run
  // the original query on the projection. Metadata filtering first is sound
  // (it never changes the allowed set) and keeps the scan affordable.
  std::map<std::string, std::set<size_t>> allowed;
  auto policies = store_.all_policies();
  auto relevant = filter_policies_by_metadata(policies, qm, store_.groups());
  for (const auto& f : q.from) {
    const Relation& rel = db_.relation(f.relation);
    if (!rel.governed()) continue;
    std::set<size_t> ids;
    for (size_t id = 0; id < rel.row_count(); ++id)
      if (oracle_allows(rel.row(id), relevant, qm, store_.groups()))
        ids.insert(id);
    allowed[f.relation] = std::move(ids);
  }
  ExecCounters scratch;
  QueryResult expected = execute_query(db_, q, allowed, scratch);
  if (expected.fingerprint() != actual.fingerprint()) {
    std::ostringstream msg;
    msg << "oracle mismatch at event seq " << seq << "\n  querier=" << qm.querier
        << " purpose=" << qm.purpose << "\n  sql: " << sql
        << "\n  oracle rows=" << expected.rows.size()
        << " rewritten rows=" << actual.rows.size();
    throw VerificationError(msg.str());
  }
  ++report_.verified_queries;
}

RunReport BenchHarness::run(const GeneratedWorkload& wl) {
  return run_events(wl.events, wl.queriers.size());
}

RunReport BenchHarness::run_events(const std::vector<WorkloadEvent>& events,
                                   size_t distinct_queriers) {
  report_ = RunReport{};
  store_.reset();
  size_t capacity = static_cast<size_t>(
      std::max(1.0, std::round(static_cast<double>(distinct_queriers) *
                               opts_.cache_size_pct / 100.0)));
  cache_ = opts_.cache_enabled
               ? std::make_unique<GeCache>(capacity, opts_.strategy,
                                           opts_.constants)
               : nullptr;
  if (cache_) cache_->set_coalesce_on_update(opts_.coalesce_on_update);

  bool verify = opts_.verify.value_or(db_.relation(relation_).row_count() <
                                      10000);
  report_.config_echo =
      Json{{"cache_size_pct", opts_.cache_size_pct},
           {"cache_enabled", opts_.cache_enabled},
           {"refresh_strategy",
            std::string(refresh_strategy_name(opts_.strategy))},
           {"verify", verify},
           {"data_rows", db_.relation(relation_).row_count()},
           {"cache_capacity", capacity}};

  int current_cycle = -1;
  CacheMetrics cycle_base;
  auto roll_epoch = [&](int cycle) {
    if (cycle == current_cycle) return;
    if (cache_ && current_cycle >= 0) {
      const auto& m = cache_->metrics();
      report_.per_epoch.push_back(EpochStat{
          current_cycle, m.hits - cycle_base.hits,
          m.soft_hits - cycle_base.soft_hits, m.misses - cycle_base.misses,
          m.regenerations - cycle_base.regenerations,
          m.updates - cycle_base.updates});
      cycle_base = m;
    }
    current_cycle = cycle;
  };

  for (const auto& ev : events) {
    roll_epoch(ev.cycle);
    switch (ev.kind) {
      case WorkloadEvent::Kind::InsertPolicy:
        store_.insert_policy(ev.policy);
        ++report_.policies_inserted;
        break;
      case WorkloadEvent::Kind::DeletePolicy:
        store_.delete_policy(ev.delete_id);
        ++report_.policies_deleted;
        break;
      case WorkloadEvent::Kind::Query: {
        ParsedQuery q = parse_query(ev.sql);

        std::map<std::string, GuardedPolicyExpression> ges;
        std::set<std::string> seen;
        for (const auto& f : q.from) {
          if (!seen.insert(f.relation).second) continue;
          if (!db_.relation(f.relation).governed()) continue;
          ges[f.relation] =
              provide_ge(GeKey{ev.qm.querier, ev.qm.purpose, f.relation});
        }

        auto rw_start = Clock::now();
        RewrittenQuery rq = rewrite_query(
            db_, q, ev.qm, ges, opts_.caps, opts_.constants,
            [this](PolicyId id) { return store_.get_policy(id); });
        report_.rewrite_ms += ms_since(rw_start);

        auto ex_start = Clock::now();
        ExecCounters counters;
        QueryResult rows = execute_rewritten(db_, rq, counters);
        report_.execute_ms += ms_since(ex_start);
        report_.counters += counters;
        report_.execute_cost_units += counters.cost_units(opts_.constants);
        ++report_.queries_executed;

        if (verify) verify_one(q, ev.qm, rows, ev.seq, ev.sql);
        break;
      }
    }
  }
  roll_epoch(current_cycle + 1);
  if (cache_) report_.cache = cache_->metrics();
  return report_;
}

std::vector<BaselineRow> BenchHarness::run_baselines(
    const QueryInstance& query) {
  ParsedQuery q = parse_query(query.sql);
  const Relation& rel = db_.relation(relation_);
  auto relevant =
      store_.fetch_policies(GeKey{query.qm.querier, query.qm.purpose,
                                  relation_},
                            0);

  std::vector<BaselineRow> rows;
  auto finish = [&](const std::string& name, ExecCounters& counters,
                    Clock::time_point start,
                    const std::set<size_t>& allowed) {
    std::map<std::string, std::set<size_t>> allowed_map{{relation_, allowed}};
    QueryResult result = execute_query(db_, q, allowed_map, counters);
    BaselineRow row;
    row.name = name;
    row.policy_evals = counters.policy_evals;
    row.rows_read = counters.rows_read_random + counters.rows_read_sequential;
    row.wall_ms = ms_since(start);
    row.cost_units = counters.cost_units(opts_.constants);
    row.result_rows = result.rows.size();
    rows.push_back(row);
    return result;
  };

  {  // Baseline_P: policy DNF appended, evaluated on a full scan.
    ExecCounters counters;
    auto start = Clock::now();
    std::set<size_t> allowed;
    counters.rows_read_sequential += static_cast<int64_t>(rel.row_count());
    for (size_t id = 0; id < rel.row_count(); ++id) {
      for (const auto& p : relevant) {
        ++counters.policy_evals;
        if (eval_object_conditions(p.object_conditions, rel.row(id))) {
          allowed.insert(id);
          break;
        }
      }
    }
    finish("baseline_p", counters, start, allowed);
  }
  {  // Baseline_I: one forced index scan per policy, UNION of the results.
    ExecCounters counters;
    auto start = Clock::now();
    std::set<size_t> allowed;
    for (const auto& p : relevant) {
      auto ids = rel.index_scan(p.owner_condition());
      counters.rows_read_random += static_cast<int64_t>(ids.size());
      for (size_t id : ids) {
        ++counters.policy_evals;
        if (eval_object_conditions(p.object_conditions, rel.row(id)))
          allowed.insert(id);
      }
    }
    finish("baseline_i", counters, start, allowed);
  }
  {  // Baseline_U: per-tuple filter operator over the whole relevant set.
    ExecCounters counters;
    auto start = Clock::now();
    std::map<Value, std::vector<const Policy*>, ValueLess> by_owner;
    for (const auto& p : relevant)
      by_owner[std::get<ScalarPredicate>(p.owner_condition().pred).value]
          .push_back(&p);
    std::set<size_t> allowed;
    counters.rows_read_sequential += static_cast<int64_t>(rel.row_count());
    for (size_t id = 0; id < rel.row_count(); ++id) {
      ++counters.delta_invocations;
      counters.delta_policies_scanned += static_cast<int64_t>(relevant.size());
      const Value* owner = rel.row(id).find("owner");
      if (owner == nullptr) continue;
      auto it = by_owner.find(*owner);
      if (it == by_owner.end()) continue;
      for (const Policy* p : it->second) {
        ++counters.policy_evals;
        if (eval_object_conditions(p->object_conditions, rel.row(id))) {
          allowed.insert(id);
          break;
        }
      }
    }
    finish("baseline_u", counters, start, allowed);
  }
  {  // Sieve: guarded rewrite, fresh build.
    ExecCounters counters;
    auto start = Clock::now();
    auto ge = build_guarded_expression(
        GeKey{query.qm.querier, query.qm.purpose, relation_}, relevant,
        store_.now(), db_, opts_.constants, &store_);
    std::map<std::string, GuardedPolicyExpression> ges{{relation_, ge}};
    RewrittenQuery rq = rewrite_query(
        db_, q, query.qm, ges, opts_.caps, opts_.constants,
        [this](PolicyId id) { return store_.get_policy(id); });
    std::set<size_t> allowed =
        execute_access_plan(rel, rq.plans.at(relation_), counters);
    finish("sieve", counters, start, allowed);
  }
  return rows;
}

CostConstants calibrate(const Database& db, const std::string& relation,
                        std::span<const Policy> sample_policies,
                        bool deterministic) {
  CostConstants k;  // the fixed schedule
  if (deterministic) return k;

  const Relation& rel = db.relation(relation);
  if (rel.row_count() == 0 || sample_policies.empty()) return k;

  size_t sample_n = std::min<size_t>(rel.row_count(), 512);
  std::vector<Tuple> sample;
  for (size_t i = 0; i < sample_n; ++i)
    sample.push_back(rel.row(i * rel.row_count() / sample_n));

  double avg_checked =
      measure_avg_policies_checked(sample_policies, sample);
  k.alpha = std::clamp(
      avg_checked / static_cast<double>(sample_policies.size()), 0.01, 1.0);

  // Wall-clock probes, expressed relative to one condition evaluation.
  auto start = Clock::now();
  size_t evals = 0;
  for (const auto& t : sample)
    for (const auto& p : sample_policies) {
      eval_object_conditions(p.object_conditions, t);
      ++evals;
    }
  double ns_per_eval =
      std::chrono::duration<double, std::nano>(Clock::now() - start).count() /
      static_cast<double>(std::max<size_t>(1, evals));

  // Sequential pass over the relation.
  start = Clock::now();
  size_t touched = 0;
  for (size_t id = 0; id < rel.row_count(); ++id)
    touched += rel.row(id).attrs.size();
  double ns_seq =
      std::chrono::duration<double, std::nano>(Clock::now() - start).count() /
      static_cast<double>(std::max<size_t>(1, rel.row_count()));

  // Random access through the owner index.
  auto probe = sample_policies.front().owner_condition();
  start = Clock::now();
  size_t reads = 0;
  for (int rep = 0; rep < 16; ++rep) {
    auto ids = rel.index_scan(probe);
    reads += ids.size();
    for (size_t id : ids) touched += rel.row(id).attrs.size();
  }
  double ns_rand =
      std::chrono::duration<double, std::nano>(Clock::now() - start).count() /
      static_cast<double>(std::max<size_t>(1, reads));

  if (ns_per_eval > 0 && ns_rand > 0) {
    k.c_e = 1.0;
    k.c_r = std::max(1.0, ns_rand / ns_per_eval);
    k.seq_ratio = std::clamp(ns_rand / std::max(1.0, ns_seq), 1.0, 50.0);
  }
  (void)touched;
  k.validate();
  return k;
}

}  // namespace sieve
