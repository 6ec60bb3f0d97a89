// End-to-end acceptance suite. Each criterion prints one pass/fail line;
// the process exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "sieve/bench.hpp"
#include "sieve/eval.hpp"
#include "sieve/rewriter.hpp"

using namespace sieve;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int criterion, const std::string& what, bool pass,
            const std::string& detail) {
  std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL",
              criterion, what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

ScenarioSpec scaled_attendance(int faculty, int graduate, int undergrad) {
  ScenarioSpec spec = ScenarioSpec::attendance(true);
  spec.faculty = faculty;
  spec.graduate = graduate;
  spec.undergrad = undergrad;
  return spec;
}

ScenarioSpec scaled_space(int faculty, int staff, int others) {
  ScenarioSpec spec = ScenarioSpec::space_usage(true);
  spec.faculty = faculty;
  spec.staff = staff;
  spec.visitor = others;
  spec.graduate = others / 2;
  spec.undergrad = others / 2;
  return spec;
}

// ---------------------------------------------------------------------------
// Criterion 1: rewritten-query results equal the oracle pipeline exactly on
// randomized instances covering both scenarios and all three templates.
void criterion_1() {
  auto start = Clock::now();
  std::mt19937_64 rng(20240201);
  GroupDirectory groups;
  groups.build();
  CostConstants k;

  int instances = 0;
  int mismatches = 0;
  std::set<int> templates_seen;

  while (instances < 200) {
    bool attendance = instances % 2 == 0;
    ScenarioSpec spec =
        attendance
            ? scaled_attendance(3 + static_cast<int>(rng() % 5),
                                10 + static_cast<int>(rng() % 20),
                                10 + static_cast<int>(rng() % 20))
            : scaled_space(2 + static_cast<int>(rng() % 3),
                           2 + static_cast<int>(rng() % 4),
                           10 + static_cast<int>(rng() % 20));
    WorkloadConfig cfg;
    cfg.seed = rng();
    WorkloadGenerator gen(spec, cfg);

    Database db;
    size_t rows = 200 + rng() % 2800;  // <= 5k tuples
    db.load_relation(spec.relation, gen.generate_data(rows),
                     {"wifiAP", "time", "date"});

    PolicyStore store;
    auto policies = gen.generate_policies();
    size_t keep = std::min<size_t>(policies.size(), 20 + rng() % 480);
    std::shuffle(policies.begin(), policies.end(), rng);
    policies.resize(keep);
    for (const auto& p : policies) {
      Policy fresh = p;
      fresh.id = 0;
      store.insert_policy(fresh);
    }

    auto queries = gen.generate_queries();
    for (int qi = 0; qi < 3; ++qi) {
      const QueryInstance& inst = queries[rng() % queries.size()];
      int tmpl = inst.sql.find("GROUP BY") != std::string::npos ? 3
                 : inst.sql.find("owner IN") != std::string::npos ? 2
                                                                  : 1;
      templates_seen.insert(tmpl);

      ParsedQuery q = parse_query(inst.sql);
      GeKey key{inst.qm.querier, inst.qm.purpose, spec.relation};
      auto relevant = store.fetch_policies(key, 0);
      auto ge = build_guarded_expression(key, relevant, store.now(), db, k,
                                         &store);
      std::map<std::string, GuardedPolicyExpression> ges{{spec.relation, ge}};
      auto rq =
          rewrite_query(db, q, inst.qm, ges, DialectCapabilities::hinted(), k,
                        [&store](PolicyId id) { return store.get_policy(id); });
      ExecCounters counters;
      auto actual = execute_rewritten(db, rq, counters);

      const Relation& rel = db.relation(spec.relation);
      std::set<size_t> oracle_ids;
      for (size_t id = 0; id < rel.row_count(); ++id)
        if (oracle_allows(rel.row(id), relevant, inst.qm, groups))
          oracle_ids.insert(id);
      std::map<std::string, std::set<size_t>> allowed{
          {spec.relation, oracle_ids}};
      ExecCounters scratch;
      auto expected = execute_query(db, q, allowed, scratch);
      if (actual.fingerprint() != expected.fingerprint()) ++mismatches;
    }
    ++instances;
  }

  double secs = std::chrono::duration<double>(Clock::now() - start).count();
  bool pass = mismatches == 0 && instances >= 200 &&
              templates_seen == std::set<int>{1, 2, 3} && secs < 300.0;
  std::ostringstream detail;
  detail << instances << " instances, " << mismatches << " mismatches, "
         << secs << "s";
  report(1, "oracle equivalence of rewritten queries", pass, detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 2: instrumented policy evaluations of the guarded rewrite reach
// at most 10% of the flat-DNF baseline on the clustered attendance corpus.
void criterion_2() {
  ScenarioSpec spec = ScenarioSpec::attendance(true);
  WorkloadConfig cfg;
  WorkloadGenerator gen(spec, cfg);

  BenchOptions opts;
  opts.data_rows = 2000;
  opts.verify = false;
  BenchHarness harness(spec, cfg, opts);
  for (const auto& p : gen.generate_policies())
    harness.store().insert_policy(p);

  auto queries = gen.generate_queries();
  int64_t sieve_evals = 0;
  int64_t baseline_evals = 0;
  for (size_t i = 0; i < 30; ++i) {
    auto rows = harness.run_baselines(queries[i * 11]);
    baseline_evals += rows[0].policy_evals;  // baseline_p
    sieve_evals += rows[3].policy_evals;     // sieve
  }
  double ratio = baseline_evals
                     ? static_cast<double>(sieve_evals) / baseline_evals
                     : 1.0;
  std::ostringstream detail;
  detail << "sieve " << sieve_evals << " vs baseline_p " << baseline_evals
         << " evals, ratio " << ratio;
  report(2, "policy-check savings of at least 90%", ratio <= 0.10,
         detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 3: per-querier guarded expressions have several guards with
// non-trivial partitions, pairwise disjoint and exactly covering.
void criterion_3() {
  ScenarioSpec spec = ScenarioSpec::attendance(true);
  WorkloadConfig cfg;
  WorkloadGenerator gen(spec, cfg);
  CostConstants k;

  Database db;
  db.load_relation(spec.relation, gen.generate_data(2000),
                   {"wifiAP", "time", "date"});
  PolicyStore store;
  for (const auto& p : gen.generate_policies()) store.insert_policy(p);

  int queriers = 0;
  int with_multiple_guards = 0;
  int invariant_failures = 0;
  double partition_mean_sum = 0;
  for (int f : gen.querier_ids()) {
    GeKey key{std::to_string(f), spec.purpose(), spec.relation};
    auto relevant = store.fetch_policies(key, 0);
    if (relevant.empty()) continue;
    auto ge =
        build_guarded_expression(key, relevant, store.now(), db, k, &store);
    ++queriers;
    try {
      ge.check_invariants();
      if (ge.built_over.size() != relevant.size()) ++invariant_failures;
    } catch (const std::exception&) {
      ++invariant_failures;
    }
    if (ge.guards.size() >= 2) ++with_multiple_guards;
    partition_mean_sum += static_cast<double>(ge.built_over.size()) /
                          static_cast<double>(ge.guards.size());
  }
  double mean_partition = partition_mean_sum / std::max(1, queriers);
  bool pass = queriers > 0 && with_multiple_guards == queriers &&
              invariant_failures == 0 && mean_partition > 1.0;
  std::ostringstream detail;
  detail << queriers << " queriers, mean partition " << mean_partition
         << ", invariant failures " << invariant_failures;
  report(3, "guard structure sanity on the clustered corpus", pass,
         detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 4: greedy selection within 1.5x of the exhaustive optimum on
// small instances, and merge decisions agreeing with brute-force costing.
void criterion_4() {
  std::mt19937_64 rng(404);
  CostConstants k;

  std::vector<Tuple> rows;
  for (int i = 0; i < 2000; ++i) {
    Tuple t;
    t.relation = "wifi";
    t.attrs.emplace("x", Value::integer(static_cast<int64_t>(rng() % 256)));
    t.attrs.emplace("owner",
                    Value::integer(static_cast<int64_t>(rng() % 40)));
    rows.push_back(std::move(t));
  }
  auto est = SelectivityEstimator::build(rows, {"x", "owner"});

  auto x_range = [](int64_t lo, int64_t hi) {
    return ObjectCondition::range("x", CompareOp::Ge, Value::integer(lo),
                                  CompareOp::Le, Value::integer(hi));
  };

  // Guard-selection instances as the pipeline produces them: random policy
  // sets run through candidate generation (coverage sets then carry the
  // real containment structure), capped at 10 candidates / 15 policies.
  IndexCatalog idx;
  idx.add_index("wifi", "x");
  int greedy_bad = 0;
  int greedy_checked = 0;
  while (greedy_checked < 100) {
    size_t n_pol = 3 + rng() % 13;
    std::vector<Policy> pool;
    std::vector<PolicyId> all;
    for (size_t i = 0; i < n_pol; ++i) {
      Policy p;
      p.id = static_cast<PolicyId>(i + 1);
      p.relation = "wifi";
      int owner = static_cast<int>(rng() % 40);
      p.owner = std::to_string(owner);
      p.querier = "q";
      p.purpose = "p";
      p.object_conditions.push_back(
          ObjectCondition::eq("owner", Value::integer(owner)));
      if (rng() % 2) {
        int64_t lo = static_cast<int64_t>(rng() % 200);
        p.object_conditions.push_back(
            x_range(lo, lo + 1 + static_cast<int64_t>(rng() % 40)));
      }
      all.push_back(p.id);
      pool.push_back(std::move(p));
    }
    auto cands = generate_candidate_set(pool, idx, est, k);
    if (cands.size() > 10) continue;
    ++greedy_checked;
    auto ge = select_guards(cands, all, GeKey{"q", "p", "wifi"}, 1, est, k);
    double greedy = ge_total_cost(ge, est, k);
    double optimal = optimal_cover_cost(cands, all, est, k);
    if (greedy > 1.5 * optimal + 1e-9) ++greedy_bad;
  }

  // Merge agreement against exact tuple counting, allowing one histogram
  // bucket of slack around the threshold.
  auto exact_count = [&rows](const ObjectCondition& oc) {
    double n = 0;
    for (const auto& t : rows)
      if (eval_predicate(oc.pred, *t.find("x"))) ++n;
    return n;
  };
  double bucket = 2000.0 / SelectivityEstimator::kDefaultBuckets;
  int merge_disagreements = 0;
  int merge_checked = 0;
  for (int iter = 0; iter < 400; ++iter) {
    int64_t alo = static_cast<int64_t>(rng() % 200);
    int64_t ahi = alo + 1 + static_cast<int64_t>(rng() % 40);
    int64_t blo = alo + static_cast<int64_t>(rng() % 44);
    int64_t bhi = blo + 1 + static_cast<int64_t>(rng() % 40);
    auto a = x_range(alo, ahi);
    auto b = x_range(blo, bhi);
    auto decision = should_merge(a, b, est, k);
    Interval ia = *a.interval();
    Interval ib = *b.interval();
    if (!ia.overlaps(ib)) {
      // Theorem: disjoint pairs must never merge.
      if (decision.has_value()) ++merge_disagreements;
      continue;
    }
    ++merge_checked;
    // Half-step adjacency can overlap as intervals while the integer
    // intersection is empty.
    double inter = std::max(alo, blo) > std::min(ahi, bhi)
                       ? 0.0
                       : exact_count(
                             x_range(std::max(alo, blo), std::min(ahi, bhi)));
    double uni = exact_count(x_range(std::min(alo, blo), std::max(ahi, bhi)));
    if (uni <= 0) continue;
    bool exact_beneficial = inter / uni > merge_threshold(k);
    if (decision.has_value() != exact_beneficial) {
      // Tolerated only within one bucket of the threshold boundary.
      double boundary_gap =
          std::abs(inter - merge_threshold(k) * uni);
      if (boundary_gap > bucket * (1.0 + merge_threshold(k)))
        ++merge_disagreements;
    }
  }

  bool pass = greedy_bad == 0 && merge_disagreements == 0 && merge_checked > 50;
  std::ostringstream detail;
  detail << greedy_bad << "/100 instances above 1.5x, " << merge_disagreements
         << " merge disagreements over " << merge_checked << " pairs";
  report(4, "greedy quality and merge-rule agreement", pass, detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 5: guard generation scales near-linearly in the policy count.
void criterion_5() {
  CostConstants k;
  WorkloadConfig cfg;

  auto build_time = [&](int holders) {
    ScenarioSpec spec = scaled_attendance(1, holders / 2, holders - holders / 2);
    WorkloadGenerator gen(spec, cfg);
    Database db;
    db.load_relation(spec.relation, gen.generate_data(2000),
                     {"wifiAP", "time", "date"});
    auto policies = gen.generate_policies();  // holders * 10, one querier
    GeKey key{"1", spec.purpose(), spec.relation};
    double best = 1e100;
    for (int rep = 0; rep < 3; ++rep) {
      auto start = Clock::now();
      auto ge = build_guarded_expression(key, policies, 1, db, k);
      double ms =
          std::chrono::duration<double, std::milli>(Clock::now() - start)
              .count();
      if (ge.built_over.size() != policies.size()) return -1.0;
      best = std::min(best, ms);
    }
    return best;
  };

  double t200 = build_time(20);    // 200 policies
  double t1600 = build_time(160);  // 1600 policies
  double ratio = t1600 / std::max(0.01, t200);
  bool pass = t200 > 0 && t1600 > 0 && ratio <= 12.0;
  std::ostringstream detail;
  detail << "200 policies " << t200 << "ms, 1600 policies " << t1600
         << "ms, ratio " << ratio;
  report(5, "guard generation scales near-linearly", pass, detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 6: a measured inline-vs-delta crossover exists on the embedded
// engine and the cost model predicts it within 30%.
void criterion_6() {
  CostConstants k;
  std::mt19937_64 rng(606);

  auto measured_cost = [&](size_t partition_size, ExecMode mode) {
    // Relation where every tuple matches exactly one uniformly placed policy
    // of the partition, so inlining checks half the partition on average.
    Database db;
    std::vector<Tuple> rows;
    const size_t n_rows = 2000;
    for (size_t i = 0; i < n_rows; ++i) {
      Tuple t;
      t.relation = "wifi";
      t.attrs.emplace("id", Value::integer(static_cast<int64_t>(i)));
      t.attrs.emplace("owner", Value::integer(static_cast<int64_t>(
                                   rng() % partition_size)));
      rows.push_back(std::move(t));
    }
    db.load_relation("wifi", std::move(rows), {});

    RelationAccessPlan plan;
    plan.relation = "wifi";
    plan.strategy = Strategy::LinearScan;
    GuardBranchPlan branch;
    branch.guard = ObjectCondition::range(
        "owner", CompareOp::Ge, Value::integer(0), CompareOp::Le,
        Value::integer(static_cast<int64_t>(partition_size)));
    branch.exec_mode = mode;
    branch.guard_id = 1;
    for (size_t i = 0; i < partition_size; ++i) {
      Policy p;
      p.id = static_cast<PolicyId>(i + 1);
      p.relation = "wifi";
      p.owner = std::to_string(i);
      p.querier = "q";
      p.purpose = "p";
      p.object_conditions.push_back(
          ObjectCondition::eq("owner", Value::integer(static_cast<int64_t>(i))));
      branch.partition.push_back(std::move(p));
    }
    plan.branches.push_back(std::move(branch));

    ExecCounters counters;
    execute_access_plan(db.relation("wifi"), plan, counters);
    return counters.cost_units(k);
  };

  std::optional<size_t> measured_crossover;
  for (size_t n = 10; n <= 400; n += 10) {
    double inline_cost = measured_cost(n, ExecMode::Inline);
    double delta_cost = measured_cost(n, ExecMode::Delta);
    if (delta_cost < inline_cost) {
      measured_crossover = n;
      break;
    }
  }
  auto model = delta_crossover(k);
  bool pass = false;
  std::ostringstream detail;
  if (measured_crossover && model) {
    double rel = std::abs(static_cast<double>(*model) -
                          static_cast<double>(*measured_crossover)) /
                 static_cast<double>(*measured_crossover);
    pass = rel <= 0.30;
    detail << "measured crossover ~" << *measured_crossover << ", model "
           << *model << ", relative gap " << rel;
  } else {
    detail << "no crossover found (measured "
           << (measured_crossover ? "yes" : "no") << ", model "
           << (model ? "yes" : "no") << ")";
  }
  report(6, "inline-vs-delta crossover predicted by the model", pass,
         detail.str());
}

// Shared runner for the cache criteria.
RunReport cache_run(const ScenarioSpec& spec, const WorkloadConfig& cfg,
                    double cache_pct, RefreshStrategy strategy, bool verify,
                    size_t data_rows = 500) {
  WorkloadGenerator gen(spec, cfg);
  auto wl = gen.generate();
  BenchOptions opts;
  opts.cache_size_pct = cache_pct;
  opts.strategy = strategy;
  opts.verify = verify;
  opts.data_rows = data_rows;
  BenchHarness harness(spec, cfg, opts);
  return harness.run(wl);
}

// ---------------------------------------------------------------------------
// Criterion 7: steady-state cache behavior across cache sizes.
void criterion_7() {
  ScenarioSpec spec = ScenarioSpec::attendance(true);
  WorkloadConfig cfg;
  cfg.x_policies = 10;
  cfg.y_queries = 1;

  RunReport big = cache_run(spec, cfg, 80.0, RefreshStrategy::O1Mergeability,
                            false);
  RunReport small = cache_run(spec, cfg, 20.0, RefreshStrategy::O1Mergeability,
                              false);

  double hs80 = big.cache.hit_rate() + big.cache.soft_hit_rate();
  double miss80 = big.cache.miss_rate();
  double miss20 = small.cache.miss_rate();
  bool pass = hs80 > miss80 && miss20 >= 2.0 * miss80;
  std::ostringstream detail;
  detail << "80%: hit+soft " << hs80 << " vs miss " << miss80 << "; 20%: miss "
         << miss20;
  report(7, "steady-state cache rates across sizes", pass, detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 8: Zipfian querier popularity drives the hit rate.
void criterion_8() {
  ScenarioSpec spec = ScenarioSpec::attendance(false);  // 388 queriers
  std::vector<double> alphas{1.2, 1.0, 0.5, 0.0};
  std::vector<double> hit_rates;
  for (double alpha : alphas) {
    WorkloadConfig cfg;
    cfg.x_policies = 10;
    cfg.y_queries = 5;
    cfg.zipf_alpha = alpha;
    RunReport r = cache_run(spec, cfg, 80.0, RefreshStrategy::O1Mergeability,
                            false, 400);
    hit_rates.push_back(r.cache.hit_rate());
  }
  bool pass = hit_rates[0] >= 0.60 && hit_rates[1] >= 0.60;
  for (size_t i = 1; i < hit_rates.size(); ++i)
    if (hit_rates[i] > hit_rates[i - 1] + 0.03) pass = false;
  std::ostringstream detail;
  detail << "hit rates by alpha {1.2, 1.0, 0.5, 0}: ";
  for (double h : hit_rates) detail << h << " ";
  report(8, "Zipfian popularity sustains the hit rate", pass, detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 9: refresh strategy ordering on regenerations and total cost.
void criterion_9() {
  ScenarioSpec spec = ScenarioSpec::attendance(true);
  WorkloadConfig cfg;
  cfg.x_policies = 10;
  cfg.y_queries = 1;

  std::map<RefreshStrategy, RunReport> runs;
  for (auto strategy :
       {RefreshStrategy::B1AlwaysRegenerate, RefreshStrategy::B2UpdateLimit,
        RefreshStrategy::O1Mergeability,
        RefreshStrategy::O2RelaxedMergeability})
    runs[strategy] = cache_run(spec, cfg, 80.0, strategy, true, 400);

  const auto& b1 = runs[RefreshStrategy::B1AlwaysRegenerate];
  const auto& b2 = runs[RefreshStrategy::B2UpdateLimit];
  const auto& o1 = runs[RefreshStrategy::O1Mergeability];
  const auto& o2 = runs[RefreshStrategy::O2RelaxedMergeability];

  auto total_cost = [](const RunReport& r) {
    return r.ge_build_cost_units + r.execute_cost_units;
  };
  bool ordering = b1.cache.regenerations >= o2.cache.regenerations &&
                  o2.cache.regenerations >= o1.cache.regenerations;
  bool cost_ok =
      total_cost(o1) <= total_cost(b1) && total_cost(o1) <= total_cost(b2);
  bool verified = b1.verified_queries == b1.queries_executed &&
                  b2.verified_queries == b2.queries_executed &&
                  o1.verified_queries == o1.queries_executed &&
                  o2.verified_queries == o2.queries_executed;
  bool pass = ordering && cost_ok && verified;
  std::ostringstream detail;
  detail << "regens b1 " << b1.cache.regenerations << " >= o2 "
         << o2.cache.regenerations << " >= o1 " << o1.cache.regenerations
         << "; costs o1 " << total_cost(o1) << " b1 " << total_cost(b1)
         << " b2 " << total_cost(b2);
  report(9, "refresh strategy ordering holds with correctness", pass,
         detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 10: bursty workload adaptation in per-cycle hit rates.
void criterion_10() {
  ScenarioSpec spec = ScenarioSpec::attendance(false);
  WorkloadConfig cfg;
  cfg.mode = WorkloadConfig::Mode::Bursty;
  RunReport r = cache_run(spec, cfg, 80.0, RefreshStrategy::O1Mergeability,
                          false, 400);

  const auto& epochs = r.per_epoch;
  size_t quartile = epochs.size() / 4;
  double first = 0, last = 0;
  for (size_t i = 0; i < quartile; ++i) first += epochs[i].hit_rate();
  for (size_t i = epochs.size() - quartile; i < epochs.size(); ++i)
    last += epochs[i].hit_rate();
  first /= quartile;
  last /= quartile;
  bool pass = epochs.size() >= 8 && last - first >= 0.30;
  std::ostringstream detail;
  detail << epochs.size() << " cycles, first-quartile hit rate " << first
         << ", last-quartile " << last;
  report(10, "bursty adaptation lifts the hit rate", pass, detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 11: heavier deletion mixes raise soft hits and regenerations.
void criterion_11() {
  ScenarioSpec spec = ScenarioSpec::attendance(true);
  auto run_deletions = [&](int z) {
    WorkloadConfig cfg;
    cfg.mode = WorkloadConfig::Mode::Deletion;
    cfg.x_policies = 10;
    cfg.y_queries = 5;
    cfg.z_deletions = z;
    return cache_run(spec, cfg, 80.0, RefreshStrategy::O1Mergeability, true,
                     400);
  };
  RunReport light = run_deletions(2);
  RunReport heavy = run_deletions(10);
  bool pass = heavy.cache.soft_hits > light.cache.soft_hits &&
              heavy.cache.regenerations > light.cache.regenerations &&
              light.verified_queries == light.queries_executed &&
              heavy.verified_queries == heavy.queries_executed;
  std::ostringstream detail;
  detail << "soft hits " << light.cache.soft_hits << " -> "
         << heavy.cache.soft_hits << ", regenerations "
         << light.cache.regenerations << " -> " << heavy.cache.regenerations;
  report(11, "deletion pressure raises soft hits and regenerations", pass,
         detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 12: clock eviction matches a second-chance FIFO reference.
struct SecondChanceFifo {
  struct Page {
    GeKey key;
    bool referenced = true;
  };
  size_t capacity;
  std::deque<Page> queue;
  std::vector<GeKey> evictions;

  explicit SecondChanceFifo(size_t cap) : capacity(cap) {}

  void access(const GeKey& key) {
    for (auto& page : queue)
      if (page.key == key) {
        page.referenced = true;
        return;
      }
    if (queue.size() == capacity) {
      while (queue.front().referenced) {
        Page page = queue.front();
        queue.pop_front();
        page.referenced = false;
        queue.push_back(page);
      }
      evictions.push_back(queue.front().key);
      queue.pop_front();
    }
    queue.push_back(Page{key, true});
  }
};

void criterion_12() {
  std::mt19937_64 rng(1212);
  int trace_failures = 0;
  for (int trace = 0; trace < 1000; ++trace) {
    size_t capacity = 2 + rng() % 7;
    size_t key_space = capacity + 1 + rng() % 6;
    size_t accesses = 30 + rng() % 120;

    PolicyStore store;
    std::vector<std::string> queriers;
    for (size_t i = 0; i < key_space; ++i) {
      queriers.push_back("u" + std::to_string(i));
      Policy p;
      p.relation = "wifi";
      p.owner = "1";
      p.querier = queriers.back();
      p.purpose = "p";
      p.object_conditions.push_back(
          ObjectCondition::eq("owner", Value::integer(1)));
      store.insert_policy(p);
    }

    GeCache cache(capacity, RefreshStrategy::B1AlwaysRegenerate);
    SecondChanceFifo reference(capacity);
    GeBuilder builder = [](const GeKey& key, const std::vector<Policy>& ps,
                           LogicalTs ts) {
      GuardedPolicyExpression ge;
      ge.key = key;
      ge.built_at = ts;
      for (const auto& p : ps) {
        GuardedExpressionTerm term;
        term.guard = p.owner_condition();
        term.partition = {p.id};
        term.guard_id = p.id;
        ge.guards.push_back(term);
        ge.built_over.insert(p.id);
      }
      return ge;
    };

    for (size_t a = 0; a < accesses; ++a) {
      const std::string& who = queriers[rng() % key_space];
      cache.lookup_or_build(QueryMetadata{who, "p"}, "wifi", store, builder);
      reference.access(GeKey{who, "p", "wifi"});
    }
    if (cache.eviction_log() != reference.evictions) ++trace_failures;
  }
  std::ostringstream detail;
  detail << trace_failures << "/1000 traces diverged";
  report(12, "clock eviction equals the second-chance FIFO reference",
         trace_failures == 0, detail.str());
}

// ---------------------------------------------------------------------------
// Criterion 13: generator totals at full scale.
void criterion_13() {
  ScenarioSpec spec = ScenarioSpec::attendance(false);
  WorkloadConfig cfg;
  WorkloadGenerator gen(spec, cfg);
  auto policies = gen.generate_policies();
  auto queries = gen.generate_queries();
  std::set<std::string> queriers;
  for (const auto& p : policies) queriers.insert(p.querier);

  bool pass = policies.size() == 31520 && queries.size() == 15760 &&
              queriers.size() == 388;

  // Deletion workload totals from the appendix table.
  const std::vector<std::pair<int, int64_t>> deletion_cases{
      {2, 6304}, {5, 15760}, {10, 31520}};
  std::ostringstream detail;
  detail << policies.size() << " policies, " << queries.size() << " queries, "
         << queriers.size() << " queriers";
  for (auto [z, expected_deletes] : deletion_cases) {
    WorkloadConfig dcfg;
    dcfg.mode = WorkloadConfig::Mode::Deletion;
    dcfg.x_policies = 10;
    dcfg.y_queries = 5;
    dcfg.z_deletions = z;
    WorkloadGenerator dgen(spec, dcfg);
    auto events = dgen.generate().events;
    int64_t inserts = 0, qs = 0, deletes = 0;
    for (const auto& ev : events) {
      if (ev.kind == WorkloadEvent::Kind::InsertPolicy) ++inserts;
      if (ev.kind == WorkloadEvent::Kind::Query) ++qs;
      if (ev.kind == WorkloadEvent::Kind::DeletePolicy) ++deletes;
    }
    if (inserts != 31520 || qs != 15760 || deletes != expected_deletes)
      pass = false;
    detail << "; " << z << "D -> " << deletes << " deletes";
  }
  report(13, "workload generator totals match the scenario tables", pass,
         detail.str());
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  criterion_12();
  criterion_13();

  if (failures) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all 13 acceptance criteria passed\n");
  return 0;
}
