#include <benchmark/benchmark.h>

#include "sieve/bench.hpp"
#include "sieve/rewriter.hpp"

using namespace sieve;

namespace {

struct Fixture {
  ScenarioSpec spec;
  WorkloadGenerator gen;
  Database db;
  PolicyStore store;
  CostConstants k;

  explicit Fixture(int holders)
      : spec([holders] {
          ScenarioSpec s = ScenarioSpec::attendance(true);
          s.faculty = std::max(2, holders / 10);
          s.graduate = holders / 2;
          s.undergrad = holders - holders / 2;
          return s;
        }()),
        gen(spec, WorkloadConfig{}) {
    db.load_relation(spec.relation, gen.generate_data(2000),
                     {"wifiAP", "time", "date"});
    for (const auto& p : gen.generate_policies()) store.insert_policy(p);
  }
};

void BM_GuardGeneration(benchmark::State& state) {
  Fixture fx(static_cast<int>(state.range(0)) / 10);
  GeKey key{"1", fx.spec.purpose(), fx.spec.relation};
  auto policies = fx.store.fetch_policies(key, 0);
  for (auto _ : state) {
    auto ge = build_guarded_expression(key, policies, 1, fx.db, fx.k);
    benchmark::DoNotOptimize(ge);
  }
  state.SetLabel(std::to_string(policies.size()) + " policies for the key");
}
BENCHMARK(BM_GuardGeneration)->Arg(200)->Arg(400)->Arg(800)->Arg(1600);

void BM_RewriteAndExecute(benchmark::State& state) {
  Fixture fx(100);
  auto queries = fx.gen.generate_queries();
  GeProvider provider = [&fx](const GeKey& key) {
    auto relevant = fx.store.fetch_policies(key, 0);
    return build_guarded_expression(key, relevant, fx.store.now(), fx.db,
                                    fx.k);
  };
  PolicyResolver resolver = [&fx](PolicyId id) {
    return fx.store.get_policy(id);
  };
  size_t i = 0;
  for (auto _ : state) {
    const auto& inst = queries[i++ % queries.size()];
    auto result =
        enforce_and_execute(fx.db, parse_query(inst.sql), inst.qm,
                            DialectCapabilities::embedded(), fx.k, provider,
                            resolver);
    benchmark::DoNotOptimize(result);
  }
}
BENCHMARK(BM_RewriteAndExecute);

void BM_CacheLookup(benchmark::State& state) {
  Fixture fx(100);
  GeCache cache(32, RefreshStrategy::O1Mergeability);
  GeBuilder builder = [&fx](const GeKey& key, const std::vector<Policy>& ps,
                            LogicalTs ts) {
    return build_guarded_expression(key, ps, ts, fx.db, fx.k);
  };
  auto queriers = fx.gen.querier_ids();
  size_t i = 0;
  for (auto _ : state) {
    const std::string who = std::to_string(queriers[i++ % queriers.size()]);
    auto ge = cache.lookup_or_build(QueryMetadata{who, fx.spec.purpose()},
                                    fx.spec.relation, fx.store, builder);
    benchmark::DoNotOptimize(ge);
  }
}
BENCHMARK(BM_CacheLookup);

}  // namespace

BENCHMARK_MAIN();
