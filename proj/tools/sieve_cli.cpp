#include <fstream>
#include <iostream>
#include <set>

#include <CLI11.hpp>

#include "sieve/bench.hpp"
#include "sieve/eval.hpp"
#include "sieve/rewriter.hpp"

using namespace sieve;

namespace {

std::vector<Policy> load_policies(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SieveError("cannot open policy file " + path);
  std::vector<Policy> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(policy_from_json(Json::parse(line)));
  }
  return out;
}

Database load_database(const std::string& path, const std::string& relation) {
  std::ifstream in(path);
  if (!in) throw SieveError("cannot open data file " + path);
  Database db;
  db.load_relation(relation, in, {"wifiAP", "time", "date"});
  return db;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SieveError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

DialectCapabilities dialect_by_name(const std::string& name,
                                    const std::string& config_path) {
  if (!config_path.empty())
    return DialectCapabilities::from_config(read_file(config_path));
  if (name == "embedded") return DialectCapabilities::embedded();
  if (name == "hinted") return DialectCapabilities::hinted();
  if (name == "plain") return DialectCapabilities::plain();
  throw SieveError("unknown dialect '" + name +
                   "' (expected embedded, hinted or plain)");
}

struct EnforcementSetup {
  Database db;
  PolicyStore store;
  CostConstants k;
  DialectCapabilities caps;
};

void init_setup(EnforcementSetup& setup, const std::string& data_path,
                const std::string& relation, const std::string& policies_path,
                const std::string& calibration_path,
                const std::string& dialect,
                const std::string& dialect_config) {
  setup.db = load_database(data_path, relation);
  for (auto& p : load_policies(policies_path)) {
    p.id = 0;  // file order decides the logical timestamps
    setup.store.insert_policy(p);
  }
  if (!calibration_path.empty())
    setup.k = CostConstants::load_file(calibration_path);
  setup.caps = dialect_by_name(dialect, dialect_config);
}

EnforcementResult enforce_query(EnforcementSetup& setup,
                                const std::string& sql,
                                const QueryMetadata& qm) {
  ParsedQuery q = parse_query(sql);
  GeProvider provider = [&setup](const GeKey& key) {
    auto relevant = setup.store.fetch_policies(key, 0);
    return build_guarded_expression(key, relevant, setup.store.now(), setup.db,
                                    setup.k, &setup.store);
  };
  PolicyResolver resolver = [&setup](PolicyId id) {
    return setup.store.get_policy(id);
  };
  return enforce_and_execute(setup.db, q, qm, setup.caps, setup.k, provider,
                             resolver);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sieve: fine-grained access control enforcement middleware"};
  app.require_subcommand(1);

  // ---- gen ----------------------------------------------------------------
  auto* gen_cmd = app.add_subcommand(
      "gen", "Generate a policy/query workload and optional base data");
  std::string gen_scenario = "attendance";
  std::string gen_mode = "steady";
  int gen_x = 10, gen_y = 1, gen_z = 0, gen_window = 10;
  double gen_zipf = 0.0;
  uint64_t gen_seed = 42;
  bool gen_full = false;
  std::string gen_out = "workload.jsonl";
  std::string gen_data_out;
  size_t gen_rows = 2000;
  gen_cmd->add_option("--scenario", gen_scenario, "attendance | space");
  gen_cmd->add_option("--mode", gen_mode, "steady | bursty | deletion");
  gen_cmd->add_option("--x", gen_x, "policy inserts per epoch");
  gen_cmd->add_option("--y", gen_y, "queries per epoch");
  gen_cmd->add_option("--z", gen_z, "deletions per epoch (deletion mode)");
  gen_cmd->add_option("--zipf-alpha", gen_zipf, "querier popularity skew");
  gen_cmd->add_option("--window-size", gen_window, "seen-query window");
  gen_cmd->add_option("--seed", gen_seed, "rng seed");
  gen_cmd->add_flag("--full", gen_full, "full-scale user counts");
  gen_cmd->add_option("-o,--out", gen_out, "workload JSONL output");
  gen_cmd->add_option("--emit-data", gen_data_out,
                      "also write a synthetic relation here");
  gen_cmd->add_option("--rows", gen_rows, "synthetic relation size");

  // ---- load ---------------------------------------------------------------
  auto* load_cmd =
      app.add_subcommand("load", "Load a relation file and print statistics");
  std::string load_relation = "wifi";
  std::string load_file_path;
  load_cmd->add_option("--relation", load_relation, "relation name");
  load_cmd->add_option("file", load_file_path, "JSONL rows")->required();

  // ---- rewrite / run ------------------------------------------------------
  std::string rw_querier, rw_purpose = "marking attendance";
  std::string rw_dialect = "embedded", rw_dialect_config;
  std::string rw_policies, rw_data, rw_calibration;
  std::string rw_relation = "wifi";
  std::string rw_query_file;
  bool run_verify = false;

  auto add_enforcement_options = [&](CLI::App* cmd) {
    cmd->add_option("--querier", rw_querier, "query metadata: querier")
        ->required();
    cmd->add_option("--purpose", rw_purpose, "query metadata: purpose");
    cmd->add_option("--dialect", rw_dialect, "embedded | hinted | plain");
    cmd->add_option("--dialect-config", rw_dialect_config,
                    "key=value dialect template file");
    cmd->add_option("--policies", rw_policies, "policy corpus JSONL")
        ->required();
    cmd->add_option("--data", rw_data, "relation rows JSONL")->required();
    cmd->add_option("--relation", rw_relation, "governed relation name");
    cmd->add_option("--calibration", rw_calibration, "cost constants file");
    cmd->add_option("query", rw_query_file, "file holding one SQL query")
        ->required();
  };
  auto* rewrite_cmd =
      app.add_subcommand("rewrite", "Print the policy-compliant rewrite");
  add_enforcement_options(rewrite_cmd);
  auto* run_cmd =
      app.add_subcommand("run", "Rewrite and execute on the embedded engine");
  add_enforcement_options(run_cmd);
  run_cmd->add_flag("--verify", run_verify,
                    "cross-check results against the oracle");

  // ---- guards -------------------------------------------------------------
  auto* guards_cmd = app.add_subcommand("guards", "Guard inspection");
  auto* dump_cmd =
      guards_cmd->add_subcommand("dump", "Emit the candidate guard set");
  std::string gd_querier, gd_purpose = "marking attendance";
  std::string gd_policies, gd_data, gd_relation = "wifi", gd_calibration;
  dump_cmd->add_option("--querier", gd_querier)->required();
  dump_cmd->add_option("--purpose", gd_purpose);
  dump_cmd->add_option("--policies", gd_policies)->required();
  dump_cmd->add_option("--data", gd_data)->required();
  dump_cmd->add_option("--relation", gd_relation);
  dump_cmd->add_option("--calibration", gd_calibration);

  // ---- store --------------------------------------------------------------
  auto* store_cmd = app.add_subcommand("store", "Policy store maintenance");
  auto* import_cmd =
      store_cmd->add_subcommand("import", "Import a state dump / journal");
  std::string store_in, store_out;
  import_cmd->add_option("file", store_in, "JSONL state dump")->required();
  import_cmd->add_option("--export", store_out,
                         "re-export the state to this path");
  auto* export_cmd = store_cmd->add_subcommand(
      "export", "Import a dump and write it back out (round trip)");
  export_cmd->add_option("file", store_in)->required();
  export_cmd->add_option("-o,--out", store_out)->required();

  // ---- bench --------------------------------------------------------------
  auto* bench_cmd =
      app.add_subcommand("bench", "Replay a workload through the full stack");
  std::string bench_workload, bench_data, bench_report, bench_csv;
  std::string bench_relation = "wifi";
  std::string bench_strategy = "o1";
  std::string bench_scenario = "attendance";
  std::string bench_calibration;
  double bench_cache_pct = 80.0;
  bool bench_verify = false, bench_no_verify = false, bench_no_cache = false;
  bool bench_full = false;
  uint64_t bench_seed = 42;
  size_t bench_rows = 2000;
  bench_cmd->add_option("--workload", bench_workload, "workload JSONL")
      ->required();
  bench_cmd->add_option("--data", bench_data,
                        "relation rows JSONL (default: synthesize)");
  bench_cmd->add_option("--relation", bench_relation);
  bench_cmd->add_option("--scenario", bench_scenario,
                        "scenario for synthesized data");
  bench_cmd->add_flag("--full", bench_full, "full-scale synthesized scenario");
  bench_cmd->add_option("--seed", bench_seed, "seed for synthesized data");
  bench_cmd->add_option("--rows", bench_rows, "synthesized relation size");
  bench_cmd->add_option("--cache-size-pct", bench_cache_pct,
                        "cache slots as % of distinct queriers");
  bench_cmd->add_option("--refresh-strategy", bench_strategy,
                        "b1 | b2 | o1 | o2");
  bench_cmd->add_flag("--verify", bench_verify, "force oracle verification");
  bench_cmd->add_flag("--no-verify", bench_no_verify, "skip verification");
  bench_cmd->add_flag("--no-cache", bench_no_cache, "disable the GE cache");
  bench_cmd->add_option("--calibration", bench_calibration);
  bench_cmd->add_option("--report", bench_report, "JSON report path");
  bench_cmd->add_option("--csv", bench_csv, "per-epoch CSV path");

  // ---- calibrate ----------------------------------------------------------
  auto* cal_cmd = app.add_subcommand("calibrate", "Write a calibration file");
  std::string cal_out = "calibration.txt";
  std::string cal_policies, cal_data, cal_relation = "wifi";
  bool cal_measured = false;
  cal_cmd->add_option("-o,--out", cal_out)->required();
  cal_cmd->add_flag("--measured", cal_measured,
                    "probe the engine instead of the fixed schedule");
  cal_cmd->add_option("--policies", cal_policies, "sample policies JSONL");
  cal_cmd->add_option("--data", cal_data, "relation rows JSONL");
  cal_cmd->add_option("--relation", cal_relation);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen_cmd) {
      ScenarioSpec spec = scenario_from_name(gen_scenario) ==
                                  Scenario::MarkingAttendance
                              ? ScenarioSpec::attendance(!gen_full)
                              : ScenarioSpec::space_usage(!gen_full);
      WorkloadConfig cfg;
      cfg.mode = WorkloadConfig::mode_from_name(gen_mode);
      cfg.x_policies = gen_x;
      cfg.y_queries = gen_y;
      cfg.z_deletions = gen_z;
      cfg.zipf_alpha = gen_zipf;
      cfg.window_size = gen_window;
      cfg.seed = gen_seed;
      WorkloadGenerator gen(spec, cfg);
      auto wl = gen.generate();
      std::ofstream out(gen_out);
      if (!out) throw SieveError("cannot write " + gen_out);
      write_workload(out, wl);
      std::cout << "wrote " << wl.events.size() << " events ("
                << wl.policies.size() << " policies, " << wl.queries.size()
                << " queries, " << wl.queriers.size() << " queriers) to "
                << gen_out << "\n";
      if (!gen_data_out.empty()) {
        std::ofstream data_out(gen_data_out);
        if (!data_out) throw SieveError("cannot write " + gen_data_out);
        for (const auto& t : gen.generate_data(gen_rows))
          data_out << to_jsonl_line(tuple_to_json(t)) << "\n";
        std::cout << "wrote " << gen_rows << " rows to " << gen_data_out
                  << "\n";
      }
    } else if (*load_cmd) {
      Database db = load_database(load_file_path, load_relation);
      const Relation& rel = db.relation(load_relation);
      std::cout << "relation " << load_relation << ": " << rel.row_count()
                << " rows, governed=" << (rel.governed() ? "yes" : "no")
                << "\nindexes:";
      for (const auto& attr : rel.indexed_attributes()) std::cout << " " << attr;
      std::cout << "\nschema:";
      for (const auto& [attr, tag] : rel.schema())
        std::cout << " " << attr << ":" << tag_name(tag);
      std::cout << "\n";
    } else if (*rewrite_cmd || *run_cmd) {
      EnforcementSetup setup;
      init_setup(setup, rw_data, rw_relation, rw_policies, rw_calibration,
                 rw_dialect, rw_dialect_config);
      std::string sql = read_file(rw_query_file);
      QueryMetadata qm{rw_querier, rw_purpose};
      auto result = enforce_query(setup, sql, qm);
      if (*rewrite_cmd) {
        std::cout << result.rewritten.sql << "\n";
      } else {
        for (const auto& col : result.rows.columns) std::cout << col << "\t";
        std::cout << "\n";
        for (const auto& row : result.rows.rows) {
          for (const auto& v : row) std::cout << v.to_string() << "\t";
          std::cout << "\n";
        }
        std::cerr << result.rows.rows.size() << " rows, policy evals "
                  << result.counters.policy_evals << "\n";
        if (run_verify) {
          GroupDirectory groups;
          groups.build();
          ParsedQuery q = parse_query(sql);
          const Relation& rel = setup.db.relation(rw_relation);
          auto relevant = setup.store.fetch_policies(
              GeKey{qm.querier, qm.purpose, rw_relation}, 0);
          std::set<size_t> oracle_ids;
          for (size_t id = 0; id < rel.row_count(); ++id)
            if (oracle_allows(rel.row(id), relevant, qm, groups))
              oracle_ids.insert(id);
          std::map<std::string, std::set<size_t>> allowed{
              {rw_relation, oracle_ids}};
          ExecCounters scratch;
          auto expected = execute_query(setup.db, q, allowed, scratch);
          if (expected.fingerprint() != result.rows.fingerprint())
            throw VerificationError("rewritten results differ from oracle");
          std::cerr << "oracle check passed\n";
        }
      }
    } else if (*dump_cmd) {
      EnforcementSetup setup;
      init_setup(setup, gd_data, gd_relation, gd_policies, gd_calibration,
                 "embedded", "");
      GeKey key{gd_querier, gd_purpose, gd_relation};
      auto relevant = setup.store.fetch_policies(key, 0);
      auto cands = generate_candidate_set(relevant, setup.db.index_catalog(),
                                          setup.db.estimator(gd_relation),
                                          setup.k);
      Json out = Json::array();
      for (const auto& c : cands) {
        Json j;
        j["predicate"] = condition_to_json(c.predicate);
        j["covered_policies"] = c.covered_policies;
        j["merged_from"] = c.merged_from;
        j["estimated_rows"] = setup.db.estimator(gd_relation).estimate(
            c.predicate);
        out.push_back(std::move(j));
      }
      std::cout << out.dump(2) << "\n";
    } else if (*import_cmd || *export_cmd) {
      PolicyStore store;
      std::ifstream in(store_in);
      if (!in) throw SieveError("cannot open " + store_in);
      store.import_state(in);
      std::cerr << "imported " << store.policy_count() << " policies\n";
      if (!store_out.empty()) {
        std::ofstream out(store_out);
        if (!out) throw SieveError("cannot write " + store_out);
        store.export_state(out);
        std::cerr << "exported state to " << store_out << "\n";
      }
    } else if (*bench_cmd) {
      std::ifstream wl_in(bench_workload);
      if (!wl_in) throw SieveError("cannot open " + bench_workload);
      auto events = read_workload(wl_in);
      std::set<std::string> queriers;
      for (const auto& ev : events)
        if (ev.kind == WorkloadEvent::Kind::Query)
          queriers.insert(ev.qm.querier);

      BenchOptions opts;
      opts.cache_size_pct = bench_cache_pct;
      opts.cache_enabled = !bench_no_cache;
      opts.strategy = refresh_strategy_from_name(bench_strategy);
      if (bench_verify) opts.verify = true;
      if (bench_no_verify) opts.verify = false;
      if (!bench_calibration.empty())
        opts.constants = CostConstants::load_file(bench_calibration);

      RunReport report;
      if (!bench_data.empty()) {
        BenchHarness harness(load_database(bench_data, bench_relation), opts);
        report = harness.run_events(events, queriers.size());
      } else {
        ScenarioSpec spec = scenario_from_name(bench_scenario) ==
                                    Scenario::MarkingAttendance
                                ? ScenarioSpec::attendance(!bench_full)
                                : ScenarioSpec::space_usage(!bench_full);
        WorkloadConfig cfg;
        cfg.seed = bench_seed;
        opts.data_rows = bench_rows;
        BenchHarness harness(spec, cfg, opts);
        report = harness.run_events(events, queriers.size());
      }
      std::cout << report.to_text();
      if (!bench_report.empty()) {
        std::ofstream out(bench_report);
        out << report.to_json().dump(2) << "\n";
        std::cerr << "report written to " << bench_report << "\n";
      }
      if (!bench_csv.empty()) {
        std::ofstream out(bench_csv);
        out << report.to_csv();
        std::cerr << "per-epoch series written to " << bench_csv << "\n";
      }
    } else if (*cal_cmd) {
      CostConstants k;
      if (cal_measured) {
        if (cal_policies.empty() || cal_data.empty())
          throw SieveError("--measured needs --policies and --data");
        Database db = load_database(cal_data, cal_relation);
        auto policies = load_policies(cal_policies);
        size_t sample = std::min<size_t>(policies.size(), 64);
        k = calibrate(db, cal_relation,
                      std::span<const Policy>(policies.data(), sample), false);
      }
      k.save_file(cal_out);
      std::cout << "calibration written to " << cal_out << "\n" << k.format();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
