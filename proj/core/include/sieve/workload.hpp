#pragma once

#include <random>
#include <set>
#include <string>
#include <vector>

#include "sieve/json_io.hpp"
#include "sieve/policy.hpp"

namespace sieve {

enum class Scenario { MarkingAttendance, SpaceUsage };

Scenario scenario_from_name(const std::string& name);
std::string_view scenario_name(Scenario s);

/// User population and policy quota for one scenario. The full presets match
/// the campus deployment counts; the desk presets shrink each profile 10x
/// while preserving the ratios.
struct ScenarioSpec {
  Scenario scenario = Scenario::MarkingAttendance;
  int visitor = 0;
  int staff = 0;
  int graduate = 0;
  int undergrad = 0;
  int faculty = 0;
  int policies_per_user = 10;
  int classes_per_faculty = 3;
  int classes_per_student = 2;
  std::string relation = "wifi";

  static ScenarioSpec attendance(bool desk_scale);
  static ScenarioSpec space_usage(bool desk_scale);

  std::string purpose() const;
  int total_users() const;
  /// Students for attendance; everyone for space usage.
  int policy_holder_count() const;
  int querier_count() const;  // faculty, or faculty + staff
  int64_t total_policies() const;
  /// Half the policy count, so the query pool outlasts the policy stream.
  int64_t total_queries() const;
};

struct WorkloadConfig {
  enum class Mode { Steady, Bursty, Deletion };
  Mode mode = Mode::Steady;
  int x_policies = 10;
  int y_queries = 1;
  int z_deletions = 0;
  double zipf_alpha = 0.0;  // 0 = uniform querier draw
  int window_size = 10;
  uint64_t seed = 42;

  // Bursty schedule: start at (x_start)P(y_start)Q, each cycle applies
  // x -= x_step, y += y_step until the (x_floor)P(y_cap)Q cycle runs.
  int bursty_x_start = 500;
  int bursty_x_step = 10;
  int bursty_x_floor = 1;
  int bursty_y_start = 1;
  int bursty_y_step = 5;
  int bursty_y_cap = 250;

  static Mode mode_from_name(const std::string& name);
};

struct WorkloadEvent {
  enum class Kind { InsertPolicy, Query, DeletePolicy };
  int64_t seq = 0;
  Kind kind = Kind::Query;
  int cycle = 0;
  Policy policy;         // InsertPolicy
  std::string sql;       // Query
  QueryMetadata qm;      // Query
  PolicyId delete_id = 0;

  Json to_json() const;
  static WorkloadEvent from_json(const Json& j);
};

struct QueryInstance {
  std::string sql;
  QueryMetadata qm;
};

struct GeneratedWorkload {
  std::vector<Policy> policies;       // pool, ids preassigned
  std::vector<QueryInstance> queries; // pool
  std::vector<WorkloadEvent> events;
  std::set<std::string> queriers;
  int cycles = 0;
};

/// Discrete Zipf over ranks 1..n with the exact normalized pmf;
/// alpha = 0 degenerates to uniform.
class ZipfSampler {
 public:
  ZipfSampler(size_t n, double alpha);
  size_t draw(std::mt19937_64& rng) const;  // 0-based rank
  double pmf(size_t rank0) const;

 private:
  std::vector<double> cdf_;
};

/// Scenario-driven generator: samples users, emits per-user policies,
/// instantiates the three query templates, and interleaves everything into
/// steady / bursty / deletion event streams with the seen-unseen sliding
/// window. Deterministic under (spec, cfg, seed).
class WorkloadGenerator {
 public:
  WorkloadGenerator(ScenarioSpec spec, WorkloadConfig cfg);

  const ScenarioSpec& spec() const { return spec_; }

  std::vector<Policy> generate_policies();
  std::vector<QueryInstance> generate_queries();
  std::vector<WorkloadEvent> interleave(std::vector<Policy> policies,
                                        std::vector<QueryInstance> queries,
                                        int* cycles_out = nullptr);
  GeneratedWorkload generate();

  /// Synthetic WiFi-events relation (id, wifiAP, owner, time, date) with
  /// user-to-location affinity clustering, so policies share predicates the
  /// way the guard analysis expects.
  std::vector<Tuple> generate_data(size_t rows) const;

  /// First user id of each profile block; ids are dense integers.
  int first_faculty_id() const { return 1; }
  std::vector<int> querier_ids() const;

 private:
  struct ClassSlot {
    int faculty;
    int room;
    int start_hour;
  };

  void init_structure();
  const ClassSlot& student_class(int student_id, int which) const;
  int affinity_room(int user_id) const;

  ScenarioSpec spec_;
  WorkloadConfig cfg_;
  std::vector<ClassSlot> classes_;
  std::vector<int> holder_ids_;
  std::vector<int> querier_ids_;
  int location_base_ = 1000;
};

/// JSONL stream of workload events.
void write_workload(std::ostream& out, const GeneratedWorkload& wl);
std::vector<WorkloadEvent> read_workload(std::istream& in);

}  // namespace sieve
