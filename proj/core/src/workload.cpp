#include "sieve/workload.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <ostream>

namespace sieve {

namespace {

constexpr const char* kTermStart = "2018-02-01";
constexpr const char* kTermEnd = "2018-04-30";
constexpr int kClassHours[] = {8, 10, 12, 14, 16};

int64_t term_start_days() {
  static const int64_t v = Value::parse_date(kTermStart).as_date().days;
  return v;
}

int64_t term_end_days() {
  static const int64_t v = Value::parse_date(kTermEnd).as_date().days;
  return v;
}

Value date_value(int64_t days) {
  return Value::date(DateValue{days});
}

Value time_value(int hour, int minute = 0, int second = 0) {
  return Value::time(TimeValue{hour * 3600 + minute * 60 + second});
}

uint64_t mix_seed(uint64_t seed, uint64_t stream) {
  return seed * 0x9e3779b97f4a7c15ULL + stream;
}

}  // namespace

Scenario scenario_from_name(const std::string& name) {
  if (name == "attendance" || name == "marking_attendance")
    return Scenario::MarkingAttendance;
  if (name == "space" || name == "space_usage")
    return Scenario::SpaceUsage;
  throw ParseError("unknown scenario '" + name + "'");
}

std::string_view scenario_name(Scenario s) {
  return s == Scenario::MarkingAttendance ? "attendance" : "space_usage";
}

ScenarioSpec ScenarioSpec::attendance(bool desk_scale) {
  ScenarioSpec spec;
  spec.scenario = Scenario::MarkingAttendance;
  if (desk_scale) {
    spec.graduate = 139;
    spec.undergrad = 176;
    spec.faculty = 39;
  } else {
    spec.graduate = 1394;
    spec.undergrad = 1758;
    spec.faculty = 388;
  }
  return spec;
}

ScenarioSpec ScenarioSpec::space_usage(bool desk_scale) {
  ScenarioSpec spec;
  spec.scenario = Scenario::SpaceUsage;
  if (desk_scale) {
    spec.visitor = 3180;
    spec.staff = 103;
    spec.graduate = 143;
    spec.undergrad = 180;
    spec.faculty = 39;
  } else {
    spec.visitor = 31796;
    spec.staff = 1029;
    spec.graduate = 1428;
    spec.undergrad = 1795;
    spec.faculty = 388;
  }
  return spec;
}

std::string ScenarioSpec::purpose() const {
  return scenario == Scenario::MarkingAttendance ? "marking attendance"
                                                 : "space-utilization";
}

int ScenarioSpec::total_users() const {
  return visitor + staff + graduate + undergrad + faculty;
}

int ScenarioSpec::policy_holder_count() const {
  return scenario == Scenario::MarkingAttendance ? graduate + undergrad
                                                 : total_users();
}

int ScenarioSpec::querier_count() const {
  return scenario == Scenario::MarkingAttendance ? faculty : faculty + staff;
}

int64_t ScenarioSpec::total_policies() const {
  return static_cast<int64_t>(policy_holder_count()) * policies_per_user;
}

int64_t ScenarioSpec::total_queries() const {
  return total_policies() / 2;
}

WorkloadConfig::Mode WorkloadConfig::mode_from_name(const std::string& name) {
  if (name == "steady") return Mode::Steady;
  if (name == "bursty") return Mode::Bursty;
  if (name == "deletion") return Mode::Deletion;
  throw ParseError("unknown workload mode '" + name + "'");
}

Json WorkloadEvent::to_json() const {
  Json j;
  j["seq"] = seq;
  switch (kind) {
    case Kind::InsertPolicy:
      j["kind"] = "insert_policy";
      break;
    case Kind::Query:
      j["kind"] = "query";
      break;
    case Kind::DeletePolicy:
      j["kind"] = "delete_policy";
      break;
  }
  j["cycle"] = cycle;
  if (kind == Kind::InsertPolicy) j["policy"] = policy_to_json(policy);
  if (kind == Kind::Query) {
    j["sql"] = sql;
    j["querier"] = qm.querier;
    j["purpose"] = qm.purpose;
  }
  if (kind == Kind::DeletePolicy) j["policy_id"] = delete_id;
  return j;
}

WorkloadEvent WorkloadEvent::from_json(const Json& j) {
  WorkloadEvent ev;
  ev.seq = j.at("seq").get<int64_t>();
  ev.cycle = j.value("cycle", 0);
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "insert_policy") {
    ev.kind = Kind::InsertPolicy;
    ev.policy = policy_from_json(j.at("policy"));
  } else if (kind == "query") {
    ev.kind = Kind::Query;
    ev.sql = j.at("sql").get<std::string>();
    ev.qm = QueryMetadata{j.at("querier").get<std::string>(),
                          j.at("purpose").get<std::string>()};
  } else if (kind == "delete_policy") {
    ev.kind = Kind::DeletePolicy;
    ev.delete_id = j.at("policy_id").get<PolicyId>();
  } else {
    throw ParseError("unknown workload event kind '" + kind + "'");
  }
  return ev;
}

ZipfSampler::ZipfSampler(size_t n, double alpha) {
  if (n == 0) throw ContractViolation("Zipf sampler needs a nonempty domain");
  cdf_.resize(n);
  double total = 0;
  for (size_t r = 0; r < n; ++r) {
    total += std::pow(static_cast<double>(r + 1), -alpha);
    cdf_[r] = total;
  }
  for (auto& c : cdf_) c /= total;
  cdf_.back() = 1.0;
}

size_t ZipfSampler::draw(std::mt19937_64& rng) const {
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  return static_cast<size_t>(
      std::lower_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin());
}

double ZipfSampler::pmf(size_t rank0) const {
  double lo = rank0 == 0 ? 0.0 : cdf_[rank0 - 1];
  return cdf_[rank0] - lo;
}

WorkloadGenerator::WorkloadGenerator(ScenarioSpec spec, WorkloadConfig cfg)
    : spec_(std::move(spec)), cfg_(cfg) {
  init_structure();
}

void WorkloadGenerator::init_structure() {
  // Dense id blocks: faculty, staff, graduate, undergrad, visitor.
  int next = 1;
  std::vector<int> faculty, staff, graduate, undergrad, visitor;
  for (int i = 0; i < spec_.faculty; ++i) faculty.push_back(next++);
  for (int i = 0; i < spec_.staff; ++i) staff.push_back(next++);
  for (int i = 0; i < spec_.graduate; ++i) graduate.push_back(next++);
  for (int i = 0; i < spec_.undergrad; ++i) undergrad.push_back(next++);
  for (int i = 0; i < spec_.visitor; ++i) visitor.push_back(next++);

  classes_.clear();
  for (int f = 0; f < spec_.faculty; ++f) {
    for (int c = 0; c < spec_.classes_per_faculty; ++c) {
      int idx = f * spec_.classes_per_faculty + c;
      classes_.push_back(ClassSlot{faculty[f], location_base_ + idx,
                                   kClassHours[idx % 5]});
    }
  }

  holder_ids_.clear();
  if (spec_.scenario == Scenario::MarkingAttendance) {
    holder_ids_.insert(holder_ids_.end(), graduate.begin(), graduate.end());
    holder_ids_.insert(holder_ids_.end(), undergrad.begin(), undergrad.end());
    querier_ids_ = faculty;
  } else {
    holder_ids_.insert(holder_ids_.end(), visitor.begin(), visitor.end());
    holder_ids_.insert(holder_ids_.end(), staff.begin(), staff.end());
    holder_ids_.insert(holder_ids_.end(), graduate.begin(), graduate.end());
    holder_ids_.insert(holder_ids_.end(), undergrad.begin(), undergrad.end());
    holder_ids_.insert(holder_ids_.end(), faculty.begin(), faculty.end());
    querier_ids_ = faculty;
    querier_ids_.insert(querier_ids_.end(), staff.begin(), staff.end());
  }
}

std::vector<int> WorkloadGenerator::querier_ids() const {
  return querier_ids_;
}

const WorkloadGenerator::ClassSlot& WorkloadGenerator::student_class(
    int student_id, int which) const {
  // Round robin over class slots so every faculty member ends up with
  // students (hence with policies naming them as querier).
  auto rank = static_cast<size_t>(student_id);
  size_t idx =
      (rank * static_cast<size_t>(spec_.classes_per_student) +
       static_cast<size_t>(which)) %
      classes_.size();
  return classes_[idx];
}

int WorkloadGenerator::affinity_room(int user_id) const {
  return location_base_ +
         static_cast<int>(static_cast<size_t>(user_id) % classes_.size());
}

std::vector<Policy> WorkloadGenerator::generate_policies() {
  std::mt19937_64 rng(mix_seed(cfg_.seed, 1));
  std::vector<Policy> out;
  out.reserve(static_cast<size_t>(spec_.total_policies()));
  PolicyId next_id = 1;
  const int64_t term_lo = term_start_days();
  const int64_t term_hi = term_end_days();
  size_t querier_rr = 0;

  for (int holder : holder_ids_) {
    for (int i = 0; i < spec_.policies_per_user; ++i) {
      Policy p;
      p.id = next_id++;
      p.relation = spec_.relation;
      p.owner = std::to_string(holder);
      p.purpose = spec_.purpose();

      int64_t date_lo = term_lo;
      int64_t date_hi = term_hi;
      int room;
      int hour_lo;
      int hour_hi;

      if (spec_.scenario == Scenario::MarkingAttendance) {
        const ClassSlot& cls =
            student_class(holder, i % spec_.classes_per_student);
        p.querier = std::to_string(cls.faculty);
        room = cls.room;
        hour_lo = cls.start_hour;
        hour_hi = cls.start_hour + 2;
        switch (rng() % 10) {
          case 6:
          case 7:  // late enrollment
            date_lo = term_lo + 7 + static_cast<int64_t>(rng() % 22);
            break;
          case 8:  // early drop
            date_hi = term_hi - 7 - static_cast<int64_t>(rng() % 22);
            break;
          case 9: {  // guest lecture, a day or two
            date_lo = term_lo + static_cast<int64_t>(rng() % 80);
            date_hi = date_lo + static_cast<int64_t>(rng() % 2);
            break;
          }
          default:
            break;
        }
      } else {
        // Staff and faculty monitor spaces; every querier gets at least one
        // policy before the rest are drawn at random.
        int querier = querier_rr < querier_ids_.size()
                          ? querier_ids_[querier_rr++]
                          : querier_ids_[rng() % querier_ids_.size()];
        p.querier = std::to_string(querier);
        room = rng() % 10 < 8
                   ? affinity_room(holder)
                   : location_base_ + static_cast<int>(rng() % classes_.size());
        // Hours depend on how the holder uses the space.
        int block = static_cast<int>(rng() % 4);
        hour_lo = 8 + block * 3;
        hour_hi = std::min(23, hour_lo + 3 + static_cast<int>(rng() % 6));
        date_lo = term_lo + static_cast<int64_t>(rng() % 45);
        date_hi = std::min<int64_t>(
            term_hi, date_lo + 14 + static_cast<int64_t>(rng() % 31));
      }

      p.object_conditions.push_back(
          ObjectCondition::eq("owner", Value::integer(holder)));
      p.object_conditions.push_back(
          ObjectCondition::range("date", CompareOp::Ge, date_value(date_lo),
                                 CompareOp::Le, date_value(date_hi)));
      p.object_conditions.push_back(
          ObjectCondition::range("time", CompareOp::Ge, time_value(hour_lo),
                                 CompareOp::Le, time_value(hour_hi)));
      p.object_conditions.push_back(
          ObjectCondition::eq("wifiAP", Value::integer(room)));
      out.push_back(std::move(p));
    }
  }
  return out;
}

std::vector<QueryInstance> WorkloadGenerator::generate_queries() {
  std::mt19937_64 rng(mix_seed(cfg_.seed, 2));
  ZipfSampler querier_sampler(querier_ids_.size(), cfg_.zipf_alpha);
  const int64_t term_lo = term_start_days();

  std::vector<QueryInstance> out;
  auto count = static_cast<size_t>(spec_.total_queries());
  out.reserve(count);

  for (size_t qi = 0; qi < count; ++qi) {
    int querier = querier_ids_[querier_sampler.draw(rng)];
    QueryInstance inst;
    inst.qm = QueryMetadata{std::to_string(querier), spec_.purpose()};

    // Date window inside the term, time window around class hours.
    int64_t d_lo = term_lo + static_cast<int64_t>(rng() % 60);
    int64_t d_hi = d_lo + 7 + static_cast<int64_t>(rng() % 24);
    int hour = kClassHours[rng() % 5];
    std::string time_lo = time_value(hour).to_string();
    std::string time_hi = time_value(std::min(23, hour + 2)).to_string();
    std::string date_lo = date_value(d_lo).to_string();
    std::string date_hi = date_value(d_hi).to_string();

    switch (rng() % 3) {
      case 0: {  // location based
        int room_count = 1 + static_cast<int>(rng() % 2);
        std::string rooms;
        for (int r = 0; r < room_count; ++r) {
          if (r) rooms += ", ";
          int room;
          if (spec_.scenario == Scenario::MarkingAttendance) {
            // One of the querier's own classrooms.
            int fidx = querier - 1;
            room = location_base_ + fidx * spec_.classes_per_faculty +
                   static_cast<int>(rng() % spec_.classes_per_faculty);
          } else {
            room = location_base_ + static_cast<int>(rng() % classes_.size());
          }
          rooms += std::to_string(room);
        }
        inst.sql = "SELECT * FROM " + spec_.relation + " AS W WHERE W.wifiAP IN (" +
                   rooms + ") AND W.time BETWEEN '" + time_lo + "' AND '" +
                   time_hi + "' AND W.date BETWEEN '" + date_lo + "' AND '" +
                   date_hi + "'";
        break;
      }
      case 1: {  // user specific
        int user_count = 2 + static_cast<int>(rng() % 3);
        std::string users;
        for (int u = 0; u < user_count; ++u) {
          if (u) users += ", ";
          users += std::to_string(holder_ids_[rng() % holder_ids_.size()]);
        }
        inst.sql = "SELECT * FROM " + spec_.relation + " AS W WHERE W.owner IN (" +
                   users + ") AND W.time BETWEEN '" + time_lo + "' AND '" +
                   time_hi + "' AND W.date BETWEEN '" + date_lo + "' AND '" +
                   date_hi + "'";
        break;
      }
      default: {  // aggregated presence counts per location
        inst.sql = "SELECT W.wifiAP, COUNT(*) FROM " + spec_.relation +
                   " AS W WHERE W.time BETWEEN '" + time_lo + "' AND '" +
                   time_hi + "' AND W.date BETWEEN '" + date_lo + "' AND '" +
                   date_hi + "' GROUP BY W.wifiAP";
        break;
      }
    }
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<WorkloadEvent> WorkloadGenerator::interleave(
    std::vector<Policy> policies, std::vector<QueryInstance> queries,
    int* cycles_out) {
  std::mt19937_64 rng(mix_seed(cfg_.seed, 3));
  // Decorrelate per-holder policy blocks and the query pool.
  std::shuffle(policies.begin(), policies.end(), rng);
  std::shuffle(queries.begin(), queries.end(), rng);

  std::vector<WorkloadEvent> events;
  std::deque<QueryInstance> window;
  std::vector<PolicyId> live;
  size_t policy_idx = 0;
  size_t query_idx = 0;
  int64_t seq = 0;
  int64_t query_slots = 0;
  int cycle = 0;

  auto emit_insert = [&](int c) {
    WorkloadEvent ev;
    ev.seq = ++seq;
    ev.kind = WorkloadEvent::Kind::InsertPolicy;
    ev.cycle = c;
    ev.policy = policies[policy_idx++];
    live.push_back(ev.policy.id);
    events.push_back(std::move(ev));
  };

  auto emit_query = [&](int c) {
    // Alternate unseen pool draws with replays from the sliding window.
    bool want_seen = (query_slots++ % 2) == 1;
    QueryInstance inst;
    if (want_seen && !window.empty()) {
      inst = window[rng() % window.size()];
    } else if (query_idx < queries.size()) {
      inst = queries[query_idx++];
    } else if (!window.empty()) {
      inst = window[rng() % window.size()];
    } else {
      return false;
    }
    WorkloadEvent ev;
    ev.seq = ++seq;
    ev.kind = WorkloadEvent::Kind::Query;
    ev.cycle = c;
    ev.sql = inst.sql;
    ev.qm = inst.qm;
    events.push_back(std::move(ev));
    window.push_back(std::move(inst));
    while (window.size() > static_cast<size_t>(cfg_.window_size))
      window.pop_front();
    return true;
  };

  auto emit_delete = [&](int c) {
    if (live.empty()) return false;
    size_t pick = rng() % live.size();
    WorkloadEvent ev;
    ev.seq = ++seq;
    ev.kind = WorkloadEvent::Kind::DeletePolicy;
    ev.cycle = c;
    ev.delete_id = live[pick];
    live[pick] = live.back();
    live.pop_back();
    events.push_back(std::move(ev));
    return true;
  };

  if (cfg_.mode == WorkloadConfig::Mode::Bursty) {
    for (;; ++cycle) {
      int x = std::max(cfg_.bursty_x_floor,
                       cfg_.bursty_x_start - cycle * cfg_.bursty_x_step);
      int y = std::min(cfg_.bursty_y_cap,
                       cfg_.bursty_y_start + cycle * cfg_.bursty_y_step);
      if (policy_idx >= policies.size()) break;
      for (int i = 0; i < x && policy_idx < policies.size(); ++i)
        emit_insert(cycle);
      for (int i = 0; i < y; ++i)
        if (!emit_query(cycle)) break;
      if (x == cfg_.bursty_x_floor && y == cfg_.bursty_y_cap) {
        ++cycle;
        break;
      }
    }
  } else {
    const bool deletions = cfg_.mode == WorkloadConfig::Mode::Deletion;
    for (; policy_idx < policies.size(); ++cycle) {
      for (int i = 0; i < cfg_.x_policies && policy_idx < policies.size(); ++i)
        emit_insert(cycle);
      for (int i = 0; i < cfg_.y_queries; ++i)
        if (!emit_query(cycle)) break;
      if (deletions)
        for (int i = 0; i < cfg_.z_deletions; ++i)
          if (!emit_delete(cycle)) break;
    }
  }
  if (cycles_out) *cycles_out = cycle;
  return events;
}

GeneratedWorkload WorkloadGenerator::generate() {
  GeneratedWorkload wl;
  wl.policies = generate_policies();
  wl.queries = generate_queries();
  wl.events = interleave(wl.policies, wl.queries, &wl.cycles);
  for (int q : querier_ids_) wl.queriers.insert(std::to_string(q));
  return wl;
}

std::vector<Tuple> WorkloadGenerator::generate_data(size_t rows) const {
  std::mt19937_64 rng(mix_seed(cfg_.seed, 4));
  const int64_t term_lo = term_start_days();
  const int64_t term_days = term_end_days() - term_lo + 1;

  std::vector<Tuple> out;
  out.reserve(rows);
  for (size_t i = 0; i < rows; ++i) {
    int owner = holder_ids_[rng() % holder_ids_.size()];
    int room;
    int hour;
    if (rng() % 10 < 8) {
      // Affinity: people show up where their policies say they are.
      if (spec_.scenario == Scenario::MarkingAttendance) {
        const ClassSlot& cls = student_class(
            owner, static_cast<int>(rng() % spec_.classes_per_student));
        room = cls.room;
        hour = cls.start_hour + static_cast<int>(rng() % 2);
      } else {
        room = affinity_room(owner);
        hour = 8 + static_cast<int>(rng() % 12);
      }
    } else {
      room = location_base_ + static_cast<int>(rng() % classes_.size());
      hour = 7 + static_cast<int>(rng() % 14);
    }
    Tuple t;
    t.relation = spec_.relation;
    t.attrs.emplace("id", Value::integer(static_cast<int64_t>(i + 1)));
    t.attrs.emplace("wifiAP", Value::integer(room));
    t.attrs.emplace("owner", Value::integer(owner));
    t.attrs.emplace(
        "time", Value::time(TimeValue{hour * 3600 +
                                      static_cast<int64_t>(rng() % 7200)}));
    t.attrs.emplace(
        "date",
        Value::date(DateValue{term_lo + static_cast<int64_t>(rng()) %
                                            term_days}));
    out.push_back(std::move(t));
  }
  return out;
}

void write_workload(std::ostream& out, const GeneratedWorkload& wl) {
  for (const auto& ev : wl.events) out << to_jsonl_line(ev.to_json()) << '\n';
}

std::vector<WorkloadEvent> read_workload(std::istream& in) {
  std::vector<WorkloadEvent> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(WorkloadEvent::from_json(Json::parse(line)));
  }
  return out;
}

}  // namespace sieve
