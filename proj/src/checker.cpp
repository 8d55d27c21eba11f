#include "featcomp/checker.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

namespace featcomp {

// ---------------------------------------------------------------------------
// Oracle

namespace {

bool oracle_before(const SequencedRecord& a, const SequencedRecord& b) {
  if (a.record.priority.value != b.record.priority.value) {
    return a.record.priority.value > b.record.priority.value;
  }
  if (a.record.time.ms != b.record.time.ms) return a.record.time.ms > b.record.time.ms;
  return a.seq > b.seq;
}

// Current setting per (feature, priority): the latest record for the key,
// unless that record is dontCare.
std::vector<SequencedRecord> current_settings(const std::vector<SequencedRecord>& history, std::size_t n) {
  std::map<std::pair<std::string, std::int32_t>, const SequencedRecord*> latest;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = history[i];
    latest[{r.record.feature.name(), r.record.priority.value}] = &r;
  }
  std::vector<SequencedRecord> list;
  for (const auto& [_, r] : latest) {
    if (!r->record.setting.is_dont_care()) list.push_back(*r);
  }
  std::sort(list.begin(), list.end(), oracle_before);
  return list;
}

struct Step {
  SettingValue new_set;
  std::vector<FeatureKey> in_force;
  std::optional<Value> command;
};

Step discrete_step(const std::vector<SequencedRecord>& list, const std::optional<Value>& old) {
  Step s;
  if (list.empty()) return s;
  const auto& head = list.front().record.setting;
  s.new_set = head;
  for (const auto& r : list) {
    if (r.record.setting == head) s.in_force.push_back({r.record.feature, r.record.priority});
  }
  Value target{head.as_discrete()->symbol};
  if (old != target) s.command = target;
  return s;
}

// Admissible values as an explicit membership table over the actuator range.
Step numeric_step(const std::vector<SequencedRecord>& list, const std::optional<Value>& old,
                  std::int64_t min, std::int64_t max) {
  Step s;
  if (list.empty()) return s;
  auto width = max - min + 1;
  if (width > 1000000) throw ContractViolation("oracle: numeric range too wide to tabulate");
  std::vector<char> allowed(static_cast<std::size_t>(width), 1);
  std::optional<Direction> preference;
  for (const auto& r : list) {
    const auto& setting = r.record.setting;
    if (const auto* p = setting.as_prefer()) {
      if (!preference) preference = p->direction;
    } else {
      const auto* range = setting.as_range();
      bool meets = false;
      for (auto v = range->lo; v <= range->hi && !meets; ++v) meets = allowed[v - min] != 0;
      if (!meets) continue;
      for (std::int64_t v = min; v <= max; ++v) {
        if (v < range->lo || v > range->hi) allowed[v - min] = 0;
      }
    }
    s.in_force.push_back({r.record.feature, r.record.priority});
  }
  std::int64_t lowest = max + 1;
  std::int64_t highest = min - 1;
  for (std::int64_t v = min; v <= max; ++v) {
    if (allowed[v - min]) {
      lowest = std::min(lowest, v);
      highest = std::max(highest, v);
    }
  }
  if (preference) {
    auto pick = *preference == Direction::Lowest ? lowest : highest;
    lowest = highest = pick;
  }
  s.new_set = SettingValue::range(lowest, highest);

  if (old) {
    auto o = std::get<std::int64_t>(*old);
    if (o >= lowest && o <= highest) return s;
    std::int64_t best = lowest;
    for (auto v = lowest; v <= highest; ++v) {
      if (std::llabs(v - o) < std::llabs(best - o)) best = v;
    }
    s.command = best;
  } else {
    s.command = lowest;
  }
  return s;
}

}  // namespace

OracleResult oracle_resolve(const std::vector<SequencedRecord>& history, const ActuatorSpec& actuator,
                            std::optional<Value> initial) {
  OracleResult out;
  std::optional<Value> old = std::move(initial);
  for (std::size_t n = 1; n <= history.size(); ++n) {
    auto list = current_settings(history, n);
    Step step = actuator.is_numeric()
                    ? numeric_step(list, old, actuator.numeric_kind().min, actuator.numeric_kind().max)
                    : discrete_step(list, old);
    out.per_step.push_back(step.command);
    if (step.command) {
      out.commands.push_back(*step.command);
      old = step.command;
    }
    if (n == history.size()) {
      out.list = std::move(list);
      out.new_set = std::move(step.new_set);
      out.in_force = std::move(step.in_force);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scope plumbing

void Scope::validate() const {
  if (features < 1 || priorities < 1 || settings < 1 || records < 1) {
    throw ContractViolation("scope fields must all be >= 1");
  }
  if (features > 9 || settings > 9) throw ContractViolation("scope supports at most 9 features and 9 settings");
}

std::string Scope::to_string() const {
  return "(" + std::to_string(features) + "," + std::to_string(priorities) + "," + std::to_string(settings) + "," +
         std::to_string(records) + ")";
}

double estimate_sequences(const Scope& scope, TimestampMode mode) {
  double per_record = double(scope.features) * scope.priorities * (scope.settings + 1);
  double total = 0;
  for (int n = 1; n <= scope.records; ++n) {
    double count = std::pow(per_record, n);
    if (mode == TimestampMode::Shared) count *= std::pow(2.0, n - 1);
    total += count;
  }
  return total;
}

bool CheckViolation::violates(std::string_view property) const {
  return std::find(properties.begin(), properties.end(), property) != properties.end();
}

ActuatorSpec scope_actuator(const Scope& scope) {
  std::vector<std::string> symbols;
  for (int s = 0; s < scope.settings; ++s) symbols.push_back("s" + std::to_string(s));
  return ActuatorSpec::enumerated("act", std::move(symbols));
}

SettingRecord to_setting_record(const CompactRecord& r) {
  static const auto labels = [] {
    std::pair<std::vector<FeatureId>, std::vector<SettingValue>> t;
    for (int i = 0; i < 10; ++i) {
      t.first.emplace_back("F" + std::to_string(i));
      t.second.push_back(SettingValue::discrete("s" + std::to_string(i)));
    }
    return t;
  }();
  return SettingRecord{Timestamp{r.time}, labels.first.at(r.feature), Priority{r.priority},
                       r.setting < 0 ? SettingValue::dont_care() : labels.second.at(r.setting)};
}

namespace {

// Labels are one letter followed by one digit.
int index_of(std::string_view label) { return label[1] - '0'; }

}  // namespace

CoordinatorModel::CoordinatorModel(const Scope& scope) : coordinator_(scope_actuator(scope)) {}

std::optional<int> CoordinatorModel::apply(const CompactRecord& r) {
  auto out = coordinator_.process(to_setting_record(r), r.seq);
  if (out.commands.empty()) return std::nullopt;
  old_set_ = index_of(std::get<std::string>(out.commands.back().value));
  return old_set_;
}

void CoordinatorModel::listed(std::vector<CompactRecord>& out) const {
  for (const auto& l : coordinator_.records()) {
    const auto& rec = l.record();
    const auto* d = rec.setting.as_discrete();
    out.push_back({index_of(rec.feature.name()), rec.priority.value, d ? index_of(d->symbol) : -1, rec.time.ms,
                   l.entry.seq});
  }
}

std::string render(const std::vector<CompactRecord>& trace) {
  std::ostringstream os;
  for (const auto& r : trace) {
    os << "  #" << r.seq << " t=" << r.time << " F" << r.feature << "@" << r.priority << " "
       << (r.setting < 0 ? std::string("dontCare") : "s" + std::to_string(r.setting)) << "\n";
  }
  return os.str();
}

std::string render(const CheckReport& report) {
  std::ostringstream os;
  os << "scope " << report.scope.to_string() << " timestamps="
     << (report.options.timestamps == TimestampMode::Shared ? "shared" : "distinct")
     << " symmetry=" << (report.options.symmetry ? "on" : "off") << "\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", report.estimate);
  os << "estimated sequences: " << buf << "\n";
  if (report.refused) {
    std::snprintf(buf, sizeof buf, "%.3g", report.options.max_sequences);
    os << "refused: estimate exceeds limit " << buf << "\n";
    return os.str();
  }
  std::snprintf(buf, sizeof buf, "%.2f", report.seconds);
  os << "checked " << report.nodes << " prefixes in " << buf << " s\n";
  if (!report.violation) {
    os << "result: PASS\n";
    return os.str();
  }
  const auto& v = *report.violation;
  os << "result: FAIL\n" << "violated:";
  for (const auto& p : v.properties) os << " " << p;
  os << "\n" << v.detail << "\ncounterexample:\n" << render(v.trace);
  return os.str();
}

// ---------------------------------------------------------------------------
// Per-step properties

namespace detail {

bool compact_before(const CompactRecord& a, const CompactRecord& b) {
  if (a.priority != b.priority) return a.priority > b.priority;
  if (a.time != b.time) return a.time > b.time;
  return a.seq > b.seq;
}

void compact_oracle(const std::vector<CompactRecord>& history, CompactOracle& o) {
  // Latest record per key, by scanning backwards.
  o.list.clear();
  for (auto it = history.rbegin(); it != history.rend(); ++it) {
    bool seen = false;
    for (auto jt = history.rbegin(); jt != it; ++jt) {
      if (jt->feature == it->feature && jt->priority == it->priority) {
        seen = true;
        break;
      }
    }
    if (!seen && it->setting >= 0) o.list.push_back(*it);
  }
  std::sort(o.list.begin(), o.list.end(), compact_before);
  o.target = o.list.empty() ? -1 : o.list.front().setting;
}

CompactOracle compact_oracle(const std::vector<CompactRecord>& history) {
  CompactOracle o;
  compact_oracle(history, o);
  return o;
}

namespace {

std::string show(std::optional<int> v) { return v ? "s" + std::to_string(*v) : std::string("none"); }

}  // namespace

std::vector<StepFailure> check_step(const std::vector<CompactRecord>& history,
                                    const std::vector<CompactRecord>& listed, std::optional<int> model_old,
                                    std::optional<int> model_cmd, std::optional<int> prev_old,
                                    std::optional<int> prev_cmd) {
  std::vector<StepFailure> failures;

  for (std::size_t i = 0; i + 1 < listed.size(); ++i) {
    if (!compact_before(listed[i], listed[i + 1])) {
      failures.push_back({"sortedness", "list entries " + std::to_string(i) + " and " + std::to_string(i + 1) +
                                            " are out of order"});
      break;
    }
  }
  for (const auto& r : listed) {
    if (r.setting < 0) {
      failures.push_back({"no-dontcare", "dontCare record held in the list"});
      break;
    }
  }
  for (std::size_t i = 0; i < listed.size(); ++i) {
    for (std::size_t j = i + 1; j < listed.size(); ++j) {
      if (listed[i].feature == listed[j].feature && listed[i].priority == listed[j].priority) {
        failures.push_back({"unique-keys", "two records for F" + std::to_string(listed[i].feature) + "@" +
                                               std::to_string(listed[i].priority)});
      }
    }
  }

  thread_local CompactOracle oracle;
  compact_oracle(history, oracle);
  std::optional<int> expected_cmd;
  if (oracle.target >= 0 && prev_old != oracle.target) expected_cmd = oracle.target;
  std::optional<int> expected_old = oracle.target >= 0 ? std::optional<int>(oracle.target) : prev_old;

  if (model_old != expected_old || (model_cmd && model_old != model_cmd)) {
    failures.push_back({"oldset-consistency", "oldSet is " + show(model_old) + ", expected " + show(expected_old)});
  }
  if (model_cmd && prev_cmd && *model_cmd == *prev_cmd) {
    failures.push_back({"no-repeated-command", "command " + show(model_cmd) + " sent twice in a row"});
  }
  if (listed != oracle.list || model_cmd != expected_cmd) {
    failures.push_back({"oracle-equivalence", "command " + show(model_cmd) + ", oracle expects " + show(expected_cmd) +
                                                  "; list size " + std::to_string(listed.size()) + " vs " +
                                                  std::to_string(oracle.list.size())});
  }

  for (const auto& r : listed) {
    if (r.setting < 0) continue;
    bool blocked = std::any_of(listed.begin(), listed.end(), [&](const CompactRecord& o) {
      return o.setting != r.setting && (o.priority > r.priority || (o.priority == r.priority && o.time >= r.time));
    });
    if (!blocked && model_old != r.setting) {
      failures.push_back({"behavior-theorem", "F" + std::to_string(r.feature) + "@" + std::to_string(r.priority) +
                                                  " s" + std::to_string(r.setting) +
                                                  " has no blocker but is not in force (real " + show(model_old) +
                                                  ")"});
      break;
    }
  }
  return failures;
}

CheckViolation make_violation(const std::vector<StepFailure>& failures, std::vector<CompactRecord> trace) {
  CheckViolation v;
  for (const auto& f : failures) v.properties.push_back(f.property);
  v.detail = failures.front().detail;
  v.trace = std::move(trace);
  return v;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Randomized differential testing

namespace {

std::string describe(const std::vector<SequencedRecord>& history, const std::optional<Value>& initial) {
  std::ostringstream os;
  os << "initial=" << (initial ? to_string(*initial) : std::string("none"));
  for (const auto& h : history) {
    os << " | #" << h.seq << " t=" << h.record.time.ms << " " << to_string(h.record.key()) << " "
       << to_string(h.record.setting);
  }
  return os.str();
}

bool same_list(const std::vector<ListedRecord>& a, const std::vector<SequencedRecord>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a[i].entry;
    const auto& y = b[i];
    if (x.seq != y.seq || !(x.record.key() == y.record.key()) || x.record.setting != y.record.setting ||
        x.record.time != y.record.time) {
      return false;
    }
  }
  return true;
}

bool same_keys(std::vector<FeatureKey> a, std::vector<FeatureKey> b) {
  auto by_text = [](const FeatureKey& x, const FeatureKey& y) { return to_string(x) < to_string(y); };
  std::sort(a.begin(), a.end(), by_text);
  std::sort(b.begin(), b.end(), by_text);
  return a == b;
}

// Folds the history through the coordinator and compares with the oracle.
bool differential(const std::vector<SequencedRecord>& history, const ActuatorSpec& actuator,
                  const std::optional<Value>& initial, FuzzReport& report, bool helly) {
  Coordinator c(actuator, initial);
  std::vector<std::optional<Value>> per_step;
  for (const auto& h : history) {
    auto out = c.process(h.record, h.seq);
    per_step.push_back(out.commands.empty() ? std::nullopt : std::optional<Value>(out.commands.back().value));

    if (helly) {
      auto res = c.choose_setting();
      std::vector<Range> admitted;
      for (const auto& l : c.records()) {
        const auto* r = l.record().setting.as_range();
        if (!r) continue;
        bool meets_all = std::all_of(admitted.begin(), admitted.end(), [&](const Range& a) {
          return std::max(a.lo, r->lo) <= std::min(a.hi, r->hi);
        });
        bool in_force = res.is_in_force(l.record().key());
        ++report.helly_checks;
        if (meets_all && !in_force) return false;
        if (in_force) admitted.push_back(*r);
      }
    }
  }
  auto oracle = oracle_resolve(history, actuator, initial);
  if (per_step != oracle.per_step) return false;
  if (!same_list(c.records(), oracle.list)) return false;
  auto res = c.choose_setting();
  return res.new_set == oracle.new_set && same_keys(res.in_force, oracle.in_force);
}

template <class MakeSetting>
std::vector<SequencedRecord> random_history(std::mt19937_64& rng, int max_records, int features,
                                            const std::vector<std::int32_t>& priorities, MakeSetting make) {
  std::uniform_int_distribution<int> count(1, max_records);
  std::uniform_int_distribution<int> feature(0, features - 1);
  std::uniform_int_distribution<std::size_t> priority(0, priorities.size() - 1);
  std::uniform_int_distribution<int> advance(0, 2);
  std::vector<SequencedRecord> history;
  std::int64_t t = 0;
  int n = count(rng);
  for (int i = 0; i < n; ++i) {
    t += advance(rng);
    history.push_back({SettingRecord{Timestamp{t}, FeatureId("F" + std::to_string(feature(rng))),
                                     Priority{priorities[priority(rng)]}, make(rng)},
                       static_cast<std::uint64_t>(i + 1)});
  }
  return history;
}

void note_failure(FuzzReport& report, const std::string& text) {
  ++report.mismatches;
  if (report.failures.size() < 5) report.failures.push_back(text);
}

}  // namespace

FuzzReport fuzz_discrete(const FuzzOptions& options) {
  const std::vector<ActuatorSpec> actuators{
      ActuatorSpec::enumerated("doorLock", {"locked", "unlocked"}),
      ActuatorSpec::enumerated("furnace", {"on", "off"}),
      ActuatorSpec::enumerated("mode", {"a", "b", "c"}),
  };
  const std::vector<std::int32_t> priority_pool{10, 20, 30, 40, 40, 50};
  std::mt19937_64 rng(options.seed);
  FuzzReport report;
  std::uniform_int_distribution<std::size_t> which(0, actuators.size() - 1);
  std::uniform_int_distribution<int> features(1, 4);
  std::uniform_int_distribution<int> priorities(1, 3);
  std::bernoulli_distribution dont_care(0.25);
  std::bernoulli_distribution has_initial(0.5);

  for (int h = 0; h < options.histories; ++h) {
    const auto& act = actuators[which(rng)];
    const auto& symbols = act.enumerated_kind().symbols;
    std::uniform_int_distribution<std::size_t> symbol(0, symbols.size() - 1);
    std::vector<std::int32_t> pool;
    std::sample(priority_pool.begin(), priority_pool.end(), std::back_inserter(pool), priorities(rng), rng);
    auto history = random_history(rng, options.max_records, features(rng), pool, [&](std::mt19937_64& g) {
      return dont_care(g) ? SettingValue::dont_care() : SettingValue::discrete(symbols[symbol(g)]);
    });
    std::optional<Value> initial;
    if (has_initial(rng)) initial = Value{symbols[symbol(rng)]};
    ++report.histories;
    if (!differential(history, act, initial, report, false)) note_failure(report, describe(history, initial));
  }
  return report;
}

FuzzReport fuzz_numeric(const FuzzOptions& options) {
  std::mt19937_64 rng(options.seed);
  FuzzReport report;
  std::uniform_int_distribution<std::int64_t> upper(3, 30);
  std::uniform_int_distribution<int> features(1, 4);
  std::uniform_int_distribution<int> kind(0, 99);
  std::bernoulli_distribution has_initial(0.5);
  const std::vector<std::int32_t> priority_pool{10, 20, 20, 30, 40};

  for (int h = 0; h < options.histories; ++h) {
    const std::int64_t max = upper(rng);
    auto act = ActuatorSpec::numeric("level", 0, max);
    std::uniform_int_distribution<std::int64_t> value(0, max);
    auto history = random_history(rng, options.max_records, features(rng), priority_pool, [&](std::mt19937_64& g) {
      int k = kind(g);
      if (k < 20) return SettingValue::dont_care();
      if (k < 30) return SettingValue::prefer(k < 25 ? Direction::Lowest : Direction::Highest);
      if (k < 45) return SettingValue::single(value(g));
      auto a = value(g);
      auto b = value(g);
      return SettingValue::range(std::min(a, b), std::max(a, b));
    });
    std::optional<Value> initial;
    if (has_initial(rng)) initial = Value{value(rng)};
    ++report.histories;
    if (!differential(history, act, initial, report, true)) note_failure(report, describe(history, initial));
  }
  return report;
}

std::string render(const FuzzReport& report, std::string_view label) {
  std::ostringstream os;
  os << label << ": " << report.histories << " histories, " << report.mismatches << " mismatches";
  if (report.helly_checks) os << ", " << report.helly_checks << " admission checks";
  os << "\n";
  for (const auto& f : report.failures) os << "  " << f << "\n";
  return os.str();
}

}  // namespace featcomp
