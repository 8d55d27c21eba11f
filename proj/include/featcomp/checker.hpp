#pragma once

// Verification harness: a from-scratch resolution oracle and a bounded
// exhaustive explorer of coordinator input sequences. Nothing here calls into
// the coordinator's resolution code; the coordinator is only driven through a
// model adapter.

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "featcomp/coordinator.hpp"
#include "featcomp/types.hpp"

namespace featcomp {

// ---------------------------------------------------------------------------
// Oracle

struct OracleResult {
  std::vector<SequencedRecord> list;          // current settings in list order
  SettingValue new_set;                       // dontCare when the list is empty
  std::vector<FeatureKey> in_force;
  std::vector<std::optional<Value>> per_step;  // command emitted after each record
  std::vector<Value> commands;                 // per_step without the gaps
};

/// Recomputes everything from the history alone: current settings, list
/// order, resolution, and the command stream obtained by replaying every
/// prefix. `history` must be in seq order.
OracleResult oracle_resolve(const std::vector<SequencedRecord>& history, const ActuatorSpec& actuator,
                            std::optional<Value> initial = std::nullopt);

// ---------------------------------------------------------------------------
// Exhaustive checking over small scopes

struct Scope {
  int features = 1;
  int priorities = 1;
  int settings = 1;  // discrete values; dontCare comes on top
  int records = 1;

  void validate() const;  // throws ContractViolation unless every field >= 1
  std::string to_string() const;
};

enum class TimestampMode {
  Distinct,  // record i carries time i
  Shared,    // each record either repeats the previous time or advances by one
};

struct CheckOptions {
  TimestampMode timestamps = TimestampMode::Distinct;
  bool symmetry = true;  // canonical feature/setting labels
  double max_sequences = 1e10;
};

/// Compact record used by the explorer. setting == -1 is dontCare.
struct CompactRecord {
  int feature = 0;
  int priority = 0;
  int setting = -1;
  std::int64_t time = 0;
  std::uint64_t seq = 0;

  friend bool operator==(const CompactRecord&, const CompactRecord&) = default;
};

struct CheckViolation {
  std::vector<std::string> properties;  // every property violated at the last step
  std::string detail;                   // description of the first one
  std::vector<CompactRecord> trace;

  bool violates(std::string_view property) const;
};

struct CheckReport {
  Scope scope;
  CheckOptions options;
  double estimate = 0;  // raw sequence count before symmetry reduction
  bool refused = false;
  std::uint64_t nodes = 0;  // prefixes checked
  std::optional<CheckViolation> violation;
  double seconds = 0;

  bool passed() const { return !refused && !violation; }
};

/// Raw count of input sequences of length 1..records.
double estimate_sequences(const Scope& scope, TimestampMode mode);

std::string render(const CheckReport& report);
std::string render(const std::vector<CompactRecord>& trace);

/// Actuator, features and settings named for a scope: features F0.., settings
/// s0.., priorities 0.., one enumerated actuator "act".
ActuatorSpec scope_actuator(const Scope& scope);
SettingRecord to_setting_record(const CompactRecord& r);

/// Model adapter for the production coordinator.
class CoordinatorModel {
 public:
  explicit CoordinatorModel(const Scope& scope);

  std::optional<int> apply(const CompactRecord& r);
  void listed(std::vector<CompactRecord>& out) const;
  std::optional<int> old_set() const { return old_set_; }

 private:
  Coordinator coordinator_;
  std::optional<int> old_set_;
};

namespace detail {

/// Integer oracle state for one prefix, recomputed from scratch.
struct CompactOracle {
  std::vector<CompactRecord> list;
  int target = -1;  // head setting, -1 when empty
};

CompactOracle compact_oracle(const std::vector<CompactRecord>& history);
void compact_oracle(const std::vector<CompactRecord>& history, CompactOracle& out);
bool compact_before(const CompactRecord& a, const CompactRecord& b);

struct StepFailure {
  std::string property;
  std::string detail;
};

/// Checks every property after one step; returns all failures.
std::vector<StepFailure> check_step(
    const std::vector<CompactRecord>& history, const std::vector<CompactRecord>& listed,
    std::optional<int> model_old, std::optional<int> model_cmd, std::optional<int> prev_old,
    std::optional<int> prev_cmd);

CheckViolation make_violation(const std::vector<StepFailure>& failures, std::vector<CompactRecord> trace);

}  // namespace detail

/// Feeds a trace through a fresh model and re-checks each step. Returns the
/// first violation, if any.
template <class Model>
std::optional<CheckViolation> replay(const Scope& scope, const std::vector<CompactRecord>& trace) {
  Model model(scope);
  std::vector<CompactRecord> history;
  std::vector<CompactRecord> listed;
  std::optional<int> old;
  std::optional<int> last_cmd;
  for (const auto& r : trace) {
    history.push_back(r);
    auto cmd = model.apply(r);
    listed.clear();
    model.listed(listed);
    auto bad = detail::check_step(history, listed, model.old_set(), cmd, old, last_cmd);
    if (!bad.empty()) return detail::make_violation(bad, history);
    if (cmd) last_cmd = cmd;
    old = model.old_set();
  }
  return std::nullopt;
}

namespace detail {

template <class Model>
class Explorer {
 public:
  Explorer(const Scope& scope, const CheckOptions& options, CheckReport& report)
      : scope_(scope), options_(options), report_(report), limit_(scope.records) {}

  void run() {
    // One reusable model per depth: copy-assignment keeps buffer capacity.
    slots_.assign(static_cast<std::size_t>(scope_.records) + 1, Model(scope_));
    history_.reserve(scope_.records);
    visit(slots_[0], 0, 0, 0, std::nullopt, std::nullopt);
  }

 private:
  void visit(const Model& model, int depth, int features_used, int settings_used, std::optional<int> old,
             std::optional<int> last_cmd) {
    if (depth >= limit_) return;
    const int feature_choices = options_.symmetry ? std::min(features_used + 1, scope_.features) : scope_.features;
    const int setting_choices = options_.symmetry ? std::min(settings_used + 1, scope_.settings) : scope_.settings;
    const std::int64_t prev_time = history_.empty() ? 0 : history_.back().time;
    const int time_choices = (options_.timestamps == TimestampMode::Shared && depth > 0) ? 2 : 1;

    for (int tc = 0; tc < time_choices; ++tc) {
      std::int64_t time = options_.timestamps == TimestampMode::Distinct
                              ? depth + 1
                              : (depth == 0 ? 1 : prev_time + tc);
      for (int f = 0; f < feature_choices; ++f) {
        for (int p = 0; p < scope_.priorities; ++p) {
          for (int s = -1; s < setting_choices; ++s) {
            if (depth >= limit_) return;
            CompactRecord r{f, p, s, time, static_cast<std::uint64_t>(depth + 1)};
            history_.push_back(r);
            Model& next = slots_[depth + 1];
            next = model;
            auto cmd = next.apply(r);
            listed_.clear();
            next.listed(listed_);
            ++report_.nodes;
            auto bad = check_step(history_, listed_, next.old_set(), cmd, old, last_cmd);
            if (!bad.empty()) {
              report_.violation = make_violation(bad, history_);
              limit_ = depth;  // only shorter counterexamples from here on
            } else {
              visit(next, depth + 1, std::max(features_used, f + 1), std::max(settings_used, s + 1),
                    next.old_set(), cmd ? cmd : last_cmd);
            }
            history_.pop_back();
          }
        }
      }
    }
  }

  const Scope& scope_;
  const CheckOptions& options_;
  CheckReport& report_;
  int limit_;
  std::vector<Model> slots_;
  std::vector<CompactRecord> history_;
  std::vector<CompactRecord> listed_;
};

}  // namespace detail

/// Enumerates every input sequence (up to symmetry) of length 1..records over
/// the scope and checks list sortedness, absence of dontCare, key uniqueness,
/// oldSet consistency, no repeated commands, oracle equivalence and the
/// Behavior Theorem after every step. Refuses scopes whose raw estimate
/// exceeds options.max_sequences. A reported counterexample is the shortest
/// one found.
template <class Model = CoordinatorModel>
CheckReport exhaustive_check(const Scope& scope, const CheckOptions& options = {}) {
  scope.validate();
  CheckReport report;
  report.scope = scope;
  report.options = options;
  report.estimate = estimate_sequences(scope, options.timestamps);
  if (report.estimate > options.max_sequences) {
    report.refused = true;
    return report;
  }
  auto start = std::chrono::steady_clock::now();
  detail::Explorer<Model>(scope, options, report).run();
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

// ---------------------------------------------------------------------------
// Randomized differential testing

struct FuzzOptions {
  std::uint64_t seed = 1;
  int histories = 10000;
  int max_records = 8;
};

struct FuzzReport {
  int histories = 0;
  int mismatches = 0;
  int helly_checks = 0;
  std::vector<std::string> failures;  // first few mismatches, rendered

  bool passed() const { return mismatches == 0; }
};

/// Random histories over enumerated actuators shaped like the example packs,
/// folded through Coordinator::process and compared with oracle_resolve.
FuzzReport fuzz_discrete(const FuzzOptions& options);
/// Random Range/Prefer/dontCare histories over numeric actuators. Also checks
/// that a range meeting every earlier admitted range is admitted.
FuzzReport fuzz_numeric(const FuzzOptions& options);

std::string render(const FuzzReport& report, std::string_view label);

}  // namespace featcomp
