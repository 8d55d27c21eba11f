#pragma once

// Per-actuator composition engine. A coordinator keeps the current settings
// of every (feature, priority) pair, chooses the real actuator setting by
// priority and recency, and emits a command only when the real setting must
// change.

#include <optional>
#include <string>
#include <vector>

#include "featcomp/types.hpp"

namespace featcomp {

/// Coordinator-side extensions carried alongside a setting record.
struct Annotation {
  std::optional<Timestamp> expires_at;
  bool immediate = false;

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct ListedRecord {
  SequencedRecord entry;
  Annotation annotation;

  const SettingRecord& record() const { return entry.record; }
};

/// Outcome of choosing a setting. `new_set` is DontCare, Discrete or Range.
struct Resolution {
  SettingValue new_set;
  std::vector<FeatureKey> in_force;  // list order

  bool is_in_force(const FeatureKey& key) const;
};

/// A timer the host must arm so that an expiring setting gets cancelled.
struct ExpiryTimer {
  FeatureKey key;
  Timestamp stamped;
  Timestamp fire_at;
};

struct Command {
  Timestamp time;
  Value value;
  std::vector<FeatureKey> by;  // settings in force when emitted
};

/// Everything a coordinator step asks its host to do.
struct Outcome {
  std::vector<Command> commands;
  std::vector<EventRecord> feedback;  // one per command, seq left to the engine
  std::vector<ExpiryTimer> timers;

  bool empty() const { return commands.empty() && timers.empty(); }
};

struct ExplainLine {
  FeatureKey key;
  SettingValue setting;
  Timestamp time;
  bool in_force = false;
  Annotation annotation;
  std::optional<FeatureKey> blocked_by;  // set when not in force
};

struct ExplainReport {
  std::string actuator;
  std::vector<ExplainLine> lines;
  std::optional<Value> holding;  // last value sent to the actuator
};

/// Text rendering, one string per line. An empty report yields a single
/// "actuator holds last value: <v>" line.
std::vector<std::string> render(const ExplainReport& report);

class Coordinator {
 public:
  explicit Coordinator(ActuatorSpec actuator, std::optional<Value> initial = std::nullopt,
                       std::int64_t causal_delta = 1);

  const ActuatorSpec& actuator() const { return actuator_; }
  const std::vector<ListedRecord>& records() const { return records_; }
  /// Last value sent to the actuator; nullopt stands for the initial dontCare.
  const std::optional<Value>& old_set() const { return old_set_; }

  /// Step 1. Throws ContractViolation (state unchanged) for an illegal setting
  /// or an expiry not after the record's time.
  void insert_record(const SettingRecord& rec, std::uint64_t seq, const Annotation& ann = {});
  /// Step 2.
  Resolution choose_setting() const;
  /// Step 3. Returns the value to send, if any, and updates oldSet.
  std::optional<Value> decide_output(const Resolution& res);

  /// Steps 1-3 for one input record. At most one command.
  Outcome process(const SettingRecord& rec, std::uint64_t seq, const Annotation& ann = {});
  /// Cancels (feature, priority) if its listed record still carries `stamped`.
  Outcome expire_setting(const FeatureKey& key, Timestamp stamped, Timestamp now);
  /// Deletes immediate-tagged records that are not in force and re-resolves
  /// until none is left ineffectual.
  Outcome on_feedback_for_immediate(const Value& real, Timestamp now);

  ExplainReport explain() const;

  static std::string feedback_stream(const std::string& actuator) { return actuator + ".real"; }
  static std::string settings_stream(const std::string& actuator) {
    return actuator + ".settings";
  }

 private:
  Outcome finish(Timestamp cause_time);
  Value pick_in_range(Range r) const;

  ActuatorSpec actuator_;
  std::vector<ListedRecord> records_;
  std::optional<Value> old_set_;
  std::int64_t causal_delta_;
};

}  // namespace featcomp
