#pragma once

// Feature runtime. A feature is a finite-state machine whose states denote
// settings of its primary actuator. Transitions are triggered by stream
// records or local timeouts and guarded by side-effect-free predicates; a
// change of setting-state implicitly sends a setting record to the
// actuator's coordinator.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "featcomp/engine.hpp"
#include "featcomp/types.hpp"

namespace featcomp {

class LoadError : public Error {
 public:
  using Error::Error;
};

inline constexpr const char* kAnyState = "*";   // transition source matching every state
inline constexpr const char* kSameState = "=";  // transition target meaning "stay"

/// Read-only view handed to guards and action expressions.
struct GuardInput {
  const EventRecord* record = nullptr;     // null for timeouts
  const std::string* timeout_tag = nullptr;
  const std::string& state;
  const std::map<std::string, Value>& vars;
  const std::map<std::string, Value>& sensors;  // latest "<stream>.<key>" values

  std::optional<std::string> field(std::string_view key) const;
  std::optional<std::int64_t> int_field(std::string_view key) const;
  bool field_is(std::string_view key, std::string_view value) const;
  /// Latest value seen on a subscribed stream, including this delivery.
  const Value* sensor(const std::string& stream, const std::string& key) const;
  std::optional<std::int64_t> sensor_int(const std::string& stream, const std::string& key) const;
  std::optional<bool> sensor_flag(const std::string& stream, const std::string& key) const;
  const Value* var(const std::string& name) const;
  std::int64_t var_int(const std::string& name) const;  // 0 when absent or textual
};

using Guard = std::function<bool(const GuardInput&)>;
using Expr = std::function<Value(const GuardInput&)>;

struct Trigger {
  enum class Kind { Stream, Timeout };
  Kind kind = Kind::Stream;
  std::string name;
};

inline Trigger on_stream(std::string stream) { return {Trigger::Kind::Stream, std::move(stream)}; }
inline Trigger on_timeout(std::string tag) { return {Trigger::Kind::Timeout, std::move(tag)}; }

struct WriteAction {
  std::function<std::string(const GuardInput&)> stream;
  std::function<Payload(const GuardInput&)> payload;
};
struct SetTimerAction {
  std::int64_t duration_ms = 0;
  std::string tag;
};
struct CancelTimerAction {
  std::string tag;
};
struct AssignAction {
  std::string var;
  Expr value;
};
using Action = std::variant<WriteAction, SetTimerAction, CancelTimerAction, AssignAction>;

/// Writes a fixed payload to a fixed stream.
Action write_to(std::string stream, Payload payload);

struct TransitionSpec {
  std::string from;
  Trigger trigger;
  Guard guard;  // empty means always true
  std::vector<Action> actions;
  std::string to;
};

struct MachineSpec {
  FeatureId feature;
  std::string primary_actuator;
  Priority priority;
  std::vector<std::string> states;
  std::map<std::string, SettingValue> state_setting;  // missing entries mean dontCare
  std::string initial;
  std::map<std::string, Value> vars;
  std::vector<std::string> inputs;  // streams read by guards
  std::vector<TransitionSpec> transitions;
  bool cancel_on_ineffectual = false;
  std::optional<std::string> cancel_state;  // defaults to the first dontCare state
  bool immediate = false;                   // tag settings for coordinator-side cancellation

  const SettingValue& setting_of(const std::string& state) const;
};

/// Non-fatal observations from validation.
struct LoadReport {
  std::vector<std::string> warnings;
};

/// Throws LoadError naming the offending state, transition or stream.
LoadReport validate_machine(const MachineSpec& spec, const ActuatorSpec& actuator);

/// Requests produced by a machine step; the engine-facing module applies them.
struct PublishRequest {
  std::string stream;
  Payload payload;
};
struct TimerRequest {
  std::string tag;
  std::int64_t duration_ms = 0;
};
struct TimerCancel {
  std::string tag;
};
using EngineAction = std::variant<PublishRequest, TimerRequest, TimerCancel>;

/// Engine-independent machine state and step semantics.
class MachineInstance {
 public:
  MachineInstance(MachineSpec spec, ActuatorSpec actuator);

  const MachineSpec& spec() const { return spec_; }
  const std::string& state() const { return state_; }
  const SettingValue& setting() const { return spec_.setting_of(state_); }
  const std::map<std::string, Value>& vars() const { return vars_; }
  const std::map<std::string, Value>& sensors() const { return sensors_; }
  const LoadReport& load_report() const { return report_; }
  std::string feedback_stream() const;

  /// Takes the first enabled transition, in spec order, for a record.
  std::vector<EngineAction> dispatch(const EventRecord& record);
  std::vector<EngineAction> dispatch_timeout(const std::string& tag);
  /// Manual-control policy on a real value of the primary actuator; when it
  /// does not cancel, the record is dispatched like any other input.
  std::vector<EngineAction> handle_feedback(const EventRecord& record);

 private:
  std::vector<EngineAction> step(const GuardInput& in, const Trigger& trigger);
  std::vector<EngineAction> enter(const std::string& next);
  PublishRequest setting_record(const SettingValue& s) const;
  void record_sensors(const EventRecord& record);

  MachineSpec spec_;
  ActuatorSpec actuator_;
  LoadReport report_;
  std::string state_;
  std::map<std::string, Value> vars_;
  std::map<std::string, Value> sensors_;
};

/// Engine module wrapping a MachineInstance; local timers are exclusive per tag.
class FeatureMachine : public Module {
 public:
  explicit FeatureMachine(MachineInstance instance) : instance_(std::move(instance)) {}

  const MachineInstance& instance() const { return instance_; }
  void on_record(Context& ctx, const EventRecord& record) override;
  void on_timer(Context& ctx, const TimerFire& fire) override;

 private:
  void apply(Context& ctx, const std::vector<EngineAction>& actions);

  MachineInstance instance_;
  std::map<std::string, TimerHandle> timers_;
};

/// Validates `spec`, adds it to the engine and subscribes it to its inputs
/// and to the primary actuator's feedback stream.
FeatureMachine& load_machine(Engine& engine, MachineSpec spec, const ActuatorSpec& actuator);

}  // namespace featcomp
