#include "featcomp/machine.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "featcomp/coordinator.hpp"

namespace featcomp {

std::optional<std::string> GuardInput::field(std::string_view key) const {
  if (!record) return std::nullopt;
  return record->payload.text(key);
}

std::optional<std::int64_t> GuardInput::int_field(std::string_view key) const {
  if (!record) return std::nullopt;
  return record->payload.integer(key);
}

bool GuardInput::field_is(std::string_view key, std::string_view value) const {
  auto f = field(key);
  return f && *f == value;
}

const Value* GuardInput::sensor(const std::string& stream, const std::string& key) const {
  auto it = sensors.find(stream + "." + key);
  return it == sensors.end() ? nullptr : &it->second;
}

std::optional<std::int64_t> GuardInput::sensor_int(const std::string& stream,
                                                   const std::string& key) const {
  const auto* v = sensor(stream, key);
  if (!v) return std::nullopt;
  if (const auto* i = std::get_if<std::int64_t>(v)) return *i;
  return std::nullopt;
}

std::optional<bool> GuardInput::sensor_flag(const std::string& stream,
                                            const std::string& key) const {
  const auto* v = sensor(stream, key);
  if (!v) return std::nullopt;
  return parse_bool(to_string(*v));
}

const Value* GuardInput::var(const std::string& name) const {
  auto it = vars.find(name);
  return it == vars.end() ? nullptr : &it->second;
}

std::int64_t GuardInput::var_int(const std::string& name) const {
  const auto* v = var(name);
  if (!v) return 0;
  if (const auto* i = std::get_if<std::int64_t>(v)) return *i;
  return 0;
}

Action write_to(std::string stream, Payload payload) {
  return WriteAction{[stream = std::move(stream)](const GuardInput&) { return stream; },
                     [payload = std::move(payload)](const GuardInput&) { return payload; }};
}

const SettingValue& MachineSpec::setting_of(const std::string& state) const {
  static const SettingValue dont_care;
  auto it = state_setting.find(state);
  return it == state_setting.end() ? dont_care : it->second;
}

namespace {

std::optional<std::string> resolve_cancel_state(const MachineSpec& spec) {
  if (spec.cancel_state) return spec.cancel_state;
  for (const auto& s : spec.states) {
    if (spec.setting_of(s).is_dont_care()) return s;
  }
  return std::nullopt;
}

std::set<std::string> timer_tags(const MachineSpec& spec) {
  std::set<std::string> tags;
  for (const auto& t : spec.transitions) {
    for (const auto& a : t.actions) {
      if (const auto* st = std::get_if<SetTimerAction>(&a)) tags.insert(st->tag);
    }
  }
  return tags;
}

}  // namespace

LoadReport validate_machine(const MachineSpec& spec, const ActuatorSpec& actuator) {
  LoadReport report;
  const std::string who = "feature " + spec.feature.name() + ": ";
  if (spec.feature.name().empty()) throw LoadError("machine without a feature id");
  if (spec.primary_actuator != actuator.name()) {
    throw LoadError(who + "primary actuator '" + spec.primary_actuator + "' does not match '" +
                    actuator.name() + "'");
  }
  if (spec.states.empty()) throw LoadError(who + "no states");
  std::set<std::string> states;
  for (const auto& s : spec.states) {
    if (s == kAnyState || s == kSameState || s.empty()) throw LoadError(who + "illegal state name '" + s + "'");
    if (!states.insert(s).second) throw LoadError(who + "duplicate state '" + s + "'");
  }
  if (!states.count(spec.initial)) {
    throw LoadError(who + "initial state '" + spec.initial + "' is not declared");
  }
  for (const auto& [state, setting] : spec.state_setting) {
    if (!states.count(state)) throw LoadError(who + "setting for undeclared state '" + state + "'");
    if (!actuator.is_legal(setting)) {
      throw LoadError(who + "state '" + state + "' has setting '" + to_string(setting) +
                      "' illegal for actuator " + actuator.name());
    }
  }

  std::set<std::string> streams(spec.inputs.begin(), spec.inputs.end());
  streams.insert(Coordinator::feedback_stream(actuator.name()));
  const auto tags = timer_tags(spec);
  for (std::size_t i = 0; i < spec.transitions.size(); ++i) {
    const auto& t = spec.transitions[i];
    const std::string where = who + "transition #" + std::to_string(i) + " (" + t.from + " -> " + t.to + "): ";
    if (t.from != kAnyState && !states.count(t.from)) {
      throw LoadError(where + "source state '" + t.from + "' is not declared");
    }
    if (t.to != kSameState && !states.count(t.to)) {
      throw LoadError(where + "target state '" + t.to + "' is not declared");
    }
    if (t.trigger.kind == Trigger::Kind::Stream && !streams.count(t.trigger.name)) {
      throw LoadError(where + "guard reads undeclared stream '" + t.trigger.name + "'");
    }
    if (t.trigger.kind == Trigger::Kind::Timeout && !tags.count(t.trigger.name)) {
      throw LoadError(where + "timeout '" + t.trigger.name + "' is never set");
    }
    for (const auto& a : t.actions) {
      if (const auto* as = std::get_if<AssignAction>(&a); as && !spec.vars.count(as->var)) {
        throw LoadError(where + "assigns undeclared variable '" + as->var + "'");
      }
      if (const auto* st = std::get_if<SetTimerAction>(&a); st && st->duration_ms <= 0) {
        throw LoadError(where + "timer '" + st->tag + "' needs a positive duration");
      }
    }
  }

  std::set<std::string> reached{spec.initial};
  std::deque<std::string> frontier{spec.initial};
  while (!frontier.empty()) {
    auto s = frontier.front();
    frontier.pop_front();
    for (const auto& t : spec.transitions) {
      if (t.from != kAnyState && t.from != s) continue;
      auto next = t.to == kSameState ? s : t.to;
      if (reached.insert(next).second) frontier.push_back(next);
    }
  }
  for (const auto& s : spec.states) {
    if (!reached.count(s)) throw LoadError(who + "state '" + s + "' is unreachable from '" + spec.initial + "'");
  }

  if (spec.cancel_on_ineffectual) {
    auto cancel = resolve_cancel_state(spec);
    if (!cancel || !states.count(*cancel) || !spec.setting_of(*cancel).is_dont_care()) {
      throw LoadError(who + "cancel-on-ineffectual needs a dontCare state");
    }
  }
  if (!spec.setting_of(spec.initial).is_dont_care()) {
    report.warnings.push_back(who + "initial state '" + spec.initial + "' is not dontCare");
  }
  return report;
}

MachineInstance::MachineInstance(MachineSpec spec, ActuatorSpec actuator)
    : spec_(std::move(spec)), actuator_(std::move(actuator)) {
  report_ = validate_machine(spec_, actuator_);
  state_ = spec_.initial;
  vars_ = spec_.vars;
}

std::string MachineInstance::feedback_stream() const {
  return Coordinator::feedback_stream(actuator_.name());
}

void MachineInstance::record_sensors(const EventRecord& record) {
  for (const auto& f : record.payload.fields()) sensors_[record.stream + "." + f.key] = f.value;
}

std::vector<EngineAction> MachineInstance::dispatch(const EventRecord& record) {
  record_sensors(record);
  GuardInput in{&record, nullptr, state_, vars_, sensors_};
  return step(in, on_stream(record.stream));
}

std::vector<EngineAction> MachineInstance::dispatch_timeout(const std::string& tag) {
  GuardInput in{nullptr, &tag, state_, vars_, sensors_};
  return step(in, on_timeout(tag));
}

std::vector<EngineAction> MachineInstance::handle_feedback(const EventRecord& record) {
  if (spec_.cancel_on_ineffectual && !setting().is_dont_care()) {
    const auto* value = record.payload.find("value");
    if (value && actuator_.is_legal_value(*value) && !satisfies(*value, setting())) {
      record_sensors(record);
      std::vector<EngineAction> actions;
      for (const auto& tag : timer_tags(spec_)) actions.push_back(TimerCancel{tag});
      auto entered = enter(*resolve_cancel_state(spec_));
      actions.insert(actions.end(), entered.begin(), entered.end());
      return actions;
    }
  }
  return dispatch(record);
}

std::vector<EngineAction> MachineInstance::step(const GuardInput& in, const Trigger& trigger) {
  std::vector<EngineAction> actions;
  for (const auto& t : spec_.transitions) {
    if (t.trigger.kind != trigger.kind || t.trigger.name != trigger.name) continue;
    if (t.from != kAnyState && t.from != state_) continue;
    if (t.guard && !t.guard(in)) continue;

    for (const auto& a : t.actions) {
      if (const auto* w = std::get_if<WriteAction>(&a)) {
        actions.push_back(PublishRequest{w->stream(in), w->payload(in)});
      } else if (const auto* st = std::get_if<SetTimerAction>(&a)) {
        actions.push_back(TimerRequest{st->tag, st->duration_ms});
      } else if (const auto* ct = std::get_if<CancelTimerAction>(&a)) {
        actions.push_back(TimerCancel{ct->tag});
      } else if (const auto* as = std::get_if<AssignAction>(&a)) {
        vars_[as->var] = as->value(in);
      }
    }
    auto entered = enter(t.to == kSameState ? state_ : t.to);
    actions.insert(actions.end(), entered.begin(), entered.end());
    return actions;
  }
  return actions;
}

std::vector<EngineAction> MachineInstance::enter(const std::string& next) {
  std::vector<EngineAction> actions;
  const auto& before = spec_.setting_of(state_);
  const auto& after = spec_.setting_of(next);
  state_ = next;
  if (before != after) actions.push_back(setting_record(after));
  return actions;
}

PublishRequest MachineInstance::setting_record(const SettingValue& s) const {
  Payload p{{"feature", spec_.feature.name()},
            {"priority", std::int64_t{spec_.priority.value}},
            {"setting", to_string(s)}};
  if (spec_.immediate) p.set("immediate", std::int64_t{1});
  return {Coordinator::settings_stream(actuator_.name()), std::move(p)};
}

void FeatureMachine::on_record(Context& ctx, const EventRecord& record) {
  if (record.stream == instance_.feedback_stream()) {
    apply(ctx, instance_.handle_feedback(record));
  } else {
    apply(ctx, instance_.dispatch(record));
  }
}

void FeatureMachine::on_timer(Context& ctx, const TimerFire& fire) {
  auto it = timers_.find(fire.tag);
  if (it == timers_.end() || it->second != fire.handle) return;
  timers_.erase(it);
  apply(ctx, instance_.dispatch_timeout(fire.tag));
}

void FeatureMachine::apply(Context& ctx, const std::vector<EngineAction>& actions) {
  for (const auto& a : actions) {
    if (const auto* p = std::get_if<PublishRequest>(&a)) {
      ctx.publish(p->stream, p->payload);
    } else if (const auto* t = std::get_if<TimerRequest>(&a)) {
      if (auto it = timers_.find(t->tag); it != timers_.end()) ctx.cancel_timer(it->second);
      timers_[t->tag] = ctx.set_timer(ctx.now() + t->duration_ms, t->tag);
    } else if (const auto* c = std::get_if<TimerCancel>(&a)) {
      if (auto it = timers_.find(c->tag); it != timers_.end()) {
        ctx.cancel_timer(it->second);
        timers_.erase(it);
      }
    }
  }
}

FeatureMachine& load_machine(Engine& engine, MachineSpec spec, const ActuatorSpec& actuator) {
  MachineInstance instance(std::move(spec), actuator);
  auto inputs = instance.spec().inputs;
  auto feedback = instance.feedback_stream();
  auto& machine = engine.emplace_module<FeatureMachine>(std::move(instance));
  auto id = engine.last_module_id();
  for (const auto& s : inputs) engine.subscribe(s, id);
  engine.subscribe(feedback, id);
  return machine;
}

}  // namespace featcomp
