#include <algorithm>

#include "pack_util.hpp"

namespace featcomp {

namespace {

const SettingValue kLocked = SettingValue::discrete("locked");
const SettingValue kUnlocked = SettingValue::discrete("unlocked");

Payload text(std::string message) { return Payload{{"text", std::move(message)}}; }

// EO and MO share one program shape: a request for a setting moves to that
// state and starts the timer (a request for the current setting only resets
// it); the timeout reverts to dontCare.
MachineSpec manual_lock_program(std::string feature, std::int32_t priority, std::string input,
                                std::int64_t duration_ms,
                                const std::vector<std::pair<Guard, std::string>>& requests) {
  MachineSpec spec = detail::make_machine(std::move(feature), "doorLock", priority, {"dontCare", "locked", "unlocked"},
      {{"locked", kLocked}, {"unlocked", kUnlocked}}, "dontCare", {input});
  for (const auto& [guard, target] : requests) {
    for (const auto& state : spec.states) {
      spec.transitions.push_back(
          {state, on_stream(input), guard, {SetTimerAction{duration_ms, "duration"}}, target});
    }
  }
  spec.transitions.push_back({"locked", on_timeout("duration"), {}, {}, "dontCare"});
  spec.transitions.push_back({"unlocked", on_timeout("duration"), {}, {}, "dontCare"});
  return spec;
}

}  // namespace

DoorLockConfig DoorLockConfig::from(const ConfigOverrides& overrides) {
  detail::ConfigReader r(overrides, "door_lock");
  DoorLockConfig c;
  r.integer("eo_duration_ms", c.eo_duration_ms, 1);
  r.integer("hfe_duration_ms", c.hfe_duration_ms, 1);
  r.window("night", c.night);
  r.clock_time("clock_origin", c.clock_origin_minute);
  r.list("passcodes", c.passcodes);
  std::vector<std::string> required(c.passcode_required.begin(), c.passcode_required.end());
  r.list("passcode_required", required);
  for (const auto& entry : required) {
    auto dot = entry.find('.');
    auto panel = entry.substr(0, dot);
    auto op = dot == std::string::npos ? "" : entry.substr(dot + 1);
    if ((panel != "outside" && panel != "inside") || (op != "requestLock" && op != "requestUnlock")) {
      throw ConfigError("config passcode_required: expected <panel>.<op>, got '" + entry + "'");
    }
  }
  c.passcode_required = {required.begin(), required.end()};
  r.choice("initial_lock", c.initial_lock, {"locked", "unlocked"});
  r.integer("expect_window_ms", c.expect_window_ms, 1);
  r.integer("plant_delay_ms", c.plant_delay_ms, 1);
  if (c.plant_delay_ms > c.expect_window_ms) {
    throw ConfigError("config plant_delay_ms must not exceed expect_window_ms");
  }
  return c;
}

bool DoorLockConfig::authorized(const std::string& panel, const std::string& op,
                                const std::string& code) const {
  if (!passcode_required.count(panel + "." + op)) return true;
  return std::find(passcodes.begin(), passcodes.end(), code) != passcodes.end();
}

ActuatorSpec door_lock_actuator() { return ActuatorSpec::enumerated("doorLock", {"locked", "unlocked"}); }

MachineSpec electronic_operation_spec(const DoorLockConfig& config) {
  auto request = [config](std::string op, bool want_authorized) -> Guard {
    return [config, op, want_authorized](const GuardInput& in) {
      if (!in.field_is("op", op)) return false;
      return config.authorized(in.field("panel").value_or(""), op, in.field("code").value_or("")) ==
             want_authorized;
    };
  };
  auto spec = manual_lock_program("EO", kEoPriority, "panelIn", config.eo_duration_ms,
                                  {{request("requestUnlock", true), "unlocked"},
                                   {request("requestLock", true), "locked"}});
  WriteAction refuse{[](const GuardInput& in) { return "panelOut." + in.field("panel").value_or("outside"); },
                     [](const GuardInput&) { return text("invalid passcode"); }};
  for (const auto* op : {"requestUnlock", "requestLock"}) {
    spec.transitions.push_back({kAnyState, on_stream("panelIn"), request(op, false), {refuse}, kSameState});
  }
  return spec;
}

MachineSpec mechanical_operation_spec(const DoorLockConfig& config) {
  auto event = [](std::string name) -> Guard {
    return [name](const GuardInput& in) { return in.field_is("event", name); };
  };
  return manual_lock_program("MO", kMoPriority, "toMO", config.eo_duration_ms,
                             {{event("mechUnlock"), "unlocked"}, {event("mechLock"), "locked"}});
}

MachineSpec intruder_defense_spec() {
  MachineSpec spec = detail::make_machine("ID", "doorLock", kIdPriority, {"dontCare", "locked"},
      {{"locked", kLocked}}, "dontCare", {"backSensors"});
  auto both = [](const std::string& message) {
    return std::vector<Action>{write_to("panelOut.outside", text(message)),
                               write_to("panelOut.inside", text(message))};
  };
  spec.transitions.push_back({"dontCare", on_stream("backSensors"),
                              [](const GuardInput& in) { return in.field_is("event", "intruder"); },
                              both("possible intruder detected"), "locked"});
  spec.transitions.push_back({"locked", on_stream("backSensors"),
                              [](const GuardInput& in) { return in.field_is("event", "allClear"); },
                              both("all clear"), "dontCare"});
  return spec;
}

MachineSpec hands_free_entry_spec(const DoorLockConfig& config) {
  MachineSpec spec = detail::make_machine("HFE", "doorLock", kHfePriority, {"dontCare", "unlocked"},
      {{"unlocked", kUnlocked}}, "dontCare", {"driveway"});
  Guard arriving = [](const GuardInput& in) { return in.field_is("event", "carArriving"); };
  for (const auto* from : {"dontCare", "unlocked"}) {
    spec.transitions.push_back(
        {from, on_stream("driveway"), arriving, {SetTimerAction{config.hfe_duration_ms, "duration"}}, "unlocked"});
  }
  spec.transitions.push_back({"unlocked", on_timeout("duration"), {}, {}, "dontCare"});
  spec.cancel_on_ineffectual = true;
  spec.immediate = true;
  return spec;
}

MachineSpec night_lock_spec() {
  MachineSpec spec = detail::make_machine("NL", "doorLock", kNlPriority, {"dontCare", "locked"},
      {{"locked", kLocked}}, "dontCare", {"clock.night"});
  spec.transitions.push_back({"dontCare", on_stream("clock.night"),
                              [](const GuardInput& in) { return in.int_field("active") == 1; }, {}, "locked"});
  spec.transitions.push_back({"locked", on_stream("clock.night"),
                              [](const GuardInput& in) { return in.int_field("active") == 0; }, {}, "dontCare"});
  return spec;
}

std::unique_ptr<System> build_door_lock(const DoorLockConfig& config, const InitialValues& init,
                                        EngineOptions options) {
  auto sys = std::make_unique<System>("door_lock", options);
  auto actuator = door_lock_actuator();
  for (const auto& [name, _] : init) {
    if (name != actuator.name()) throw ConfigError("init: unknown actuator '" + name + "' for pack door_lock");
  }
  auto initial = detail::initial_value(init, actuator);
  std::string physical = initial ? to_string(*initial) : config.initial_lock;

  sys->add_actuator(actuator, initial);
  sys->add_displays({"panelOut.outside", "panelOut.inside"});

  auto& engine = sys->engine();
  engine.emplace_module<ClockModule>(Clock{config.clock_origin_minute},
                                     std::vector<std::pair<std::string, TimeWindow>>{{"night", config.night}},
                                     false);
  engine.subscribe("sys", engine.last_module_id());

  sys->add_machine(electronic_operation_spec(config));
  sys->add_machine(mechanical_operation_spec(config));
  sys->add_machine(intruder_defense_spec());
  sys->add_machine(hands_free_entry_spec(config));
  sys->add_machine(night_lock_spec());

  auto feedback = Coordinator::feedback_stream(actuator.name());
  engine.emplace_module<MechOpModule>(MechOpDetector(physical, config.expect_window_ms), feedback,
                                      "fromDoor", "toMO");
  engine.subscribe(feedback, engine.last_module_id());
  engine.subscribe("fromDoor", engine.last_module_id());

  engine.emplace_module<DoorPlant>(physical, feedback, "fromDoor", config.plant_delay_ms);
  engine.subscribe(feedback, engine.last_module_id());
  engine.subscribe("fromDoor", engine.last_module_id());
  return sys;
}

}  // namespace featcomp
