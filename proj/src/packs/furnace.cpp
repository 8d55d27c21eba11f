#include <algorithm>
#include <limits>

#include "pack_util.hpp"

namespace featcomp {

namespace {

const SettingValue kOn = SettingValue::discrete("on");
const SettingValue kOff = SettingValue::discrete("off");

std::string setpoint_state(std::int64_t degrees) { return "s" + std::to_string(degrees); }

// "off" plus one state per legal setpoint.
void add_setpoint_states(MachineSpec& spec, const FurnaceConfig& config) {
  for (auto d = config.thermostat_min; d <= config.thermostat_max; ++d) {
    spec.states.push_back(setpoint_state(d));
    spec.state_setting.emplace(setpoint_state(d), SettingValue::single(d));
  }
}

bool fresh_feedback(const GuardInput& in) {
  return !in.record->payload.find("init") && !in.record->payload.find("replay");
}

MachineSpec switch_spec(std::string feature, std::int32_t priority, std::vector<std::string> inputs,
                        std::vector<std::string> states = {"dontCare", "on", "off"}) {
  std::map<std::string, SettingValue> settings{{"off", kOff}};
  if (std::find(states.begin(), states.end(), "on") != states.end()) settings.emplace("on", kOn);
  return detail::make_machine(std::move(feature), "furnace", priority, std::move(states), std::move(settings),
                              "dontCare", std::move(inputs));
}

}  // namespace

FurnaceConfig FurnaceConfig::from(const ConfigOverrides& overrides) {
  detail::ConfigReader r(overrides, "furnace");
  FurnaceConfig c;
  r.integer("protection_ms", c.protection_ms, 1);
  r.integer("vacation_setpoint", c.vacation_setpoint, std::numeric_limits<std::int64_t>::min());
  r.integer("hysteresis", c.hysteresis, 0);
  r.integer("thermostat_min", c.thermostat_min, std::numeric_limits<std::int64_t>::min());
  r.integer("thermostat_max", c.thermostat_max, std::numeric_limits<std::int64_t>::min());
  r.clock_time("clock_origin", c.clock_origin_minute);
  if (c.thermostat_min > c.thermostat_max) throw ConfigError("config: thermostat_min exceeds thermostat_max");
  if (c.thermostat_max - c.thermostat_min > 200) throw ConfigError("config: thermostat range too wide");
  if (c.vacation_setpoint < c.thermostat_min || c.vacation_setpoint > c.thermostat_max) {
    throw ConfigError("config: vacation_setpoint outside the thermostat range");
  }
  return c;
}

ActuatorSpec thermostat_actuator(const FurnaceConfig& config) {
  return ActuatorSpec::numeric("thermostat", config.thermostat_min, config.thermostat_max);
}

ActuatorSpec furnace_actuator() { return ActuatorSpec::enumerated("furnace", {"on", "off"}); }

MachineSpec vacation_spec(const FurnaceConfig& config) {
  MachineSpec spec = detail::make_machine("vacation", "thermostat", 30, {"off", "away"},
      {{"away", SettingValue::single(config.vacation_setpoint)}}, "off", {"vacation"});
  spec.transitions = detail::computed_transitions(
      spec.inputs, spec.states, [](const GuardInput& in) -> std::optional<std::string> {
        auto v = in.int_field("vacation");
        if (!v) return std::nullopt;
        return *v ? "away" : "off";
      });
  return spec;
}

MachineSpec manual_thermostat_spec(const FurnaceConfig& config) {
  MachineSpec spec = detail::make_machine("manual", "thermostat", 20, {"off"},
      {}, "off", {"thermostatPanel"});
  add_setpoint_states(spec, config);
  spec.transitions = detail::computed_transitions(
      spec.inputs, spec.states, [](const GuardInput& in) -> std::optional<std::string> {
        auto v = in.int_field("setpoint");
        if (!v) return std::nullopt;
        return setpoint_state(*v);
      });
  return spec;
}

MachineSpec learning_thermostat_spec(const FurnaceConfig& config) {
  MachineSpec spec = detail::make_machine("learning", "thermostat", 20, {"off"},
      {}, "off", {"thermostatPanel", "clock.hour"});
  add_setpoint_states(spec, config);
  for (int h = 0; h < 24; ++h) spec.vars["h" + std::to_string(h)] = std::int64_t{-1};

  // Remember the setpoint per hour of day, one transition per hour.
  for (int h = 0; h < 24; ++h) {
    auto var = "h" + std::to_string(h);
    spec.transitions.push_back(
        {kAnyState, on_stream("thermostatPanel"),
         [config, h](const GuardInput& in) {
           auto v = in.int_field("setpoint");
           return v && *v >= config.thermostat_min && *v <= config.thermostat_max &&
                  in.sensor_int("clock.hour", "hour") == h;
         },
         {AssignAction{var, [](const GuardInput& in) -> Value { return *in.int_field("setpoint"); }}},
         kSameState});
  }
  for (auto d = config.thermostat_min; d <= config.thermostat_max; ++d) {
    spec.transitions.push_back({kAnyState, on_stream("clock.hour"),
                                [d](const GuardInput& in) {
                                  auto h = in.int_field("hour");
                                  return h && in.var_int("h" + std::to_string(*h)) == d;
                                },
                                {},
                                setpoint_state(d)});
  }
  return spec;
}

MachineSpec emergency_shutoff_spec() {
  auto spec = switch_spec("emergency", 50, {"emergency"}, {"dontCare", "off"});
  spec.transitions.push_back({kAnyState, on_stream("emergency"),
                              [](const GuardInput& in) { return in.int_field("active") == 1; }, {}, "off"});
  spec.transitions.push_back({kAnyState, on_stream("emergency"),
                              [](const GuardInput& in) { return in.int_field("active") == 0; }, {}, "dontCare"});
  return spec;
}

MachineSpec furnace_protection_spec(const FurnaceConfig& config) {
  auto spec = switch_spec("protection", 40, {});
  const std::string feedback = Coordinator::feedback_stream("furnace");
  for (const auto* value : {"on", "off"}) {
    std::string v = value;
    spec.transitions.push_back(
        {kAnyState, on_stream(feedback),
         [v](const GuardInput& in) { return fresh_feedback(in) && in.field_is("value", v); },
         {SetTimerAction{config.protection_ms, "protect"}},
         v});
  }
  spec.transitions.push_back({"on", on_timeout("protect"), {}, {}, "dontCare"});
  spec.transitions.push_back({"off", on_timeout("protect"), {}, {}, "dontCare"});
  return spec;
}

MachineSpec energy_saving_spec() {
  auto spec = switch_spec("energySaving", 30, {"ac"}, {"dontCare", "off"});
  spec.transitions = detail::computed_transitions(
      spec.inputs, spec.states, [](const GuardInput& in) -> std::optional<std::string> {
        auto on = in.field("on");
        if (!on) return std::nullopt;
        auto b = parse_bool(*on);
        if (!b) return std::nullopt;
        return *b ? "off" : "dontCare";
      });
  return spec;
}

MachineSpec basic_operation_spec(const FurnaceConfig& config) {
  const std::string setpoint = Coordinator::feedback_stream("thermostat");
  auto spec = switch_spec("basic", 10, {"houseTemp", setpoint});
  auto hysteresis = config.hysteresis;
  spec.transitions = detail::computed_transitions(
      spec.inputs, spec.states, [setpoint, hysteresis](const GuardInput& in) -> std::optional<std::string> {
        auto temp = in.sensor_int("houseTemp", "value");
        auto set = in.sensor_int(setpoint, "value");
        if (!temp || !set) return std::nullopt;
        if (*temp < *set - hysteresis) return "on";
        if (*temp >= *set + hysteresis) return "off";
        return std::nullopt;
      });
  return spec;
}

std::unique_ptr<System> build_furnace(const FurnaceConfig& config, const InitialValues& init,
                                      EngineOptions options) {
  auto sys = std::make_unique<System>("furnace", options);
  auto thermostat = thermostat_actuator(config);
  auto furnace = furnace_actuator();
  for (const auto& [name, _] : init) {
    if (name != thermostat.name() && name != furnace.name()) {
      throw ConfigError("init: unknown actuator '" + name + "' for pack furnace");
    }
  }
  sys->add_actuator(thermostat, detail::initial_value(init, thermostat));
  sys->add_actuator(furnace, detail::initial_value(init, furnace));

  auto& engine = sys->engine();
  engine.emplace_module<ClockModule>(Clock{config.clock_origin_minute},
                                     std::vector<std::pair<std::string, TimeWindow>>{}, true);
  engine.subscribe("sys", engine.last_module_id());
  install_transformer(engine, vacation_transform("presence", "vacation"));

  sys->add_machine(vacation_spec(config));
  sys->add_machine(manual_thermostat_spec(config));
  sys->add_machine(learning_thermostat_spec(config));
  sys->add_machine(emergency_shutoff_spec());
  sys->add_machine(furnace_protection_spec(config));
  sys->add_machine(energy_saving_spec());
  sys->add_machine(basic_operation_spec(config));
  return sys;
}

}  // namespace featcomp
