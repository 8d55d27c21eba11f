#include "pack_util.hpp"

namespace featcomp {

namespace {

constexpr std::int64_t kDimMax = 100;

bool sleeping(const GuardInput& in) { return in.sensor_int("clock.sleep", "active").value_or(0) == 1; }

// Skylight band from the latest lux reading; dark until one arrives.
std::string band_of(const GuardInput& in, const DimmerConfig& c) {
  auto lux = in.sensor_int("skylight", "lux");
  if (!lux) return "dark";
  if (*lux >= c.skylight_bright_lux) return "bright";
  if (*lux >= c.skylight_dim_lux) return "dim";
  return "dark";
}

SettingValue at_least(std::int64_t level) { return SettingValue::range(level, kDimMax); }

}  // namespace

DimmerConfig DimmerConfig::from(const ConfigOverrides& overrides) {
  detail::ConfigReader r(overrides, "dimmer");
  DimmerConfig c;
  r.window("sleep", c.sleep);
  r.clock_time("clock_origin", c.clock_origin_minute);
  r.choice("season", c.season, {"sunny", "dark"});
  r.integer("safety_sleep_min", c.safety_sleep_min, 0);
  r.integer("safety_awake_min", c.safety_awake_min, 0);
  r.integer("health_min_sunny", c.health_min_sunny, 0);
  r.integer("health_min_dark", c.health_min_dark, 0);
  r.integer("pleasant_min", c.pleasant_min, 0);
  r.integer("skylight_dim_lux", c.skylight_dim_lux, 0);
  r.integer("skylight_bright_lux", c.skylight_bright_lux, 0);
  r.flag("energy", c.energy);
  for (auto level : {c.safety_sleep_min, c.safety_awake_min, c.health_min_sunny, c.health_min_dark, c.pleasant_min}) {
    if (level > kDimMax) throw ConfigError("config: dimmer levels must lie within 0..100");
  }
  if (c.skylight_dim_lux > c.skylight_bright_lux) {
    throw ConfigError("config: skylight_dim_lux must not exceed skylight_bright_lux");
  }
  return c;
}

std::int64_t DimmerConfig::health_level(const std::string& band) const {
  auto base = season == "dark" ? health_min_dark : health_min_sunny;
  if (band == "bright") return base / 4;
  if (band == "dim") return base / 2;
  return base;
}

std::int64_t DimmerConfig::pleasant_level(const std::string& band) const {
  if (band == "bright") return 0;
  if (band == "dim") return pleasant_min / 2;
  return pleasant_min;
}

ActuatorSpec dimmer_actuator() { return ActuatorSpec::numeric("dimmer", 0, kDimMax); }

MachineSpec safety_spec(const DimmerConfig& config) {
  MachineSpec spec = detail::make_machine("safety", "dimmer", 40, {"off", "sleepLit", "awakeLit"},
      {{"sleepLit", at_least(config.safety_sleep_min)}, {"awakeLit", at_least(config.safety_awake_min)}}, "off", {"motion", "clock.sleep"});
  spec.transitions = detail::computed_transitions(
      spec.inputs, spec.states, [](const GuardInput& in) -> std::optional<std::string> {
        if (!in.sensor_flag("motion", "present").value_or(false)) return "off";
        return sleeping(in) ? "sleepLit" : "awakeLit";
      });
  return spec;
}

MachineSpec health_spec(const DimmerConfig& config) {
  MachineSpec spec = detail::make_machine("health", "dimmer", 30, {"off", "rest"},
      {{"rest", SettingValue::single(0)}}, "off", {"clock.sleep", "skylight"});
  for (const auto* band : {"dark", "dim", "bright"}) {
    auto level = config.health_level(band);
    if (level == 0) continue;
    auto state = std::string("awake_") + band;
    spec.states.push_back(state);
    spec.state_setting.emplace(state, at_least(level));
  }
  spec.transitions = detail::computed_transitions(
      spec.inputs, spec.states, [config](const GuardInput& in) -> std::optional<std::string> {
        if (sleeping(in)) return "rest";
        auto band = band_of(in, config);
        return config.health_level(band) == 0 ? "off" : "awake_" + band;
      });
  return spec;
}

MachineSpec pleasantness_spec(const DimmerConfig& config) {
  MachineSpec spec = detail::make_machine("pleasantness", "dimmer", 20, {"off"},
      {}, "off", {"clock.sleep", "skylight"});
  for (const auto* band : {"dark", "dim", "bright"}) {
    auto level = config.pleasant_level(band);
    if (level == 0) continue;
    auto state = std::string("ambient_") + band;
    spec.states.push_back(state);
    spec.state_setting.emplace(state, at_least(level));
  }
  spec.transitions = detail::computed_transitions(
      spec.inputs, spec.states, [config](const GuardInput& in) -> std::optional<std::string> {
        if (sleeping(in)) return "off";
        auto band = band_of(in, config);
        return config.pleasant_level(band) == 0 ? "off" : "ambient_" + band;
      });
  return spec;
}

MachineSpec energy_spec() {
  MachineSpec spec = detail::make_machine("energy", "dimmer", 10, {"off", "saving"},
      {{"saving", SettingValue::prefer(Direction::Lowest)}}, "off", {"sys"});
  spec.transitions.push_back({"off", on_stream("sys"),
                              [](const GuardInput& in) { return in.field_is("event", "start"); }, {}, "saving"});
  return spec;
}

std::unique_ptr<System> build_dimmer(const DimmerConfig& config, const InitialValues& init,
                                     EngineOptions options) {
  auto sys = std::make_unique<System>("dimmer", options);
  auto actuator = dimmer_actuator();
  for (const auto& [name, _] : init) {
    if (name != actuator.name()) throw ConfigError("init: unknown actuator '" + name + "' for pack dimmer");
  }
  sys->add_actuator(actuator, detail::initial_value(init, actuator));

  auto& engine = sys->engine();
  engine.emplace_module<ClockModule>(Clock{config.clock_origin_minute},
                                     std::vector<std::pair<std::string, TimeWindow>>{{"sleep", config.sleep}},
                                     false);
  engine.subscribe("sys", engine.last_module_id());

  sys->add_machine(safety_spec(config));
  sys->add_machine(health_spec(config));
  sys->add_machine(pleasantness_spec(config));
  if (config.energy) sys->add_machine(energy_spec());
  return sys;
}

}  // namespace featcomp
