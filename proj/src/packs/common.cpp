#include <algorithm>

#include "pack_util.hpp"

namespace featcomp {

const StreamSchema* PackInfo::input(std::string_view stream) const {
  for (const auto& s : inputs) {
    if (s.stream == stream) return &s;
  }
  return nullptr;
}

bool PackInfo::has_config_key(std::string_view key) const {
  return std::find(config_keys.begin(), config_keys.end(), key) != config_keys.end();
}

bool PackInfo::has_actuator(std::string_view name) const {
  return std::find(actuators.begin(), actuators.end(), name) != actuators.end();
}

const std::vector<PackInfo>& pack_catalog() {
  static const std::vector<PackInfo> catalog{
      {"door_lock",
       {"eo_duration_ms", "hfe_duration_ms", "night", "clock_origin", "passcodes",
        "passcode_required", "initial_lock", "expect_window_ms", "plant_delay_ms"},
       {{"panelIn", {"panel", "op", "code"}},
        {"backSensors", {"event"}},
        {"driveway", {"event"}},
        {"fromDoor", {"state"}}},
       {"doorLock"}},
      {"dimmer",
       {"sleep", "clock_origin", "season", "safety_sleep_min", "safety_awake_min",
        "health_min_sunny", "health_min_dark", "pleasant_min", "skylight_dim_lux",
        "skylight_bright_lux", "energy"},
       {{"motion", {"present"}}, {"skylight", {"lux"}}},
       {"dimmer"}},
      {"furnace",
       {"protection_ms", "vacation_setpoint", "hysteresis", "thermostat_min", "thermostat_max",
        "clock_origin"},
       {{"houseTemp", {"value"}},
        {"thermostatPanel", {"setpoint"}},
        {"presence", {"away"}},
        {"ac", {"on"}},
        {"emergency", {"active"}}},
       {"thermostat", "furnace"}},
  };
  return catalog;
}

const PackInfo* find_pack(std::string_view name) {
  for (const auto& p : pack_catalog()) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------

void CoordinatorModule::on_record(Context& ctx, const EventRecord& record) {
  const auto& name = coordinator_.actuator().name();
  auto feature = record.payload.text("feature");
  auto priority = record.payload.integer("priority");
  auto setting = record.payload.text("setting");
  if (!feature || !priority || !setting) {
    ctx.diagnose(name, "malformed setting record");
    return;
  }
  try {
    SettingRecord rec{record.time, FeatureId(*feature), Priority{static_cast<std::int32_t>(*priority)},
                      parse_setting(*setting)};
    Annotation ann;
    if (auto expires = record.payload.integer("expires")) ann.expires_at = Timestamp{*expires};
    if (record.payload.find("immediate")) ann.immediate = record.payload.integer("immediate").value_or(1) != 0;

    auto out = coordinator_.process(rec, record.seq, ann);
    for (const auto& t : out.timers) expiries_[ctx.set_timer(t.fire_at, "expire")] = t;
    emit(ctx, std::move(out));
    settle(ctx);
  } catch (const ContractViolation& e) {
    ctx.diagnose(name, "rejected setting from " + *feature + "@" + std::to_string(*priority) + ": " + e.what());
  }
}

void CoordinatorModule::on_timer(Context& ctx, const TimerFire& fire) {
  auto it = expiries_.find(fire.handle);
  if (it == expiries_.end()) return;
  auto timer = it->second;
  expiries_.erase(it);
  emit(ctx, coordinator_.expire_setting(timer.key, timer.stamped, ctx.now()));
  settle(ctx);
}

void CoordinatorModule::settle(Context& ctx) {
  const auto& real = coordinator_.old_set();
  if (!real) return;
  auto before = coordinator_.records().size();
  auto out = coordinator_.on_feedback_for_immediate(*real, ctx.now());
  bool dropped = coordinator_.records().size() < before;
  bool commanded = !out.commands.empty();
  emit(ctx, std::move(out));
  if (dropped && !commanded) {
    // No command follows, so replay the real value to let the cancelled
    // feature observe that its setting was ineffectual.
    const auto& name = coordinator_.actuator().name();
    auto value = *coordinator_.old_set();
    auto seq = ctx.publish(Coordinator::feedback_stream(name),
                           Payload{{"value", value}, {"replay", std::int64_t{1}}});
    ctx.trace({ctx.now() + ctx.causal_delta(), seq, TraceKind::Feedback, Coordinator::feedback_stream(name),
               to_string(value), {}, {}});
  }
}

void CoordinatorModule::emit(Context& ctx, Outcome outcome) {
  const auto& name = coordinator_.actuator().name();
  for (std::size_t i = 0; i < outcome.commands.size(); ++i) {
    auto& cmd = outcome.commands[i];
    auto value = to_string(cmd.value);
    auto seq = ctx.publish(std::move(outcome.feedback[i]));
    TraceLine line{cmd.time, seq, TraceKind::Command, name, value, cmd.by, {}};
    if (explain_) line.notes = render(coordinator_.explain());
    ctx.trace(std::move(line));
    ctx.trace({cmd.time, seq, TraceKind::Feedback, Coordinator::feedback_stream(name), value, {}, {}});
    commands_.push_back(std::move(cmd));
  }
}

const std::vector<std::string>& DisplayModule::messages(const std::string& stream) const {
  static const std::vector<std::string> none;
  auto it = messages_.find(stream);
  return it == messages_.end() ? none : it->second;
}

void DisplayModule::on_record(Context& ctx, const EventRecord& record) {
  auto text = record.payload.text("text").value_or("");
  messages_[record.stream].push_back(text);
  ctx.trace({record.time, record.seq, TraceKind::Display, record.stream, text, {}, {}});
}

// ---------------------------------------------------------------------------

System::System(std::string pack, EngineOptions options) : pack_(std::move(pack)), engine_(options) {}

CoordinatorModule& System::add_actuator(ActuatorSpec spec, std::optional<Value> initial) {
  auto name = spec.name();
  if (actuators_.count(name)) throw ConfigError("actuator " + name + " declared twice");
  auto& module = engine_.emplace_module<CoordinatorModule>(
      Coordinator(spec, initial, engine_.options().causal_delta));
  engine_.subscribe(Coordinator::settings_stream(name), engine_.last_module_id());
  actuators_.emplace(name, std::move(spec));
  coordinators_[name] = &module;
  return module;
}

FeatureMachine& System::add_machine(MachineSpec spec) {
  const auto& act = actuator(spec.primary_actuator);
  FeatureKey key{spec.feature, spec.priority};
  if (!keys_.insert({spec.primary_actuator, key}).second) {
    throw ConfigError("duplicate (feature, priority) " + to_string(key) + " on " + spec.primary_actuator);
  }
  auto name = spec.feature.name();
  auto& machine = load_machine(engine_, std::move(spec), act);
  machines_.emplace(name, &machine);
  return machine;
}

DisplayModule& System::add_displays(const std::vector<std::string>& streams) {
  auto& module = engine_.emplace_module<DisplayModule>();
  for (const auto& s : streams) engine_.subscribe(s, engine_.last_module_id());
  displays_ = &module;
  return module;
}

const ActuatorSpec& System::actuator(const std::string& name) const {
  auto it = actuators_.find(name);
  if (it == actuators_.end()) throw ConfigError("unknown actuator " + name);
  return it->second;
}

const CoordinatorModule& System::coordinator_module(const std::string& name) const {
  auto it = coordinators_.find(name);
  if (it == coordinators_.end()) throw ConfigError("unknown actuator " + name);
  return *it->second;
}

const Coordinator& System::coordinator(const std::string& name) const {
  return coordinator_module(name).coordinator();
}

const FeatureMachine& System::machine(const std::string& feature) const {
  auto it = machines_.find(feature);
  if (it == machines_.end()) throw ConfigError("unknown feature " + feature);
  return *it->second;
}

std::vector<std::string> System::actuator_names() const {
  std::vector<std::string> names;
  for (const auto& [name, _] : actuators_) names.push_back(name);
  return names;
}

void System::set_explain(bool on) {
  for (auto& [_, c] : coordinators_) c->set_explain(on);
}

void System::start() {
  if (started_) return;
  started_ = true;
  engine_.publish({Timestamp{0}, 0, "sys", Payload{{"event", std::string("start")}}});
  for (const auto& [name, module] : coordinators_) {
    if (const auto& v = module->coordinator().old_set()) {
      engine_.publish({Timestamp{0}, 0, Coordinator::feedback_stream(name),
                       Payload{{"value", *v}, {"init", std::int64_t{1}}}});
    }
  }
}

std::unique_ptr<System> build_pack(std::string_view name, const ConfigOverrides& overrides,
                                   const InitialValues& init, EngineOptions options) {
  if (name == "door_lock") return build_door_lock(DoorLockConfig::from(overrides), init, options);
  if (name == "dimmer") return build_dimmer(DimmerConfig::from(overrides), init, options);
  if (name == "furnace") return build_furnace(FurnaceConfig::from(overrides), init, options);
  throw ConfigError("unknown pack '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------

namespace detail {

ConfigReader::ConfigReader(const ConfigOverrides& overrides, std::string_view pack)
    : overrides_(overrides), pack_(pack) {
  const auto* info = find_pack(pack);
  if (!info) throw ConfigError("unknown pack '" + pack_ + "'");
  for (const auto& [key, _] : overrides) {
    if (!info->has_config_key(key)) throw ConfigError("unknown config key '" + key + "' for pack " + pack_);
  }
}

const std::string* ConfigReader::find(const std::string& key) const {
  auto it = overrides_.find(key);
  return it == overrides_.end() ? nullptr : &it->second;
}

void ConfigReader::integer(const std::string& key, std::int64_t& out, std::int64_t min) const {
  const auto* text = find(key);
  if (!text) return;
  auto v = parse_field_value(*text);
  const auto* i = std::get_if<std::int64_t>(&v);
  if (!i) throw ConfigError("config " + key + ": expected an integer, got '" + *text + "'");
  if (*i < min) throw ConfigError("config " + key + ": must be >= " + std::to_string(min));
  out = *i;
}

void ConfigReader::window(const std::string& key, TimeWindow& out) const {
  const auto* text = find(key);
  if (!text) return;
  try {
    out = TimeWindow::parse(*text);
  } catch (const ContractViolation& e) {
    throw ConfigError("config " + key + ": " + e.what());
  }
}

void ConfigReader::clock_time(const std::string& key, int& out) const {
  const auto* text = find(key);
  if (!text) return;
  try {
    out = parse_clock_time(*text);
  } catch (const ContractViolation& e) {
    throw ConfigError("config " + key + ": " + e.what());
  }
}

void ConfigReader::choice(const std::string& key, std::string& out,
                          const std::vector<std::string>& allowed) const {
  const auto* text = find(key);
  if (!text) return;
  if (std::find(allowed.begin(), allowed.end(), *text) == allowed.end()) {
    throw ConfigError("config " + key + ": unsupported value '" + *text + "'");
  }
  out = *text;
}

void ConfigReader::flag(const std::string& key, bool& out) const {
  const auto* text = find(key);
  if (!text) return;
  auto b = parse_bool(*text);
  if (!b) throw ConfigError("config " + key + ": expected on/off, got '" + *text + "'");
  out = *b;
}

void ConfigReader::list(const std::string& key, std::vector<std::string>& out) const {
  const auto* text = find(key);
  if (!text) return;
  out.clear();
  std::size_t start = 0;
  while (start <= text->size()) {
    auto comma = text->find(',', start);
    auto item = text->substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
}

std::vector<TransitionSpec> computed_transitions(
    const std::vector<std::string>& streams, const std::vector<std::string>& states,
    const std::function<std::optional<std::string>(const GuardInput&)>& target) {
  std::vector<TransitionSpec> out;
  for (const auto& stream : streams) {
    for (const auto& state : states) {
      out.push_back({kAnyState, on_stream(stream),
                     [target, state](const GuardInput& in) { return target(in) == state; }, {}, state});
    }
  }
  return out;
}

MachineSpec make_machine(std::string feature, std::string actuator, std::int32_t priority,
                         std::vector<std::string> states, std::map<std::string, SettingValue> settings,
                         std::string initial, std::vector<std::string> inputs) {
  return MachineSpec{FeatureId(std::move(feature)),
                     std::move(actuator),
                     Priority{priority},
                     std::move(states),
                     std::move(settings),
                     std::move(initial),
                     {},
                     std::move(inputs),
                     {},
                     false,
                     std::nullopt,
                     false};
}

std::optional<Value> initial_value(const InitialValues& init, const ActuatorSpec& spec) {
  auto it = init.find(spec.name());
  if (it == init.end()) return std::nullopt;
  auto v = spec.parse_value(it->second);
  if (!v) throw ConfigError("init " + spec.name() + ": illegal value '" + it->second + "'");
  return v;
}

}  // namespace detail
}  // namespace featcomp
