#pragma once

// Executable example systems: a front-door lock, a corridor dimmer and a home
// furnace. Each pack wires feature machines, coordinators, simulators and
// streams into one engine.

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "featcomp/coordinator.hpp"
#include "featcomp/engine.hpp"
#include "featcomp/machine.hpp"
#include "featcomp/simulators.hpp"

namespace featcomp {

class ConfigError : public Error {
 public:
  using Error::Error;
};

using ConfigOverrides = std::map<std::string, std::string>;
using InitialValues = std::map<std::string, std::string>;  // actuator -> value text

struct StreamSchema {
  std::string stream;
  std::vector<std::string> keys;
};

struct PackInfo {
  std::string name;
  std::vector<std::string> config_keys;
  std::vector<StreamSchema> inputs;  // streams a scenario may write
  std::vector<std::string> actuators;

  const StreamSchema* input(std::string_view stream) const;
  bool has_config_key(std::string_view key) const;
  bool has_actuator(std::string_view name) const;
};

const std::vector<PackInfo>& pack_catalog();
const PackInfo* find_pack(std::string_view name);

/// Hosts a Coordinator on the engine: decodes setting records from
/// "<actuator>.settings", arms expiry timers, settles immediate-tagged
/// settings, publishes feedback on "<actuator>.real" and logs commands.
class CoordinatorModule : public Module {
 public:
  explicit CoordinatorModule(Coordinator coordinator) : coordinator_(std::move(coordinator)) {}

  const Coordinator& coordinator() const { return coordinator_; }
  const std::vector<Command>& commands() const { return commands_; }
  void set_explain(bool on) { explain_ = on; }

  void on_record(Context& ctx, const EventRecord& record) override;
  void on_timer(Context& ctx, const TimerFire& fire) override;

 private:
  void emit(Context& ctx, Outcome outcome);
  void settle(Context& ctx);

  Coordinator coordinator_;
  std::vector<Command> commands_;
  std::map<TimerHandle, ExpiryTimer> expiries_;
  bool explain_ = false;
};

/// Append-only message display; every delivered message becomes a display
/// trace line.
class DisplayModule : public Module {
 public:
  const std::vector<std::string>& messages(const std::string& stream) const;
  void on_record(Context& ctx, const EventRecord& record) override;

 private:
  std::map<std::string, std::vector<std::string>> messages_;
};

/// A wired system: engine, coordinators and feature machines.
class System {
 public:
  explicit System(std::string pack, EngineOptions options = {});

  Engine& engine() { return engine_; }
  const Engine& engine() const { return engine_; }
  const std::string& pack() const { return pack_; }

  CoordinatorModule& add_actuator(ActuatorSpec spec, std::optional<Value> initial);
  /// Rejects a second machine with the same (feature, priority) on one actuator.
  FeatureMachine& add_machine(MachineSpec spec);
  DisplayModule& add_displays(const std::vector<std::string>& streams);

  const ActuatorSpec& actuator(const std::string& name) const;
  const Coordinator& coordinator(const std::string& name) const;
  const CoordinatorModule& coordinator_module(const std::string& name) const;
  const FeatureMachine& machine(const std::string& feature) const;
  const DisplayModule* displays() const { return displays_; }
  std::vector<std::string> actuator_names() const;

  void set_explain(bool on);
  /// Publishes the start record and the initial actuator values at T=0.
  void start();

 private:
  std::string pack_;
  Engine engine_;
  std::map<std::string, ActuatorSpec> actuators_;
  std::map<std::string, CoordinatorModule*> coordinators_;
  std::map<std::string, const FeatureMachine*> machines_;
  std::set<std::pair<std::string, FeatureKey>> keys_;
  DisplayModule* displays_ = nullptr;
  bool started_ = false;
};

// ---------------------------------------------------------------------------
// Door lock

struct DoorLockConfig {
  std::int64_t eo_duration_ms = 60000;
  std::int64_t hfe_duration_ms = 180000;
  TimeWindow night{22 * 60, 6 * 60};
  int clock_origin_minute = 0;
  std::vector<std::string> passcodes{"1234"};
  std::set<std::string> passcode_required{"outside.requestUnlock"};  // "<panel>.<op>"
  std::string initial_lock = "locked";
  std::int64_t expect_window_ms = 500;
  std::int64_t plant_delay_ms = 50;

  static DoorLockConfig from(const ConfigOverrides& overrides);
  bool authorized(const std::string& panel, const std::string& op, const std::string& code) const;
};

inline constexpr std::int32_t kEoPriority = 40;
inline constexpr std::int32_t kMoPriority = 40;
inline constexpr std::int32_t kIdPriority = 30;
inline constexpr std::int32_t kHfePriority = 20;
inline constexpr std::int32_t kNlPriority = 10;

ActuatorSpec door_lock_actuator();
MachineSpec electronic_operation_spec(const DoorLockConfig& config);
MachineSpec mechanical_operation_spec(const DoorLockConfig& config);
MachineSpec intruder_defense_spec();
MachineSpec hands_free_entry_spec(const DoorLockConfig& config);
MachineSpec night_lock_spec();

std::unique_ptr<System> build_door_lock(const DoorLockConfig& config, const InitialValues& init,
                                        EngineOptions options = {});

// ---------------------------------------------------------------------------
// Corridor dimmer

struct DimmerConfig {
  TimeWindow sleep{23 * 60, 7 * 60};
  int clock_origin_minute = 0;
  std::string season = "sunny";  // sunny | dark
  std::int64_t safety_sleep_min = 10;
  std::int64_t safety_awake_min = 30;
  std::int64_t health_min_sunny = 40;
  std::int64_t health_min_dark = 60;
  std::int64_t pleasant_min = 30;
  std::int64_t skylight_dim_lux = 100;
  std::int64_t skylight_bright_lux = 1000;
  bool energy = true;

  static DimmerConfig from(const ConfigOverrides& overrides);
  /// Awake-time health minimum for a skylight band (0 means no constraint).
  std::int64_t health_level(const std::string& band) const;
  std::int64_t pleasant_level(const std::string& band) const;
};

ActuatorSpec dimmer_actuator();
MachineSpec safety_spec(const DimmerConfig& config);
MachineSpec health_spec(const DimmerConfig& config);
MachineSpec pleasantness_spec(const DimmerConfig& config);
MachineSpec energy_spec();

std::unique_ptr<System> build_dimmer(const DimmerConfig& config, const InitialValues& init,
                                     EngineOptions options = {});

// ---------------------------------------------------------------------------
// Furnace

struct FurnaceConfig {
  std::int64_t protection_ms = 300000;
  std::int64_t vacation_setpoint = 12;
  std::int64_t hysteresis = 0;  // 0: on iff house temperature < setpoint
  std::int64_t thermostat_min = 5;
  std::int64_t thermostat_max = 35;
  int clock_origin_minute = 0;

  static FurnaceConfig from(const ConfigOverrides& overrides);
};

ActuatorSpec thermostat_actuator(const FurnaceConfig& config);
ActuatorSpec furnace_actuator();
MachineSpec vacation_spec(const FurnaceConfig& config);
MachineSpec manual_thermostat_spec(const FurnaceConfig& config);
MachineSpec learning_thermostat_spec(const FurnaceConfig& config);
MachineSpec emergency_shutoff_spec();
MachineSpec furnace_protection_spec(const FurnaceConfig& config);
MachineSpec energy_saving_spec();
MachineSpec basic_operation_spec(const FurnaceConfig& config);

std::unique_ptr<System> build_furnace(const FurnaceConfig& config, const InitialValues& init,
                                      EngineOptions options = {});

/// Builds a pack by name; throws ConfigError on unknown packs, keys or values.
std::unique_ptr<System> build_pack(std::string_view name, const ConfigOverrides& overrides,
                                   const InitialValues& init, EngineOptions options = {});

}  // namespace featcomp
