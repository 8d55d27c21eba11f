#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "featcomp/packs.hpp"

namespace featcomp::detail {

/// Reads typed values out of config overrides; unknown keys are rejected at
/// construction.
class ConfigReader {
 public:
  ConfigReader(const ConfigOverrides& overrides, std::string_view pack);

  void integer(const std::string& key, std::int64_t& out, std::int64_t min) const;
  void window(const std::string& key, TimeWindow& out) const;
  void clock_time(const std::string& key, int& out) const;
  void choice(const std::string& key, std::string& out, const std::vector<std::string>& allowed) const;
  void flag(const std::string& key, bool& out) const;
  void list(const std::string& key, std::vector<std::string>& out) const;

 private:
  const std::string* find(const std::string& key) const;

  const ConfigOverrides& overrides_;
  std::string pack_;
};

/// Transitions from any state: for each trigger stream and each state, move
/// to that state when `target` names it. A nullopt target ignores the input.
std::vector<TransitionSpec> computed_transitions(
    const std::vector<std::string>& streams, const std::vector<std::string>& states,
    const std::function<std::optional<std::string>(const GuardInput&)>& target);

/// A machine shell with no transitions yet.
MachineSpec make_machine(std::string feature, std::string actuator, std::int32_t priority,
                         std::vector<std::string> states, std::map<std::string, SettingValue> settings,
                         std::string initial, std::vector<std::string> inputs);

std::optional<Value> initial_value(const InitialValues& init, const ActuatorSpec& spec);

}  // namespace featcomp::detail
