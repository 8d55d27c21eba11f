#pragma once

// Simulators compute virtual sensor values from real sensor streams and from
// replicas of real actuator values.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "featcomp/engine.hpp"
#include "featcomp/types.hpp"

namespace featcomp {

enum class MechOp { Lock, Unlock };

std::string_view to_string(MechOp op);  // "mechLock" / "mechUnlock"

/// Detects mechanical lock operations by comparing commands sent to the door
/// (toDoor) with state changes reported by the door sensor (fromDoor).
class MechOpDetector {
 public:
  MechOpDetector(std::string initial_state, std::int64_t expect_window_ms = 500);

  /// A command was sent to the door. Opens an expectation window unless the
  /// command matches the tracked state with nothing else outstanding.
  void on_to_door(Timestamp time, const std::string& value);
  /// A sensor report. Returns the mechanical operation it reveals, if any.
  std::optional<MechOp> on_from_door(Timestamp time, const std::string& value);
  /// Closes an expectation that was never confirmed; returns true (and arms
  /// resynchronization to the next sensor value) when one was open and due.
  bool expire(Timestamp now);

  const std::string& tracked() const { return tracked_; }
  bool expecting() const { return !expected_.empty(); }
  std::optional<Timestamp> expectation_deadline() const;

 private:
  struct Expectation {
    std::string value;
    Timestamp deadline;
  };

  std::string tracked_;
  std::vector<Expectation> expected_;  // oldest first
  bool resync_ = false;
  std::int64_t window_ms_;
};

/// Engine wrapper: reads the door feedback stream and fromDoor, writes toMO.
class MechOpModule : public Module {
 public:
  MechOpModule(MechOpDetector detector, std::string to_door_stream, std::string from_door_stream,
               std::string output_stream);

  const MechOpDetector& detector() const { return detector_; }
  void on_record(Context& ctx, const EventRecord& record) override;
  void on_timer(Context& ctx, const TimerFire& fire) override;

 private:
  MechOpDetector detector_;
  std::string to_door_;
  std::string from_door_;
  std::string output_;
  std::optional<TimerHandle> window_timer_;
};

/// A stateless stream transformer.
struct TransformerSpec {
  std::vector<std::string> inputs;
  std::string output;
  std::function<std::optional<Payload>(const EventRecord&)> fn;
};

/// Applies the transformer; the output is stamped `causal_delta` after the input.
std::optional<EventRecord> pure_transform(const TransformerSpec& spec, const EventRecord& record,
                                          std::int64_t causal_delta = 1);

class TransformerModule : public Module {
 public:
  explicit TransformerModule(TransformerSpec spec) : spec_(std::move(spec)) {}
  const TransformerSpec& spec() const { return spec_; }
  void on_record(Context& ctx, const EventRecord& record) override;

 private:
  TransformerSpec spec_;
};

ModuleId install_transformer(Engine& engine, TransformerSpec spec);

/// motion present=<bool>  ->  occupied=<bool>
TransformerSpec occupancy_transform(std::string input, std::string output);
/// skylight lux=<int>  ->  band=dark|dim|bright, with dark < dim_lux <= dim < bright_lux <= bright.
TransformerSpec brightness_band_transform(std::string input, std::string output,
                                          std::int64_t dim_lux, std::int64_t bright_lux);
/// presence away=<bool>  ->  vacation=<bool>
TransformerSpec vacation_transform(std::string input, std::string output);

/// A daily time window "HH:MM-HH:MM", possibly wrapping midnight.
struct TimeWindow {
  int start_minute = 0;
  int end_minute = 0;

  static TimeWindow parse(std::string_view text);  // throws ContractViolation
  bool contains_minute(int minute_of_day) const;
  std::string to_string() const;
};

int parse_clock_time(std::string_view hhmm);  // minutes after midnight; throws

/// Maps scenario milliseconds onto time of day given the clock origin.
struct Clock {
  int origin_minute = 0;

  static constexpr std::int64_t kDayMs = 24LL * 60 * 60 * 1000;
  std::int64_t ms_of_day(Timestamp t) const;
  bool in_window(const TimeWindow& w, Timestamp t) const;
  /// First time strictly after `t` at which window membership flips.
  Timestamp next_boundary(const TimeWindow& w, Timestamp t) const;
  int hour(Timestamp t) const;
  Timestamp next_hour(Timestamp t) const;
};

/// Virtual time-of-day sensor. On the start record it publishes the current
/// membership of each window (stream "clock.<name>", active=0/1) and, when
/// enabled, the hour (stream "clock.hour", hour=<h>); afterwards it
/// publishes at every boundary.
class ClockModule : public Module {
 public:
  ClockModule(Clock clock, std::vector<std::pair<std::string, TimeWindow>> windows,
              bool hourly);

  void on_record(Context& ctx, const EventRecord& record) override;
  void on_timer(Context& ctx, const TimerFire& fire) override;

 private:
  void schedule(Context& ctx);

  Clock clock_;
  std::vector<std::pair<std::string, TimeWindow>> windows_;
  bool hourly_;
};

/// Physical door: follows lock commands after a delay and reports state
/// changes on fromDoor. Also tracks changes reported by fromDoor itself, so
/// a scenario can inject key turns directly.
class DoorPlant : public Module {
 public:
  DoorPlant(std::string initial_state, std::string command_stream, std::string sensor_stream,
            std::int64_t delay_ms);

  const std::string& state() const { return state_; }
  void on_record(Context& ctx, const EventRecord& record) override;

 private:
  std::string state_;
  std::string command_stream_;
  std::string sensor_stream_;
  std::int64_t delay_ms_;
};

}  // namespace featcomp
