#include "featcomp/simulators.hpp"

#include <algorithm>
#include <charconv>

namespace featcomp {

std::string_view to_string(MechOp op) { return op == MechOp::Lock ? "mechLock" : "mechUnlock"; }

MechOpDetector::MechOpDetector(std::string initial_state, std::int64_t expect_window_ms)
    : tracked_(std::move(initial_state)), window_ms_(expect_window_ms) {
  if (window_ms_ <= 0) throw ContractViolation("expectation window must be positive");
}

void MechOpDetector::on_to_door(Timestamp time, const std::string& value) {
  expire(time);
  if (expected_.empty() && value == tracked_) return;
  expected_.push_back({value, time + window_ms_});
}

std::optional<MechOp> MechOpDetector::on_from_door(Timestamp time, const std::string& value) {
  expire(time);
  if (value == tracked_) return std::nullopt;
  auto hit = std::find_if(expected_.begin(), expected_.end(),
                          [&](const Expectation& e) { return e.value == value; });
  if (hit != expected_.end()) {
    expected_.erase(expected_.begin(), hit + 1);
    tracked_ = value;
    resync_ = false;
    return std::nullopt;
  }
  tracked_ = value;
  if (resync_) {
    resync_ = false;
    return std::nullopt;
  }
  return value == "locked" ? MechOp::Lock : MechOp::Unlock;
}

bool MechOpDetector::expire(Timestamp now) {
  bool warned = false;
  while (!expected_.empty() && expected_.front().deadline < now) {
    if (expected_.front().value != tracked_) warned = true;
    expected_.erase(expected_.begin());
  }
  if (warned) resync_ = true;
  return warned;
}

std::optional<Timestamp> MechOpDetector::expectation_deadline() const {
  if (expected_.empty()) return std::nullopt;
  return expected_.front().deadline;
}

MechOpModule::MechOpModule(MechOpDetector detector, std::string to_door_stream,
                           std::string from_door_stream, std::string output_stream)
    : detector_(std::move(detector)),
      to_door_(std::move(to_door_stream)),
      from_door_(std::move(from_door_stream)),
      output_(std::move(output_stream)) {}

void MechOpModule::on_record(Context& ctx, const EventRecord& record) {
  if (record.stream == to_door_) {
    auto value = record.payload.text("value");
    if (!value) return;
    detector_.on_to_door(record.time, *value);
    if (!window_timer_) {
      if (auto deadline = detector_.expectation_deadline()) {
        window_timer_ = ctx.set_timer(*deadline + 1, "window");
      }
    }
    return;
  }
  if (record.stream == from_door_) {
    auto value = record.payload.text("state");
    if (!value) return;
    if (auto op = detector_.on_from_door(record.time, *value)) {
      ctx.publish(output_, Payload{{"event", std::string(to_string(*op))}});
    }
  }
}

void MechOpModule::on_timer(Context& ctx, const TimerFire& fire) {
  if (!window_timer_ || *window_timer_ != fire.handle) return;
  window_timer_.reset();
  if (detector_.expire(ctx.now())) {
    ctx.diagnose("mechOp", "door did not confirm command; resynchronizing to next sensor value");
  }
  if (auto deadline = detector_.expectation_deadline()) {
    window_timer_ = ctx.set_timer(std::max(*deadline + 1, ctx.now() + 1), "window");
  }
}

std::optional<EventRecord> pure_transform(const TransformerSpec& spec, const EventRecord& record,
                                          std::int64_t causal_delta) {
  if (std::find(spec.inputs.begin(), spec.inputs.end(), record.stream) == spec.inputs.end()) {
    return std::nullopt;
  }
  auto out = spec.fn(record);
  if (!out) return std::nullopt;
  return EventRecord{record.time + causal_delta, 0, spec.output, std::move(*out)};
}

void TransformerModule::on_record(Context& ctx, const EventRecord& record) {
  if (auto out = pure_transform(spec_, record, ctx.causal_delta())) {
    out->time = std::max(out->time, ctx.now() + ctx.causal_delta());
    ctx.publish(std::move(*out));
  }
}

ModuleId install_transformer(Engine& engine, TransformerSpec spec) {
  auto inputs = spec.inputs;
  engine.emplace_module<TransformerModule>(std::move(spec));
  auto id = engine.last_module_id();
  for (const auto& s : inputs) engine.subscribe(s, id);
  return id;
}

namespace {

std::optional<bool> flag(const EventRecord& r, std::string_view key) {
  auto text = r.payload.text(key);
  if (!text) return std::nullopt;
  return parse_bool(*text);
}

}  // namespace

TransformerSpec occupancy_transform(std::string input, std::string output) {
  return {{std::move(input)}, std::move(output), [](const EventRecord& r) -> std::optional<Payload> {
            auto present = flag(r, "present");
            if (!present) return std::nullopt;
            return Payload{{"occupied", std::int64_t{*present ? 1 : 0}}};
          }};
}

TransformerSpec brightness_band_transform(std::string input, std::string output,
                                          std::int64_t dim_lux, std::int64_t bright_lux) {
  if (dim_lux > bright_lux) throw ContractViolation("skylight thresholds must be ordered");
  return {{std::move(input)}, std::move(output),
          [dim_lux, bright_lux](const EventRecord& r) -> std::optional<Payload> {
            auto lux = r.payload.integer("lux");
            if (!lux) return std::nullopt;
            std::string band = *lux >= bright_lux ? "bright" : *lux >= dim_lux ? "dim" : "dark";
            return Payload{{"band", band}};
          }};
}

TransformerSpec vacation_transform(std::string input, std::string output) {
  return {{std::move(input)}, std::move(output), [](const EventRecord& r) -> std::optional<Payload> {
            auto away = flag(r, "away");
            if (!away) return std::nullopt;
            return Payload{{"vacation", std::int64_t{*away ? 1 : 0}}};
          }};
}

int parse_clock_time(std::string_view hhmm) {
  auto colon = hhmm.find(':');
  int h = -1;
  int m = -1;
  if (colon != std::string_view::npos) {
    auto hs = hhmm.substr(0, colon);
    auto ms = hhmm.substr(colon + 1);
    auto r1 = std::from_chars(hs.data(), hs.data() + hs.size(), h);
    auto r2 = std::from_chars(ms.data(), ms.data() + ms.size(), m);
    if (r1.ptr != hs.data() + hs.size() || r2.ptr != ms.data() + ms.size() || ms.size() != 2) {
      h = -1;
    }
  }
  if (h < 0 || h > 23 || m < 0 || m > 59) {
    throw ContractViolation("malformed clock time '" + std::string(hhmm) + "', expected HH:MM");
  }
  return h * 60 + m;
}

TimeWindow TimeWindow::parse(std::string_view text) {
  auto dash = text.find('-');
  if (dash == std::string_view::npos) {
    throw ContractViolation("malformed time window '" + std::string(text) + "', expected HH:MM-HH:MM");
  }
  TimeWindow w{parse_clock_time(text.substr(0, dash)), parse_clock_time(text.substr(dash + 1))};
  if (w.start_minute == w.end_minute) {
    throw ContractViolation("time window '" + std::string(text) + "' is empty");
  }
  return w;
}

bool TimeWindow::contains_minute(int minute) const {
  if (start_minute < end_minute) return minute >= start_minute && minute < end_minute;
  return minute >= start_minute || minute < end_minute;
}

std::string TimeWindow::to_string() const {
  auto fmt = [](int minutes) {
    std::string h = std::to_string(minutes / 60);
    std::string m = std::to_string(minutes % 60);
    return (h.size() < 2 ? "0" + h : h) + ":" + (m.size() < 2 ? "0" + m : m);
  };
  return fmt(start_minute) + "-" + fmt(end_minute);
}

std::int64_t Clock::ms_of_day(Timestamp t) const {
  auto v = (std::int64_t{origin_minute} * 60000 + t.ms) % kDayMs;
  return v < 0 ? v + kDayMs : v;
}

bool Clock::in_window(const TimeWindow& w, Timestamp t) const {
  return w.contains_minute(static_cast<int>(ms_of_day(t) / 60000));
}

Timestamp Clock::next_boundary(const TimeWindow& w, Timestamp t) const {
  auto now = ms_of_day(t);
  auto until = [&](int minute) {
    auto d = (std::int64_t{minute} * 60000 - now) % kDayMs;
    if (d <= 0) d += kDayMs;
    return d;
  };
  return t + std::min(until(w.start_minute), until(w.end_minute));
}

int Clock::hour(Timestamp t) const { return static_cast<int>(ms_of_day(t) / 3600000); }

Timestamp Clock::next_hour(Timestamp t) const { return t + (3600000 - ms_of_day(t) % 3600000); }

ClockModule::ClockModule(Clock clock, std::vector<std::pair<std::string, TimeWindow>> windows,
                         bool hourly)
    : clock_(clock), windows_(std::move(windows)), hourly_(hourly) {}

void ClockModule::on_record(Context& ctx, const EventRecord& record) {
  if (record.payload.text("event") != "start") return;
  for (const auto& [name, w] : windows_) {
    ctx.publish("clock." + name, Payload{{"active", std::int64_t{clock_.in_window(w, ctx.now()) ? 1 : 0}}});
  }
  if (hourly_) ctx.publish("clock.hour", Payload{{"hour", std::int64_t{clock_.hour(ctx.now())}}});
  schedule(ctx);
}

void ClockModule::schedule(Context& ctx) {
  for (const auto& [name, w] : windows_) {
    ctx.set_timer(clock_.next_boundary(w, ctx.now()), "w:" + name);
  }
  if (hourly_) ctx.set_timer(clock_.next_hour(ctx.now()), "hour");
}

void ClockModule::on_timer(Context& ctx, const TimerFire& fire) {
  if (fire.tag == "hour") {
    ctx.publish("clock.hour", Payload{{"hour", std::int64_t{clock_.hour(ctx.now())}}});
    ctx.set_timer(clock_.next_hour(ctx.now()), "hour");
    return;
  }
  for (const auto& [name, w] : windows_) {
    if (fire.tag != "w:" + name) continue;
    ctx.publish("clock." + name, Payload{{"active", std::int64_t{clock_.in_window(w, ctx.now()) ? 1 : 0}}});
    ctx.set_timer(clock_.next_boundary(w, ctx.now()), fire.tag);
  }
}

DoorPlant::DoorPlant(std::string initial_state, std::string command_stream,
                     std::string sensor_stream, std::int64_t delay_ms)
    : state_(std::move(initial_state)),
      command_stream_(std::move(command_stream)),
      sensor_stream_(std::move(sensor_stream)),
      delay_ms_(delay_ms) {
  if (delay_ms_ < 1) throw ContractViolation("door plant delay must be positive");
}

void DoorPlant::on_record(Context& ctx, const EventRecord& record) {
  if (record.stream == sensor_stream_) {
    if (auto s = record.payload.text("state")) state_ = *s;
    return;
  }
  if (record.stream != command_stream_ || record.payload.find("init")) return;
  auto value = record.payload.text("value");
  if (!value || *value == state_) return;
  state_ = *value;
  ctx.publish(EventRecord{ctx.now() + delay_ms_, 0, sensor_stream_, Payload{{"state", *value}}});
}

}  // namespace featcomp
