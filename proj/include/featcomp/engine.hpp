#pragma once

// Deterministic discrete-event engine: named streams with fan-out
// subscription, per-module timers, causality-respecting timestamps and
// run-to-horizon execution. Concurrency of the modelled system is serialized
// into a single total order on (time, seq).

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "featcomp/types.hpp"

namespace featcomp {

using ModuleId = std::size_t;

struct TimerHandle {
  std::uint64_t id = 0;
  friend constexpr auto operator<=>(TimerHandle, TimerHandle) = default;
};

struct TimerFire {
  TimerHandle handle;
  Timestamp time;
  std::string tag;
};

enum class TraceKind { Command, Feedback, Display, Diagnostic };

std::string_view to_string(TraceKind kind);

struct TraceLine {
  Timestamp time;
  std::uint64_t seq = 0;
  TraceKind kind = TraceKind::Diagnostic;
  std::string name;
  std::string value;
  std::vector<FeatureKey> by;
  std::vector<std::string> notes;  // explanation lines attached to commands
};

/// The run was aborted: step budget exhausted or a causality contract broken.
class EngineAbort : public Error {
 public:
  using Error::Error;
};

class Engine;

/// Handed to a module for the duration of one delivery.
class Context {
 public:
  Timestamp now() const;
  std::int64_t causal_delta() const;
  ModuleId self() const { return self_; }

  /// Publishes at now + causal delta.
  std::uint64_t publish(std::string stream, Payload payload);
  /// Publishes at an explicit time, which must be >= now + causal delta.
  std::uint64_t publish(EventRecord record);
  TimerHandle set_timer(Timestamp fire_at, std::string tag);
  void cancel_timer(TimerHandle handle);
  void trace(TraceLine line);
  /// Adds a diagnostic trace line at the current time.
  void diagnose(std::string name, std::string message);

 private:
  friend class Engine;
  Context(Engine& engine, ModuleId self, std::uint64_t cause_seq)
      : engine_(engine), self_(self), cause_seq_(cause_seq) {}

  Engine& engine_;
  ModuleId self_;
  std::uint64_t cause_seq_;
};

class Module {
 public:
  virtual ~Module() = default;
  virtual void on_record(Context& ctx, const EventRecord& record) = 0;
  virtual void on_timer(Context& /*ctx*/, const TimerFire& /*fire*/) {}
};

struct EngineOptions {
  std::int64_t causal_delta = 1;
  std::uint64_t max_steps = 100000;
};

class Engine {
 public:
  explicit Engine(EngineOptions options = {});
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  ModuleId add_module(std::unique_ptr<Module> module);
  template <class M, class... Args>
  M& emplace_module(Args&&... args) {
    auto owned = std::make_unique<M>(std::forward<Args>(args)...);
    M& ref = *owned;
    add_module(std::move(owned));
    return ref;
  }
  ModuleId last_module_id() const { return modules_.size() - 1; }

  /// Idempotent: a module subscribed twice still receives one delivery.
  void subscribe(const std::string& stream, ModuleId module);
  std::size_t subscriber_count(const std::string& stream) const;

  /// External publication (outside any delivery). The record keeps its
  /// declared time, which must not precede the current engine time.
  std::uint64_t publish(EventRecord record);
  TimerHandle set_timer(ModuleId owner, Timestamp fire_at, std::string tag);
  /// No-op for fired or unknown handles.
  void cancel_timer(TimerHandle handle);

  /// Delivers every pending item with time <= end, in (time, seq) order, and
  /// returns the trace collected so far ordered by (time, seq). Throws
  /// EngineAbort when the step budget is exhausted.
  const std::vector<TraceLine>& run(Timestamp end);

  Timestamp now() const { return now_; }
  std::uint64_t step_count() const { return steps_; }
  const EngineOptions& options() const { return options_; }
  const std::vector<TraceLine>& trace() const { return trace_; }
  void add_trace(TraceLine line);
  std::size_t pending() const { return queue_.size() - cancelled_.size(); }

 private:
  friend class Context;

  struct Item {
    Timestamp time;
    std::uint64_t seq;
    std::variant<EventRecord, TimerFire> payload;
    ModuleId owner = 0;  // timers only
  };
  struct Later {
    bool operator()(const Item& a, const Item& b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.seq > b.seq;
    }
  };

  std::uint64_t enqueue_record(EventRecord record);
  void deliver(const Item& item);
  void sort_trace();

  EngineOptions options_;
  std::vector<std::unique_ptr<Module>> modules_;
  std::map<std::string, std::vector<ModuleId>> subscriptions_;
  std::priority_queue<Item, std::vector<Item>, Later> queue_;
  std::set<std::uint64_t> cancelled_;
  std::set<std::uint64_t> live_timers_;
  std::vector<TraceLine> trace_;
  Timestamp now_{0};
  std::uint64_t next_seq_ = 1;
  std::uint64_t steps_ = 0;
  bool delivering_ = false;
};

}  // namespace featcomp
