#include "featcomp/engine.hpp"

#include <algorithm>

namespace featcomp {

std::string_view to_string(TraceKind kind) {
  switch (kind) {
    case TraceKind::Command: return "command";
    case TraceKind::Feedback: return "feedback";
    case TraceKind::Display: return "display";
    case TraceKind::Diagnostic: return "diagnostic";
  }
  return "diagnostic";
}

Timestamp Context::now() const { return engine_.now_; }

std::int64_t Context::causal_delta() const { return engine_.options_.causal_delta; }

std::uint64_t Context::publish(std::string stream, Payload payload) {
  return engine_.enqueue_record({now() + causal_delta(), 0, std::move(stream), std::move(payload)});
}

std::uint64_t Context::publish(EventRecord record) {
  if (record.time < now() + causal_delta()) {
    throw ContractViolation("record on stream '" + record.stream + "' stamped T=" +
                            std::to_string(record.time.ms) + " is not later than its cause at T=" +
                            std::to_string(now().ms));
  }
  return engine_.enqueue_record(std::move(record));
}

TimerHandle Context::set_timer(Timestamp fire_at, std::string tag) {
  if (fire_at <= now()) {
    throw ContractViolation("timer '" + tag + "' must fire after T=" + std::to_string(now().ms));
  }
  return engine_.set_timer(self_, fire_at, std::move(tag));
}

void Context::cancel_timer(TimerHandle handle) { engine_.cancel_timer(handle); }

void Context::trace(TraceLine line) { engine_.add_trace(std::move(line)); }

void Context::diagnose(std::string name, std::string message) {
  engine_.add_trace({now(), cause_seq_, TraceKind::Diagnostic, std::move(name), std::move(message), {}, {}});
}

Engine::Engine(EngineOptions options) : options_(options) {
  if (options_.causal_delta < 1) throw ContractViolation("causal delta must be positive");
}

ModuleId Engine::add_module(std::unique_ptr<Module> module) {
  modules_.push_back(std::move(module));
  return modules_.size() - 1;
}

void Engine::subscribe(const std::string& stream, ModuleId module) {
  if (module >= modules_.size()) throw ContractViolation("subscribe: unknown module");
  auto& subs = subscriptions_[stream];
  if (std::find(subs.begin(), subs.end(), module) == subs.end()) subs.push_back(module);
}

std::size_t Engine::subscriber_count(const std::string& stream) const {
  auto it = subscriptions_.find(stream);
  return it == subscriptions_.end() ? 0 : it->second.size();
}

std::uint64_t Engine::publish(EventRecord record) {
  if (delivering_) throw ContractViolation("publish during a delivery must go through its Context");
  if (record.time < now_) {
    throw ContractViolation("external record on '" + record.stream + "' precedes engine time");
  }
  return enqueue_record(std::move(record));
}

std::uint64_t Engine::enqueue_record(EventRecord record) {
  record.seq = next_seq_++;
  auto time = record.time;
  auto seq = record.seq;
  queue_.push({time, seq, std::move(record), 0});
  return seq;
}

TimerHandle Engine::set_timer(ModuleId owner, Timestamp fire_at, std::string tag) {
  if (owner >= modules_.size()) throw ContractViolation("set_timer: unknown module");
  if (fire_at < now_) throw ContractViolation("set_timer: fire time precedes engine time");
  TimerHandle handle{next_seq_++};
  queue_.push({fire_at, handle.id, TimerFire{handle, fire_at, std::move(tag)}, owner});
  live_timers_.insert(handle.id);
  return handle;
}

void Engine::cancel_timer(TimerHandle handle) {
  if (live_timers_.erase(handle.id) > 0) cancelled_.insert(handle.id);
}

void Engine::add_trace(TraceLine line) { trace_.push_back(std::move(line)); }

void Engine::deliver(const Item& item) {
  if (const auto* record = std::get_if<EventRecord>(&item.payload)) {
    auto it = subscriptions_.find(record->stream);
    if (it == subscriptions_.end()) return;
    // Copy: a module may subscribe others while handling this record.
    auto subscribers = it->second;
    for (auto id : subscribers) {
      Context ctx(*this, id, item.seq);
      modules_[id]->on_record(ctx, *record);
    }
    return;
  }
  const auto& fire = std::get<TimerFire>(item.payload);
  live_timers_.erase(fire.handle.id);
  Context ctx(*this, item.owner, item.seq);
  modules_[item.owner]->on_timer(ctx, fire);
}

const std::vector<TraceLine>& Engine::run(Timestamp end) {
  while (!queue_.empty() && queue_.top().time <= end) {
    Item item = queue_.top();
    queue_.pop();
    if (std::holds_alternative<TimerFire>(item.payload) && cancelled_.erase(item.seq) > 0) {
      continue;
    }
    if (steps_ >= options_.max_steps) {
      add_trace({item.time, item.seq, TraceKind::Diagnostic, "engine",
                 "possible non-quiescent feedback loop: " + std::to_string(options_.max_steps) +
                     " steps exhausted",
                 {}, {}});
      sort_trace();
      throw EngineAbort("possible non-quiescent feedback loop: step budget of " +
                        std::to_string(options_.max_steps) + " exhausted at T=" +
                        std::to_string(item.time.ms));
    }
    ++steps_;
    now_ = item.time;
    delivering_ = true;
    try {
      deliver(item);
    } catch (const ContractViolation& e) {
      delivering_ = false;
      add_trace({now_, item.seq, TraceKind::Diagnostic, "engine", e.what(), {}, {}});
      sort_trace();
      throw EngineAbort(std::string("contract violation: ") + e.what());
    }
    delivering_ = false;
  }
  sort_trace();
  return trace_;
}

void Engine::sort_trace() {
  std::stable_sort(trace_.begin(), trace_.end(), [](const TraceLine& a, const TraceLine& b) {
    if (a.time != b.time) return a.time < b.time;
    if (a.seq != b.seq) return a.seq < b.seq;
    return a.kind < b.kind;
  });
}

}  // namespace featcomp
