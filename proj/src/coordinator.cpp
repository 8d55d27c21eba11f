#include "featcomp/coordinator.hpp"

#include <algorithm>

namespace featcomp {

namespace {

std::optional<Range> intersect(Range a, Range b) {
  Range r{std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
  if (r.lo > r.hi) return std::nullopt;
  return r;
}

bool disjoint(Range a, Range b) { return !intersect(a, b).has_value(); }

}  // namespace

bool Resolution::is_in_force(const FeatureKey& key) const {
  return std::find(in_force.begin(), in_force.end(), key) != in_force.end();
}

Coordinator::Coordinator(ActuatorSpec actuator, std::optional<Value> initial,
                         std::int64_t causal_delta)
    : actuator_(std::move(actuator)), old_set_(std::move(initial)), causal_delta_(causal_delta) {
  if (old_set_ && !actuator_.is_legal_value(*old_set_)) {
    throw ContractViolation("initial value '" + to_string(*old_set_) +
                            "' is not legal for actuator " + actuator_.name());
  }
  if (causal_delta_ < 1) throw ContractViolation("causal delta must be positive");
}

void Coordinator::insert_record(const SettingRecord& rec, std::uint64_t seq,
                                const Annotation& ann) {
  actuator_.check_legal(rec.setting);
  if (ann.expires_at && *ann.expires_at <= rec.time) {
    throw ContractViolation("expiry must be later than the record time");
  }

  auto match = std::find_if(records_.begin(), records_.end(), [&](const ListedRecord& l) {
    return l.record().feature == rec.feature && l.record().priority == rec.priority;
  });
  if (match != records_.end()) records_.erase(match);
  if (rec.setting.is_dont_care()) return;

  ListedRecord listed{{rec, seq}, ann};
  auto pos = std::find_if(records_.begin(), records_.end(), [&](const ListedRecord& l) {
    return record_order(listed.entry, l.entry);
  });
  records_.insert(pos, std::move(listed));
}

Resolution Coordinator::choose_setting() const {
  Resolution res;
  if (records_.empty()) return res;
  res.in_force.reserve(records_.size());

  if (!actuator_.is_numeric()) {
    res.new_set = records_.front().record().setting;
    for (const auto& l : records_) {
      if (l.record().setting == res.new_set) res.in_force.push_back(l.record().key());
    }
    return res;
  }

  const auto& bounds = actuator_.numeric_kind();
  Range admitted{bounds.min, bounds.max};
  std::optional<Direction> preference;
  for (const auto& l : records_) {
    const auto& s = l.record().setting;
    if (const auto* r = s.as_range()) {
      auto narrowed = intersect(admitted, *r);
      if (!narrowed) continue;
      admitted = *narrowed;
    } else if (const auto* p = s.as_prefer()) {
      if (!preference) preference = p->direction;
    }
    res.in_force.push_back(l.record().key());
  }
  if (preference) {
    auto v = *preference == Direction::Lowest ? admitted.lo : admitted.hi;
    admitted = {v, v};
  }
  res.new_set = SettingValue::range(admitted.lo, admitted.hi);
  return res;
}

Value Coordinator::pick_in_range(Range r) const {
  if (old_set_) {
    if (const auto* old = std::get_if<std::int64_t>(&*old_set_)) {
      if (*old > r.hi) return r.hi;
    }
  }
  return r.lo;
}

std::optional<Value> Coordinator::decide_output(const Resolution& res) {
  if (res.new_set.is_dont_care()) return std::nullopt;
  if (const auto* d = res.new_set.as_discrete()) {
    Value v{d->symbol};
    if (old_set_ == v) return std::nullopt;
    old_set_ = v;
    return v;
  }
  const auto& r = *res.new_set.as_range();
  if (old_set_) {
    if (const auto* old = std::get_if<std::int64_t>(&*old_set_); old && r.lo <= *old && *old <= r.hi) {
      return std::nullopt;
    }
  }
  Value v = pick_in_range(r);
  old_set_ = v;
  return v;
}

Outcome Coordinator::finish(Timestamp cause_time) {
  Outcome out;
  auto res = choose_setting();
  if (auto v = decide_output(res)) {
    auto at = cause_time + causal_delta_;
    out.commands.push_back({at, *v, std::move(res.in_force)});
    out.feedback.push_back({at, 0, feedback_stream(actuator_.name()), Payload{{"value", *v}}});
  }
  return out;
}

Outcome Coordinator::process(const SettingRecord& rec, std::uint64_t seq, const Annotation& ann) {
  insert_record(rec, seq, ann);
  auto out = finish(rec.time);
  if (ann.expires_at && !rec.setting.is_dont_care()) {
    out.timers.push_back({rec.key(), rec.time, *ann.expires_at});
  }
  return out;
}

Outcome Coordinator::expire_setting(const FeatureKey& key, Timestamp stamped, Timestamp now) {
  auto match = std::find_if(records_.begin(), records_.end(), [&](const ListedRecord& l) {
    return l.record().key() == key;
  });
  if (match == records_.end() || match->record().time != stamped) return {};
  records_.erase(match);
  return finish(now);
}

Outcome Coordinator::on_feedback_for_immediate(const Value& real, Timestamp now) {
  Outcome out;
  Value current = real;
  for (;;) {
    auto res = choose_setting();
    auto before = records_.size();
    std::erase_if(records_, [&](const ListedRecord& l) {
      return l.annotation.immediate &&
             (!res.is_in_force(l.record().key()) || !satisfies(current, l.record().setting));
    });
    if (records_.size() == before) break;
    auto step = finish(now);
    if (!step.commands.empty()) current = step.commands.back().value;
    for (auto& c : step.commands) out.commands.push_back(std::move(c));
    for (auto& f : step.feedback) out.feedback.push_back(std::move(f));
  }
  return out;
}

ExplainReport Coordinator::explain() const {
  ExplainReport report{actuator_.name(), {}, old_set_};
  auto res = choose_setting();
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& l = records_[i];
    ExplainLine line{l.record().key(), l.record().setting, l.record().time,
                     res.is_in_force(l.record().key()), l.annotation, std::nullopt};
    if (!line.in_force) {
      if (!actuator_.is_numeric()) {
        line.blocked_by = records_.front().record().key();
      } else if (const auto* mine = l.record().setting.as_range()) {
        for (std::size_t j = 0; j < i; ++j) {
          const auto* other = records_[j].record().setting.as_range();
          if (other && res.is_in_force(records_[j].record().key()) && disjoint(*mine, *other)) {
            line.blocked_by = records_[j].record().key();
            break;
          }
        }
      }
    }
    report.lines.push_back(std::move(line));
  }
  return report;
}

std::vector<std::string> render(const ExplainReport& report) {
  std::vector<std::string> out;
  const std::string prefix = report.actuator + ": ";
  if (report.lines.empty()) {
    out.push_back(prefix + "actuator holds last value: " +
                  (report.holding ? to_string(*report.holding) : std::string("dontCare")));
    return out;
  }
  for (const auto& l : report.lines) {
    std::string s = prefix + to_string(l.key) + " " + to_string(l.setting) +
                    " t=" + std::to_string(l.time.ms);
    if (l.in_force) {
      s += " in force";
    } else if (l.blocked_by) {
      s += " ineffectual under " + l.blocked_by->feature.name();
    } else {
      s += " ineffectual";
    }
    if (l.annotation.immediate) s += " [immediate]";
    if (l.annotation.expires_at) s += " [expires=" + std::to_string(l.annotation.expires_at->ms) + "]";
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace featcomp
