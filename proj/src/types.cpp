#include "featcomp/types.hpp"

#include <algorithm>
#include <charconv>
#include <set>

namespace featcomp {

namespace {

std::optional<std::int64_t> parse_int(std::string_view text) {
  if (text.empty()) return std::nullopt;
  std::int64_t v = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) return std::nullopt;
  return v;
}

}  // namespace

FeatureId::FeatureId(std::string name) : name_(std::move(name)) {
  if (name_.empty()) throw ContractViolation("feature id must be non-empty");
}

std::string to_string(const FeatureKey& key) {
  return key.feature.name() + "@" + std::to_string(key.priority.value);
}

SettingValue SettingValue::discrete(std::string symbol) {
  if (symbol.empty()) throw ContractViolation("discrete setting needs a symbol");
  return SettingValue{Discrete{std::move(symbol)}};
}

SettingValue SettingValue::range(std::int64_t lo, std::int64_t hi) {
  if (lo > hi) {
    throw ContractViolation("range setting requires lo <= hi, got " + std::to_string(lo) +
                            ".." + std::to_string(hi));
  }
  return SettingValue{Range{lo, hi}};
}

SettingValue SettingValue::prefer(Direction direction) { return SettingValue{Prefer{direction}}; }

std::string to_string(const SettingValue& s) {
  struct Visitor {
    std::string operator()(DontCare) const { return "dontCare"; }
    std::string operator()(const Discrete& d) const { return d.symbol; }
    std::string operator()(Range r) const {
      return std::to_string(r.lo) + ".." + std::to_string(r.hi);
    }
    std::string operator()(Prefer p) const {
      return p.direction == Direction::Lowest ? "prefer:lowest" : "prefer:highest";
    }
  };
  return std::visit(Visitor{}, s.variant());
}

SettingValue parse_setting(std::string_view text) {
  if (text == "dontCare") return SettingValue::dont_care();
  if (text == "prefer:lowest") return SettingValue::prefer(Direction::Lowest);
  if (text == "prefer:highest") return SettingValue::prefer(Direction::Highest);
  if (auto dots = text.find(".."); dots != std::string_view::npos) {
    auto lo = parse_int(text.substr(0, dots));
    auto hi = parse_int(text.substr(dots + 2));
    if (!lo || !hi) throw ContractViolation("malformed range setting '" + std::string(text) + "'");
    return SettingValue::range(*lo, *hi);
  }
  if (auto single = parse_int(text)) return SettingValue::single(*single);
  if (text.empty()) throw ContractViolation("empty setting");
  return SettingValue::discrete(std::string(text));
}

std::string to_string(const Value& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  return std::get<std::string>(v);
}

ActuatorSpec ActuatorSpec::enumerated(std::string name, std::vector<std::string> symbols) {
  if (symbols.empty()) throw ContractViolation("actuator " + name + ": empty symbol set");
  std::set<std::string> seen;
  for (const auto& s : symbols) {
    if (s.empty() || s == "dontCare")
      throw ContractViolation("actuator " + name + ": illegal symbol '" + s + "'");
    if (!seen.insert(s).second)
      throw ContractViolation("actuator " + name + ": duplicate symbol '" + s + "'");
  }
  return ActuatorSpec(std::move(name), EnumeratedKind{std::move(symbols)});
}

ActuatorSpec ActuatorSpec::numeric(std::string name, std::int64_t min, std::int64_t max) {
  if (min > max) throw ContractViolation("actuator " + name + ": min > max");
  return ActuatorSpec(std::move(name), NumericKind{min, max});
}

bool ActuatorSpec::is_legal(const SettingValue& s) const {
  if (s.is_dont_care()) return true;
  if (const auto* d = s.as_discrete()) {
    if (is_numeric()) return false;
    const auto& symbols = enumerated_kind().symbols;
    return std::find(symbols.begin(), symbols.end(), d->symbol) != symbols.end();
  }
  if (!is_numeric()) return false;
  if (const auto* r = s.as_range()) {
    const auto& k = numeric_kind();
    return r->lo >= k.min && r->hi <= k.max;
  }
  return true;  // Prefer
}

void ActuatorSpec::check_legal(const SettingValue& s) const {
  if (!is_legal(s)) {
    throw ContractViolation("setting '" + to_string(s) + "' is not legal for actuator " + name_);
  }
}

bool ActuatorSpec::is_legal_value(const Value& v) const {
  if (is_numeric()) {
    const auto* i = std::get_if<std::int64_t>(&v);
    return i && *i >= numeric_kind().min && *i <= numeric_kind().max;
  }
  const auto* s = std::get_if<std::string>(&v);
  if (!s) return false;
  const auto& symbols = enumerated_kind().symbols;
  return std::find(symbols.begin(), symbols.end(), *s) != symbols.end();
}

std::optional<Value> ActuatorSpec::parse_value(std::string_view text) const {
  Value v = is_numeric() ? Value{parse_int(text).value_or(numeric_kind().min - 1)}
                         : Value{std::string(text)};
  if (!is_legal_value(v)) return std::nullopt;
  return v;
}

bool record_order(const SequencedRecord& a, const SequencedRecord& b) {
  if (a.record.priority != b.record.priority) return a.record.priority > b.record.priority;
  if (a.record.time != b.record.time) return a.record.time > b.record.time;
  return a.seq > b.seq;
}

bool satisfies(const Value& value, const SettingValue& setting) {
  if (setting.is_dont_care() || setting.as_prefer()) return true;
  if (const auto* d = setting.as_discrete()) {
    const auto* s = std::get_if<std::string>(&value);
    if (!s) throw ContractViolation("numeric value tested against discrete setting");
    return *s == d->symbol;
  }
  const auto* i = std::get_if<std::int64_t>(&value);
  if (!i) throw ContractViolation("symbolic value tested against range setting");
  const auto& r = *setting.as_range();
  return r.lo <= *i && *i <= r.hi;
}

Payload& Payload::set(std::string key, Value value) {
  for (auto& f : fields_) {
    if (f.key == key) {
      f.value = std::move(value);
      return *this;
    }
  }
  fields_.push_back({std::move(key), std::move(value)});
  return *this;
}

const Value* Payload::find(std::string_view key) const {
  for (const auto& f : fields_) {
    if (f.key == key) return &f.value;
  }
  return nullptr;
}

std::optional<std::string> Payload::text(std::string_view key) const {
  const auto* v = find(key);
  if (!v) return std::nullopt;
  return to_string(*v);
}

std::optional<std::int64_t> Payload::integer(std::string_view key) const {
  const auto* v = find(key);
  if (!v) return std::nullopt;
  if (const auto* i = std::get_if<std::int64_t>(v)) return *i;
  return std::nullopt;
}

Value parse_field_value(std::string_view text) {
  // Only canonical decimals become integers, so "0042" stays text.
  if (auto i = parse_int(text); i && std::to_string(*i) == text) return *i;
  return std::string(text);
}

std::optional<bool> parse_bool(std::string_view text) {
  if (text == "true" || text == "1" || text == "on" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "off" || text == "no") return false;
  return std::nullopt;
}

}  // namespace featcomp
