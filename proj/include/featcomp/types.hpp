#pragma once

// Shared vocabulary for feature composition: timestamps, feature ids,
// priorities, settings, actuator descriptors and the records that flow
// between features, coordinators and the event engine.

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace featcomp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke a documented precondition.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Simulated milliseconds since scenario start.
struct Timestamp {
  std::int64_t ms = 0;

  friend constexpr auto operator<=>(Timestamp, Timestamp) = default;
  constexpr Timestamp operator+(std::int64_t delta) const { return {ms + delta}; }
};

class FeatureId {
 public:
  FeatureId() = default;
  explicit FeatureId(std::string name);

  const std::string& name() const { return name_; }

  friend auto operator<=>(const FeatureId&, const FeatureId&) = default;

 private:
  std::string name_;
};

/// Larger value means higher priority.
struct Priority {
  std::int32_t value = 0;

  friend constexpr auto operator<=>(Priority, Priority) = default;
};

/// Uniquely identifies a (sub-)feature at one coordinator.
struct FeatureKey {
  FeatureId feature;
  Priority priority;

  friend auto operator<=>(const FeatureKey&, const FeatureKey&) = default;
};

std::string to_string(const FeatureKey& key);  // "EO@40"

enum class Direction { Lowest, Highest };

struct DontCare {
  friend constexpr bool operator==(DontCare, DontCare) { return true; }
};
struct Discrete {
  std::string symbol;
  friend bool operator==(const Discrete&, const Discrete&) = default;
};
struct Range {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  friend constexpr bool operator==(Range, Range) = default;
};
struct Prefer {
  Direction direction = Direction::Lowest;
  friend constexpr bool operator==(Prefer, Prefer) = default;
};

/// A virtual actuator setting: dontCare, a symbol, a numeric subrange or a
/// lowest/highest preference.
class SettingValue {
 public:
  using Variant = std::variant<DontCare, Discrete, Range, Prefer>;

  SettingValue() = default;

  static SettingValue dont_care() { return SettingValue{}; }
  static SettingValue discrete(std::string symbol);
  static SettingValue range(std::int64_t lo, std::int64_t hi);  // throws if lo > hi
  static SettingValue single(std::int64_t v) { return range(v, v); }
  static SettingValue prefer(Direction direction);

  bool is_dont_care() const { return std::holds_alternative<DontCare>(v_); }
  const Discrete* as_discrete() const { return std::get_if<Discrete>(&v_); }
  const Range* as_range() const { return std::get_if<Range>(&v_); }
  const Prefer* as_prefer() const { return std::get_if<Prefer>(&v_); }
  const Variant& variant() const { return v_; }

  friend bool operator==(const SettingValue&, const SettingValue&) = default;

 private:
  explicit SettingValue(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

/// Text form used on coordinator streams: "dontCare", "locked", "30..100",
/// "prefer:lowest", "prefer:highest".
std::string to_string(const SettingValue& s);
SettingValue parse_setting(std::string_view text);  // throws ContractViolation

/// A real actuator value, or any payload field value: integer or symbol/text.
using Value = std::variant<std::int64_t, std::string>;

std::string to_string(const Value& v);

struct EnumeratedKind {
  std::vector<std::string> symbols;
};
struct NumericKind {
  std::int64_t min = 0;
  std::int64_t max = 0;
};

class ActuatorSpec {
 public:
  using Kind = std::variant<EnumeratedKind, NumericKind>;

  static ActuatorSpec enumerated(std::string name, std::vector<std::string> symbols);
  static ActuatorSpec numeric(std::string name, std::int64_t min, std::int64_t max);

  const std::string& name() const { return name_; }
  const Kind& kind() const { return kind_; }
  bool is_numeric() const { return std::holds_alternative<NumericKind>(kind_); }
  const NumericKind& numeric_kind() const { return std::get<NumericKind>(kind_); }
  const EnumeratedKind& enumerated_kind() const { return std::get<EnumeratedKind>(kind_); }

  bool is_legal(const SettingValue& s) const;
  /// Throws ContractViolation naming the actuator when `s` is not legal.
  void check_legal(const SettingValue& s) const;
  bool is_legal_value(const Value& v) const;
  /// Parses a real value ("locked", "42") for this actuator.
  std::optional<Value> parse_value(std::string_view text) const;

 private:
  ActuatorSpec(std::string name, Kind kind) : name_(std::move(name)), kind_(std::move(kind)) {}

  std::string name_;
  Kind kind_;
};

/// The four fields sent to a coordinator.
struct SettingRecord {
  Timestamp time;
  FeatureId feature;
  Priority priority;
  SettingValue setting;

  FeatureKey key() const { return {feature, priority}; }
};

/// A setting record together with its global arrival sequence number.
struct SequencedRecord {
  SettingRecord record;
  std::uint64_t seq = 0;
};

/// True iff `a` precedes `b` in a coordinator list: higher priority first,
/// then later timestamp, then later arrival.
bool record_order(const SequencedRecord& a, const SequencedRecord& b);

/// Whether a real value satisfies a setting. DontCare and Prefer are always
/// satisfied. Throws ContractViolation on a type mismatch (number vs symbol).
bool satisfies(const Value& value, const SettingValue& setting);

struct Field {
  std::string key;
  Value value;
  friend bool operator==(const Field&, const Field&) = default;
};

/// Ordered key/value list carried by an event record.
class Payload {
 public:
  Payload() = default;
  Payload(std::initializer_list<Field> fields) : fields_(fields) {}

  Payload& set(std::string key, Value value);
  const Value* find(std::string_view key) const;
  std::optional<std::string> text(std::string_view key) const;
  std::optional<std::int64_t> integer(std::string_view key) const;
  const std::vector<Field>& fields() const { return fields_; }
  bool empty() const { return fields_.empty(); }

  friend bool operator==(const Payload&, const Payload&) = default;

 private:
  std::vector<Field> fields_;
};

struct EventRecord {
  Timestamp time;
  std::uint64_t seq = 0;
  std::string stream;
  Payload payload;
};

/// Integer if the text is a canonical decimal literal ("42", "-7"), else text.
Value parse_field_value(std::string_view text);

/// Parses "true/false/1/0/on/off/yes/no"; nullopt otherwise.
std::optional<bool> parse_bool(std::string_view text);

}  // namespace featcomp
