#include "featcomp/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace featcomp {

ScenarioError::ScenarioError(int line, const std::string& message)
    : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

std::int64_t ScenarioFile::end_time() const {
  if (end) return *end;
  return (events.empty() ? 0 : events.back().time) + kDefaultTail;
}

namespace {

std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::int64_t parse_time(int line, const std::string& text) {
  std::int64_t v = -1;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || v < 0) {
    throw ScenarioError(line, "expected a non-negative time in ms, got '" + text + "'");
  }
  return v;
}

std::pair<std::string, std::string> parse_assignment(int line, const std::string& token) {
  auto eq = token.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == token.size()) {
    throw ScenarioError(line, "expected <key>=<value>, got '" + token + "'");
  }
  return {token.substr(0, eq), token.substr(eq + 1)};
}

// Validates one config entry in isolation so errors carry its line.
void check_config_entry(int line, const std::string& pack, const std::string& key, const std::string& value) {
  ConfigOverrides one{{key, value}};
  try {
    if (pack == "door_lock") DoorLockConfig::from(one);
    if (pack == "dimmer") DimmerConfig::from(one);
    if (pack == "furnace") FurnaceConfig::from(one);
  } catch (const ConfigError& e) {
    throw ScenarioError(line, e.what());
  }
}

}  // namespace

ScenarioFile parse_scenario(std::string_view text) {
  ScenarioFile file;
  const PackInfo* pack = nullptr;
  int end_line = 0;
  int number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++number;

    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    auto tokens = tokenize(raw);
    if (tokens.empty()) continue;
    const auto& directive = tokens[0];

    if (directive == "use") {
      if (pack) throw ScenarioError(number, "pack already selected");
      if (tokens.size() != 2) throw ScenarioError(number, "expected: use <pack>");
      pack = find_pack(tokens[1]);
      if (!pack) throw ScenarioError(number, "unknown pack '" + tokens[1] + "'");
      file.pack = tokens[1];
      continue;
    }
    if (directive != "config" && directive != "init" && directive != "end" && directive != "at") {
      throw ScenarioError(number, "unknown directive '" + directive + "'");
    }
    if (!pack) throw ScenarioError(number, "'use <pack>' must come first");

    if (directive == "config") {
      if (tokens.size() != 2) throw ScenarioError(number, "expected: config <key>=<value>");
      auto [key, value] = parse_assignment(number, tokens[1]);
      if (!pack->has_config_key(key)) {
        throw ScenarioError(number, "unknown config key '" + key + "' for pack " + pack->name);
      }
      if (file.config.count(key)) throw ScenarioError(number, "config key '" + key + "' set twice");
      check_config_entry(number, pack->name, key, value);
      file.config.emplace(key, value);
    } else if (directive == "init") {
      if (tokens.size() != 2) throw ScenarioError(number, "expected: init <actuator>=<value>");
      auto [actuator, value] = parse_assignment(number, tokens[1]);
      if (!pack->has_actuator(actuator)) {
        throw ScenarioError(number, "unknown actuator '" + actuator + "' for pack " + pack->name);
      }
      if (file.init.count(actuator)) throw ScenarioError(number, "actuator '" + actuator + "' initialized twice");
      file.init.emplace(actuator, value);
    } else if (directive == "end") {
      if (tokens.size() != 2) throw ScenarioError(number, "expected: end <ms>");
      if (file.end) throw ScenarioError(number, "end time set twice");
      file.end = parse_time(number, tokens[1]);
      end_line = number;
    } else {
      if (tokens.size() < 4) throw ScenarioError(number, "expected: at <ms> <stream> <key>=<value>...");
      ScenarioEvent event;
      event.time = parse_time(number, tokens[1]);
      if (!file.events.empty() && event.time < file.events.back().time) {
        throw ScenarioError(number, "event time " + tokens[1] + " precedes the previous event at " +
                                        std::to_string(file.events.back().time));
      }
      event.stream = tokens[2];
      const auto* schema = pack->input(event.stream);
      if (!schema) throw ScenarioError(number, "unknown stream '" + event.stream + "' for pack " + pack->name);
      for (std::size_t i = 3; i < tokens.size(); ++i) {
        auto field = parse_assignment(number, tokens[i]);
        if (std::find(schema->keys.begin(), schema->keys.end(), field.first) == schema->keys.end()) {
          throw ScenarioError(number, "unknown key '" + field.first + "' for stream " + event.stream);
        }
        for (const auto& f : event.fields) {
          if (f.first == field.first) throw ScenarioError(number, "key '" + field.first + "' given twice");
        }
        event.fields.push_back(std::move(field));
      }
      file.events.push_back(std::move(event));
    }
  }
  if (!pack) throw ScenarioError(number, "missing 'use <pack>'");
  if (file.end && !file.events.empty() && *file.end < file.events.back().time) {
    throw ScenarioError(end_line, "end time precedes the last event");
  }
  return file;
}

std::string format_scenario(const ScenarioFile& file) {
  std::ostringstream os;
  os << "use " << file.pack << "\n";
  for (const auto& [k, v] : file.config) os << "config " << k << "=" << v << "\n";
  for (const auto& [k, v] : file.init) os << "init " << k << "=" << v << "\n";
  if (file.end) os << "end " << *file.end << "\n";
  for (const auto& e : file.events) {
    os << "at " << e.time << " " << e.stream;
    for (const auto& [k, v] : e.fields) os << " " << k << "=" << v;
    os << "\n";
  }
  return os.str();
}

std::string format_line(const TraceLine& line) {
  std::string s = "T=" + std::to_string(line.time.ms) + " " + std::string(to_string(line.kind)) + " " + line.name +
                  "=" + line.value;
  for (std::size_t i = 0; i < line.by.size(); ++i) s += (i == 0 ? " by " : ",") + to_string(line.by[i]);
  return s;
}

std::string format_trace(const std::vector<TraceLine>& lines) {
  std::string out;
  for (const auto& l : lines) {
    out += format_line(l) + "\n";
    for (const auto& n : l.notes) out += "    " + n + "\n";
  }
  return out;
}

std::string golden_view(const std::vector<TraceLine>& lines) {
  std::string out;
  for (const auto& l : lines) {
    if (l.kind == TraceKind::Command || l.kind == TraceKind::Display) out += format_line(l) + "\n";
  }
  return out;
}

GoldenDiff compare_golden(const std::string& actual_view, std::string_view golden_text) {
  auto lines_of = [](std::string_view text, bool skip_comments) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
      auto nl = text.find('\n', pos);
      auto line = std::string(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
      pos = nl == std::string_view::npos ? text.size() : nl + 1;
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
      if (line.empty() || (skip_comments && line[0] == '#')) continue;
      out.push_back(line);
    }
    return out;
  };
  auto actual = lines_of(actual_view, false);
  auto expected = lines_of(golden_text, true);
  GoldenDiff diff;
  for (std::size_t i = 0; i < std::max(actual.size(), expected.size()); ++i) {
    const std::string a = i < actual.size() ? actual[i] : "<end of trace>";
    const std::string e = i < expected.size() ? expected[i] : "<end of golden>";
    if (a != e) {
      diff.match = false;
      diff.report = "line " + std::to_string(i + 1) + ":\n  expected: " + e + "\n  actual:   " + a + "\n";
      break;
    }
  }
  return diff;
}

RunResult run_scenario(const ScenarioFile& file, const RunOptions& options) {
  RunResult result;
  EngineOptions engine_options;
  if (options.max_steps) engine_options.max_steps = *options.max_steps;
  try {
    result.system = build_pack(file.pack, file.config, file.init, engine_options);
  } catch (const Error& e) {
    result.exit_code = 2;
    result.diagnostic = std::string("build error: ") + e.what();
    return result;
  }
  auto& sys = *result.system;
  auto& engine = sys.engine();
  sys.set_explain(options.explain);
  if (options.before_start) options.before_start(sys);
  sys.start();
  for (const auto& e : file.events) {
    Payload payload;
    for (const auto& [k, v] : e.fields) payload.set(k, parse_field_value(v));
    engine.publish({Timestamp{e.time}, 0, e.stream, std::move(payload)});
  }
  try {
    result.trace = engine.run(Timestamp{file.end_time()});
  } catch (const EngineAbort& e) {
    result.exit_code = 2;
    result.diagnostic = e.what();
    result.trace = engine.trace();
  }
  result.output = format_trace(result.trace);
  return result;
}

}  // namespace featcomp
