#pragma once

// Scenario files, trace formatting and golden comparison.
//
//   use <pack>
//   config <key>=<value>
//   init <actuator>=<value>
//   end <ms>
//   at <ms> <stream> <key>=<value>...
//
// One directive per line; '#' starts a comment.

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "featcomp/engine.hpp"
#include "featcomp/packs.hpp"

namespace featcomp {

class ScenarioError : public Error {
 public:
  ScenarioError(int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

struct ScenarioEvent {
  std::int64_t time = 0;
  std::string stream;
  std::vector<std::pair<std::string, std::string>> fields;  // in file order

  friend bool operator==(const ScenarioEvent&, const ScenarioEvent&) = default;
};

struct ScenarioFile {
  std::string pack;
  ConfigOverrides config;
  InitialValues init;
  std::optional<std::int64_t> end;
  std::vector<ScenarioEvent> events;

  /// The explicit end, or the last event time plus kDefaultTail.
  std::int64_t end_time() const;
  static constexpr std::int64_t kDefaultTail = 600000;
};

/// Throws ScenarioError with the offending line number.
ScenarioFile parse_scenario(std::string_view text);
/// Canonical text; parse_scenario(format_scenario(f)) == f.
std::string format_scenario(const ScenarioFile& file);

/// `T=<ms> <kind> <name>=<value>[ by F@P,...]`, with explanation notes on
/// lines indented by four spaces after their command.
std::string format_trace(const std::vector<TraceLine>& lines);
std::string format_line(const TraceLine& line);
/// Command and display lines only, without notes: the golden view.
std::string golden_view(const std::vector<TraceLine>& lines);

struct GoldenDiff {
  bool match = true;
  std::string report;  // first differing line, when not matching
};

/// Compares a golden view with golden text; blank lines and '#' comments in
/// the golden text are ignored.
GoldenDiff compare_golden(const std::string& actual_view, std::string_view golden_text);

struct RunOptions {
  bool explain = false;
  std::optional<std::uint64_t> max_steps;
  /// Called after the pack is built and before the start record, e.g. to
  /// attach observers.
  std::function<void(System&)> before_start;
};

struct RunResult {
  int exit_code = 0;  // 0 success, 2 runtime abort
  std::vector<TraceLine> trace;
  std::string output;      // formatted trace
  std::string diagnostic;  // abort or build message
  std::unique_ptr<System> system;
};

/// Builds the pack, publishes the events and runs to the end time.
RunResult run_scenario(const ScenarioFile& file, const RunOptions& options = {});

}  // namespace featcomp
