#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "featcomp/checker.hpp"
#include "featcomp/scenario.hpp"

namespace {

std::optional<std::string> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int run_command(const std::string& path, bool explain, const std::string& expect, std::int64_t max_steps) {
  auto text = slurp(path);
  if (!text) {
    std::cerr << "error: cannot read " << path << "\n";
    return 2;
  }
  featcomp::ScenarioFile file;
  try {
    file = featcomp::parse_scenario(*text);
  } catch (const featcomp::ScenarioError& e) {
    std::cerr << path << ":" << e.what() << "\n";
    return 2;
  }
  featcomp::RunOptions options;
  options.explain = explain;
  if (max_steps > 0) options.max_steps = static_cast<std::uint64_t>(max_steps);
  auto result = featcomp::run_scenario(file, options);
  std::cout << result.output;
  std::cout.flush();
  if (result.exit_code != 0) {
    std::cerr << "error: " << result.diagnostic << "\n";
    return result.exit_code;
  }
  if (!expect.empty()) {
    auto golden = slurp(expect);
    if (!golden) {
      std::cerr << "error: cannot read " << expect << "\n";
      return 2;
    }
    auto diff = featcomp::compare_golden(featcomp::golden_view(result.trace), *golden);
    if (!diff.match) {
      std::cerr << "trace differs from " << expect << " at " << diff.report;
      return 1;
    }
  }
  return 0;
}

int check_command(const featcomp::Scope& scope, bool shared, bool no_symmetry, int fuzz, std::uint64_t seed) {
  featcomp::CheckOptions options;
  options.timestamps = shared ? featcomp::TimestampMode::Shared : featcomp::TimestampMode::Distinct;
  options.symmetry = !no_symmetry;
  try {
    scope.validate();
  } catch (const featcomp::ContractViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::printf("estimate for scope %s: %.3g raw input sequences\n", scope.to_string().c_str(),
              featcomp::estimate_sequences(scope, options.timestamps));
  std::fflush(stdout);
  auto report = featcomp::exhaustive_check(scope, options);
  std::cout << featcomp::render(report);
  bool ok = report.passed();
  if (fuzz > 0) {
    featcomp::FuzzOptions f{seed, fuzz, 8};
    auto discrete = featcomp::fuzz_discrete(f);
    auto numeric = featcomp::fuzz_numeric(f);
    std::cout << featcomp::render(discrete, "discrete fuzz") << featcomp::render(numeric, "numeric fuzz");
    ok = ok && discrete.passed() && numeric.passed();
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"featcomp: feature composition engine for home automation"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a scenario file and print its trace");
  std::string scenario;
  std::string expect;
  bool explain = false;
  std::int64_t max_steps = 0;
  run->add_option("scenario", scenario, "Scenario file")->required();
  run->add_flag("--explain", explain, "Explain the coordinator state after every command");
  run->add_option("--expect", expect, "Golden file to compare command and display lines against");
  run->add_option("--max-steps", max_steps, "Engine step budget")->check(CLI::PositiveNumber);

  auto* check = app.add_subcommand("check", "Exhaustively check the coordinator over a bounded scope");
  featcomp::Scope scope{3, 3, 3, 6};
  bool shared = false;
  bool no_symmetry = false;
  int fuzz = 0;
  std::uint64_t seed = 1;
  check->add_option("--features", scope.features, "Number of features")->check(CLI::PositiveNumber);
  check->add_option("--priorities", scope.priorities, "Number of priorities")->check(CLI::PositiveNumber);
  check->add_option("--settings", scope.settings, "Number of discrete settings")->check(CLI::PositiveNumber);
  check->add_option("--records", scope.records, "Maximum input records")->check(CLI::PositiveNumber);
  check->add_flag("--shared-timestamps", shared, "Let consecutive records share a timestamp");
  check->add_flag("--no-symmetry", no_symmetry, "Disable symmetry reduction");
  check->add_option("--fuzz", fuzz, "Also run N random differential histories per actuator kind");
  check->add_option("--seed", seed, "Fuzz seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (*run) return run_command(scenario, explain, expect, max_steps);
  return check_command(scope, shared, no_symmetry, fuzz, seed);
}
