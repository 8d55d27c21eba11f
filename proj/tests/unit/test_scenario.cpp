#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "featcomp/scenario.hpp"

using namespace featcomp;

namespace {

int error_line(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ScenarioError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST(Parse, FullFile) {
  auto f = parse_scenario(
      "# night test\nuse door_lock\n\nconfig eo_duration_ms=30000\ninit doorLock=locked\nend 90000\n"
      "at 1000 panelIn panel=outside op=requestUnlock code=1234  # comment\n");
  EXPECT_EQ(f.pack, "door_lock");
  EXPECT_EQ(f.config.at("eo_duration_ms"), "30000");
  EXPECT_EQ(f.init.at("doorLock"), "locked");
  EXPECT_EQ(f.end, 90000);
  ASSERT_EQ(f.events.size(), 1u);
  EXPECT_EQ(f.events[0].time, 1000);
  EXPECT_EQ(f.events[0].stream, "panelIn");
  EXPECT_EQ(f.events[0].fields.size(), 3u);
  EXPECT_EQ(f.events[0].fields[2], (std::pair<std::string, std::string>{"code", "1234"}));
}

TEST(Parse, DefaultEndTime) {
  auto f = parse_scenario("use dimmer\nat 5000 motion present=true\n");
  EXPECT_EQ(f.end_time(), 5000 + ScenarioFile::kDefaultTail);
  EXPECT_EQ(parse_scenario("use dimmer\n").end_time(), ScenarioFile::kDefaultTail);
}

TEST(Parse, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line("at 1 motion present=true\n"), 1);
  EXPECT_EQ(error_line("use sprinkler\n"), 1);
  EXPECT_EQ(error_line("use dimmer\nuse dimmer\n"), 2);
  EXPECT_EQ(error_line("use dimmer\n\nconfig colour=red\n"), 3);
  EXPECT_EQ(error_line("use dimmer\nconfig season=dark\nconfig season=sunny\n"), 3);
  EXPECT_EQ(error_line("use dimmer\ninit furnace=on\n"), 2);
  EXPECT_EQ(error_line("use dimmer\nat -5 motion present=true\n"), 2);
  EXPECT_EQ(error_line("use dimmer\nat 10 motion present=true\nat 5 motion present=false\n"), 3);
  EXPECT_EQ(error_line("use dimmer\nat 10 doorbell ring=1\n"), 2);
  EXPECT_EQ(error_line("use dimmer\nat 10 motion colour=red\n"), 2);
  EXPECT_EQ(error_line("use dimmer\nat 10 motion present\n"), 2);
  EXPECT_EQ(error_line("use dimmer\nat 10 motion present=1 present=0\n"), 2);
  EXPECT_EQ(error_line("use dimmer\nfrobnicate\n"), 2);
  EXPECT_EQ(error_line("use dimmer\nend 10\nend 20\n"), 3);
  EXPECT_EQ(error_line("use dimmer\nend 10\nat 20 motion present=true\n"), 2);
  EXPECT_NE(error_line("\n\n# only comments\n"), 0);
}

TEST(Parse, FormatRoundTrip) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    ScenarioFile f;
    f.pack = "furnace";
    if (rng() % 2) f.config["protection_ms"] = std::to_string(1 + rng() % 100000);
    if (rng() % 2) f.init["thermostat"] = std::to_string(5 + rng() % 30);
    if (rng() % 2) f.end = 5000000;
    std::int64_t t = 0;
    for (int i = 0; i < static_cast<int>(rng() % 6); ++i) {
      t += static_cast<std::int64_t>(rng() % 1000);
      if (rng() % 2) {
        f.events.push_back({t, "houseTemp", {{"value", std::to_string(rng() % 40)}}});
      } else {
        f.events.push_back({t, "ac", {{"on", rng() % 2 ? "true" : "false"}}});
      }
    }
    auto text = format_scenario(f);
    auto back = parse_scenario(text);
    EXPECT_EQ(back.pack, f.pack);
    EXPECT_EQ(back.config, f.config);
    EXPECT_EQ(back.init, f.init);
    EXPECT_EQ(back.end, f.end);
    EXPECT_EQ(back.events, f.events) << text;
    EXPECT_EQ(format_scenario(back), text);
  }
}

TEST(Format, TraceLines) {
  TraceLine cmd{Timestamp{1003}, 0, TraceKind::Command, "doorLock", "unlocked",
                {{FeatureId("EO"), Priority{40}}, {FeatureId("HFE"), Priority{20}}}, {"note one"}};
  EXPECT_EQ(format_line(cmd), "T=1003 command doorLock=unlocked by EO@40,HFE@20");
  EXPECT_EQ(format_trace({cmd}), "T=1003 command doorLock=unlocked by EO@40,HFE@20\n    note one\n");
  TraceLine fb{Timestamp{1003}, 1, TraceKind::Feedback, "doorLock.real", "unlocked", {}, {}};
  EXPECT_EQ(format_line(fb), "T=1003 feedback doorLock.real=unlocked");
  TraceLine disp{Timestamp{7}, 2, TraceKind::Display, "panelOut.inside", "all clear", {}, {}};
  EXPECT_EQ(format_line(disp), "T=7 display panelOut.inside=all clear");
  EXPECT_EQ(golden_view({cmd, fb, disp}),
            "T=1003 command doorLock=unlocked by EO@40,HFE@20\nT=7 display panelOut.inside=all clear\n");
}

TEST(Golden, CompareIgnoresCommentsAndBlankLines) {
  std::string view = "T=1 command a=x by F@1\nT=2 display d=hi\n";
  EXPECT_TRUE(compare_golden(view, "# header\nT=1 command a=x by F@1\n\nT=2 display d=hi\n").match);
  auto extra = compare_golden(view, "T=1 command a=x by F@1\n");
  EXPECT_FALSE(extra.match);
  EXPECT_FALSE(extra.report.empty());
  auto differ = compare_golden(view, "T=1 command a=y by F@1\nT=2 display d=hi\n");
  EXPECT_FALSE(differ.match);
  EXPECT_NE(differ.report.find("a=y"), std::string::npos) << differ.report;
  EXPECT_FALSE(compare_golden(view, "T=1 command a=x by F@1\nT=2 display d=hi\nT=3 display d=bye\n").match);
}

TEST(ScenarioRun, BuildErrorsAreReported) {
  auto f = parse_scenario("use dimmer\ninit dimmer=200\n");
  auto r = run_scenario(f);
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_FALSE(r.diagnostic.empty());
}

TEST(ScenarioRun, StepBudgetAbortKeepsPartialTrace) {
  auto f = parse_scenario("use door_lock\ninit doorLock=locked\nat 100 driveway event=carArriving\n");
  RunOptions o;
  o.max_steps = 3;
  auto r = run_scenario(f, o);
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.diagnostic.find("non-quiescent"), std::string::npos) << r.diagnostic;
}

TEST(ScenarioRun, ExplainAttachesNotes) {
  auto f = parse_scenario(
      "use door_lock\nconfig clock_origin=12:00\ninit doorLock=locked\nat 100 panelIn panel=outside op=requestUnlock "
      "code=1234\n");
  RunOptions o;
  o.explain = true;
  auto r = run_scenario(f, o);
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_NE(r.output.find("\n    doorLock: EO@40 unlocked t=101 in force"), std::string::npos) << r.output;
}

TEST(ScenarioRun, IdenticalRunsGiveIdenticalOutput) {
  auto f = parse_scenario(
      "use furnace\ninit furnace=off\nat 500 thermostatPanel setpoint=20\nat 1000 houseTemp value=15\n"
      "at 61000 emergency active=1\nat 62000 emergency active=0\n");
  RunOptions o;
  o.explain = true;
  EXPECT_EQ(run_scenario(f, o).output, run_scenario(f, o).output);
}

// --- command line --------------------------------------------------------------

namespace {

std::string temp_file(const std::string& name, const std::string& content) {
  std::string path = ::testing::TempDir() + name;
  std::ofstream(path) << content;
  return path;
}

int cli(const std::string& args) {
  std::string cmd = std::string(FEATCOMP_CLI) + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST(Cli, RunExitCodes) {
  auto scn = temp_file("cli_ok.scn", "use door_lock\ninit doorLock=locked\nat 2000 driveway event=carArriving\n");
  EXPECT_EQ(cli("run " + scn), 0);
  auto good = temp_file("cli_ok.golden", "T=2002 command doorLock=unlocked by HFE@20\n"
                                         "T=182002 command doorLock=locked by NL@10\n");
  EXPECT_EQ(cli("run " + scn + " --expect " + good), 0);
  auto bad = temp_file("cli_bad.golden", "T=2002 command doorLock=locked by HFE@20\n");
  EXPECT_EQ(cli("run " + scn + " --expect " + bad), 1);
  EXPECT_EQ(cli("run " + scn + " --max-steps 2"), 2);
  EXPECT_EQ(cli("run " + temp_file("cli_parse.scn", "use nothing\n")), 2);
  EXPECT_EQ(cli("run /nonexistent/x.scn"), 2);
  EXPECT_EQ(cli("frobnicate"), 2);
}

TEST(Cli, CheckExitCodes) {
  EXPECT_EQ(cli("check --features 2 --priorities 2 --settings 2 --records 3"), 0);
  EXPECT_EQ(cli("check --features 1 --priorities 1 --settings 1 --records 2 --shared-timestamps --fuzz 50"), 0);
  EXPECT_EQ(cli("check --features 9 --priorities 9 --settings 9 --records 12"), 1);
  EXPECT_EQ(cli("check --features 0"), 2);
}
