#include "cli_commands.hpp"

#include "ranklab/cli.hpp"
#include "ranklab/serialize.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace ranklab;
using nlohmann::json;

TEST_CASE("heights command") {
  const auto out = parse_and_run({"heights", "--spec", clicases::spec("chacon.json"), "--stages", "4"});
  CHECK(out.exitCode == kExitOk);
  CHECK(out.report["result"]["heights"] == json::array({1, 8, 50, 302}));
  CHECK(out.report["specFingerprint"].get<std::string>().size() == 64);
}

TEST_CASE("ap command lists the {42, 84} run") {
  const auto out =
      parse_and_run({"ap", "--spec", clicases::spec("chacon.json"), "--base", "1:0", "--to", "3", "--max-len", "14"});
  CHECK(out.exitCode == kExitOk);
  bool seen = false;
  for (const auto& row : out.report["evidence"]["runsOfLengthAtLeastTwo"])
    if (row["x"] == 42) {
      CHECK(row["progression"] == json::array({42, 84}));
      seen = true;
    }
  CHECK(seen);
  CHECK(out.report["result"]["found"] == false);
}

TEST_CASE("missing spec file is a runtime error") {
  const auto out = parse_and_run({"heights", "--spec", "missing.json"});
  CHECK(out.exitCode == kExitRuntime);
  CHECK(out.report["result"]["error"]["code"] == "IoError");
  CHECK(validate_report(out.report).empty());
}

TEST_CASE("usage errors") {
  CHECK(parse_and_run({}).exitCode == kExitUsage);
  CHECK(parse_and_run({"nonsense"}).exitCode == kExitUsage);
  CHECK(parse_and_run({"heights", "--stages", "x"}).exitCode == kExitUsage);
  CHECK(parse_and_run({"heights", "--spec", clicases::spec("chacon.json"), "--stages", "0"}).exitCode == kExitUsage);
  CHECK(parse_and_run({"ergodic-match", "--spec", clicases::spec("chacon.json"), "--signature", "+,x"}).exitCode ==
        kExitUsage);
}

TEST_CASE("help prints text") {
  const auto out = parse_and_run({"--help"});
  CHECK(out.exitCode == kExitOk);
  CHECK(out.report.is_null());
  CHECK(out.helpText.find("heights") != std::string::npos);
}

TEST_CASE("failing property gives exit 2") {
  const auto out = parse_and_run({"non-ergodic", "--spec", clicases::spec("all_but_last.json"), "--alpha", "1,1",
                                  "--b", "0,1", "--base-stage", "1", "--horizon", "3"});
  CHECK(out.exitCode == kExitPropertyFails);
  CHECK(out.report["result"]["certificate"]["verdict"] == "fails");
}

TEST_CASE("budget overrun is a runtime error") {
  const auto out = parse_and_run({"conservativity", "--spec", clicases::spec("chacon.json"), "--alpha", "1,1,1,1",
                                  "--base-stage", "0", "--horizon", "9"});
  CHECK(out.exitCode == kExitRuntime);
  CHECK(out.report["result"]["error"]["code"] == "BudgetExceeded");
}

TEST_CASE("conservativity report carries 65/81 as strings") {
  const auto out = parse_and_run(
      {"conservativity", "--spec", clicases::spec("chacon.json"), "--alpha", "1,1", "--base-stage", "0", "--horizon", "2"});
  CHECK(out.report["result"]["fractions"][1]["fraction"] == json{{"num", "65"}, {"den", "81"}});
}

TEST_CASE("--approx adds labelled decimals") {
  const auto out = parse_and_run({"--approx", "conservativity", "--spec", clicases::spec("chacon.json"), "--alpha",
                                  "1,1", "--base-stage", "0", "--horizon", "2"});
  CHECK(out.report["result"]["fractions"][1]["fraction"]["approx"].is_string());
  CHECK(out.report["inputs"]["approx"] == true);
  CHECK(validate_report(out.report).empty());
}

TEST_CASE("every command validates and is deterministic") {
  for (const auto& args : clicases::all_commands()) {
    CAPTURE(args[0]);
    const auto a = parse_and_run(args);
    const auto b = parse_and_run(args);
    CHECK(a.exitCode != kExitRuntime);
    CHECK(a.exitCode != kExitUsage);
    CHECK(validate_report(a.report).empty());
    CHECK(a.report["reportFingerprint"] == b.report["reportFingerprint"]);
    json x = a.report, y = b.report;
    x.erase("durationMs");
    y.erase("durationMs");
    CHECK(x.dump() == y.dump());
  }
}

TEST_CASE("--jobs does not change the report") {
  auto args = std::vector<std::string>{"conservativity", "--spec", clicases::spec("chacon.json"), "--alpha", "1,2",
                                       "--base-stage", "0", "--horizon", "3"};
  const auto one = parse_and_run(args);
  args.insert(args.begin(), {"--jobs", "4"});
  const auto four = parse_and_run(args);
  CHECK(one.report["reportFingerprint"] == four.report["reportFingerprint"]);
}

TEST_CASE("--json writes the report and validate --report reads it back") {
  const auto path = (std::filesystem::temp_directory_path() / "ranklab_cli_test_report.json").string();
  const auto out = parse_and_run({"--json", path, "heights", "--spec", clicases::spec("chacon.json")});
  REQUIRE(out.jsonPath);
  emit_report(out.report, out.jsonPath);
  const auto check = parse_and_run({"validate", "--report", path});
  CHECK(check.exitCode == kExitOk);
  CHECK(check.report["result"]["valid"] == true);

  json broken = out.report;
  broken["result"]["heights"][0] = 2;
  std::ofstream(path) << broken.dump();
  const auto bad = parse_and_run({"validate", "--report", path});
  CHECK(bad.exitCode == kExitPropertyFails);
  std::remove(path.c_str());
}
