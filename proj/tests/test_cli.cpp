// End-to-end checks of the command-line tool: every subcommand is exercised
// through a real child process located via the TANGLEPROOF_CLI environment
// variable, and the exit-code contract (0 ok, 1 config, 2 schema/IO,
// 3 no anchor, 4 construction/verification failure) is pinned.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "tangleproof/serialize.hpp"

namespace fs = std::filesystem;
using tangleproof::Json;

namespace {

struct CmdResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

[[nodiscard]] std::string cli_binary() {
  const char* bin = std::getenv("TANGLEPROOF_CLI");
  if (bin == nullptr || *bin == '\0') {
    ADD_FAILURE() << "TANGLEPROOF_CLI is not set; run through ctest";
    return {};
  }
  return bin;
}

[[nodiscard]] fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "tangleproof_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

[[nodiscard]] std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  EXPECT_TRUE(in) << path << ": cannot open";
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  ASSERT_TRUE(out) << path << ": cannot open for writing";
  out << text;
}

[[nodiscard]] CmdResult run_cli(const std::string& args,
                                const std::string& env_prefix = "") {
  static int invocation = 0;
  const fs::path log = fs::temp_directory_path() / "tangleproof_cli" /
                       ("invocation_" + std::to_string(invocation++) + ".log");
  fs::create_directories(log.parent_path());
  const std::string cmd = env_prefix + cli_binary() + " " + args + " > " +
                          log.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  CmdResult result;
  result.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  result.output = slurp(log);
  return result;
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

TEST(RunCommand, WritesTracesMetaAndSummaryWithZeroResidual) {
  const fs::path dir = scratch("run_basic");
  const CmdResult r = run_cli("run --seed 3 --seed 4 --steps 1500 --out " +
                              dir.string());
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("seed 3:"), std::string::npos);
  EXPECT_NE(r.output.find("seed 4:"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "trace_seed3.csv"));
  EXPECT_TRUE(fs::exists(dir / "trace_seed3.meta.json"));
  EXPECT_TRUE(fs::exists(dir / "trace_seed4.csv"));

  const Json summary =
      tangleproof::read_json_file((dir / "summary.json").string());
  EXPECT_EQ(summary.at("kind"), "summary");
  EXPECT_EQ(summary.at("steps"), 1500);
  EXPECT_EQ(summary.at("balance_residual_max"), 0);
  ASSERT_EQ(summary.at("replicas").size(), 2u);
  for (const Json& rep : summary.at("replicas")) {
    EXPECT_EQ(rep.at("balance_residual_max"), 0);
    EXPECT_GE(rep.at("tips").at("min").get<int>(), 1);
    EXPECT_LE(rep.at("tips").at("min").get<double>(),
              rep.at("tips").at("mean").get<double>());
    EXPECT_LE(rep.at("tips").at("mean").get<double>(),
              rep.at("tips").at("max").get<double>());
    EXPECT_GT(rep.at("threshold_hits").at("hits").get<long>(), 0);
  }
  EXPECT_EQ(summary.at("replicas")[0].at("csv"), "trace_seed3.csv");
}

TEST(RunCommand, SameSeedProducesByteIdenticalFiles) {
  const fs::path a = scratch("run_repeat_a");
  const fs::path b = scratch("run_repeat_b");
  ASSERT_EQ(run_cli("run --seed 11 --steps 1000 --out " + a.string()).exit_code,
            0);
  ASSERT_EQ(run_cli("run --seed 11 --steps 1000 --out " + b.string()).exit_code,
            0);
  EXPECT_EQ(slurp(a / "trace_seed11.csv"), slurp(b / "trace_seed11.csv"));
  EXPECT_EQ(slurp(a / "summary.json"), slurp(b / "summary.json"));
}

TEST(RunCommand, ParallelReplicasMatchSerialOnes) {
  const fs::path serial = scratch("run_serial");
  const fs::path parallel = scratch("run_parallel");
  ASSERT_EQ(run_cli("run --seed 5 --seed 6 --seed 7 --steps 800 --jobs 1 "
                    "--out " +
                    serial.string())
                .exit_code,
            0);
  ASSERT_EQ(run_cli("run --seed 5 --seed 6 --seed 7 --steps 800 --jobs 3 "
                    "--out " +
                    parallel.string())
                .exit_code,
            0);
  for (const char* name :
       {"trace_seed5.csv", "trace_seed6.csv", "trace_seed7.csv"})
    EXPECT_EQ(slurp(serial / name), slurp(parallel / name)) << name;
  EXPECT_EQ(slurp(serial / "summary.json"), slurp(parallel / "summary.json"));
}

TEST(RunCommand, ThreadEnvironmentCapStillProducesIdenticalOutput) {
  const fs::path dir = scratch("run_env_cap");
  const fs::path ref = scratch("run_env_ref");
  ASSERT_EQ(run_cli("run --seed 8 --seed 9 --steps 600 --jobs 4 --out " +
                        dir.string(),
                    "TANGLEPROOF_THREADS=1 ")
                .exit_code,
            0);
  ASSERT_EQ(run_cli("run --seed 8 --seed 9 --steps 600 --out " + ref.string())
                .exit_code,
            0);
  EXPECT_EQ(slurp(dir / "trace_seed8.csv"), slurp(ref / "trace_seed8.csv"));
  EXPECT_EQ(slurp(dir / "trace_seed9.csv"), slurp(ref / "trace_seed9.csv"));
}

TEST(RunCommand, ReadsConfigFileAndLetsFlagsOverrideIt) {
  const fs::path dir = scratch("run_config");
  const fs::path cfg = dir / "experiment.json";
  spit(cfg, R"({
    "schema": "tangleproof/v1",
    "kind": "config",
    "durations": [2],
    "duration_probs": [1.0],
    "lookbacks": [1],
    "lookback_probs": [1.0],
    "parent_counts": [2],
    "parent_count_probs": [1.0],
    "tip_threshold": 14,
    "steps": 700,
    "seeds": [9]
  })");
  const CmdResult r =
      run_cli("run --config " + cfg.string() + " --out " + dir.string());
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const Json meta =
      tangleproof::read_json_file((dir / "trace_seed9.meta.json").string());
  EXPECT_EQ(meta.at("steps"), 700);
  EXPECT_EQ(meta.at("model").at("tip_threshold"), 14);

  // The --seed flag replaces the config's seed list.
  const CmdResult o = run_cli("run --config " + cfg.string() +
                              " --seed 21 --steps 300 --out " + dir.string());
  ASSERT_EQ(o.exit_code, 0) << o.output;
  EXPECT_TRUE(fs::exists(dir / "trace_seed21.csv"));
  const Json meta21 =
      tangleproof::read_json_file((dir / "trace_seed21.meta.json").string());
  EXPECT_EQ(meta21.at("steps"), 300);
}

// ---------------------------------------------------------------------------
// force / verify / replay round trip
// ---------------------------------------------------------------------------

TEST(ForceCommand, BuildsVerifiesAndWritesAllArtifacts) {
  const fs::path dir = scratch("force_basic");
  const CmdResult r =
      run_cli("force --seed 811 --post 40 --out " + dir.string());
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("report: all checks passed"), std::string::npos);
  EXPECT_NE(r.output.find("success probability per attempt ~"),
            std::string::npos);
  EXPECT_NE(r.output.find("e-"), std::string::npos);

  const Json report =
      tangleproof::read_json_file((dir / "report_seed811.json").string());
  EXPECT_EQ(report.at("kind"), "report");
  EXPECT_TRUE(report.at("ok").get<bool>());
  for (const auto& [name, value] : report.at("checks").items())
    EXPECT_TRUE(value.get<bool>()) << name;

  const Json plan =
      tangleproof::read_json_file((dir / "plan_seed811.json").string());
  EXPECT_EQ(plan.at("kind"), "plan");
  EXPECT_GE(plan.at("anchor").get<int>(), 1);
}

TEST(ForceCommand, EmptySearchWindowExitsThree) {
  const fs::path dir = scratch("force_empty");
  const CmdResult r = run_cli("force --steps 0 --out " + dir.string());
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_NE(r.output.find("empty search window"), std::string::npos);
}

TEST(VerifyCommand, AcceptsGenuineTraceAndFlagsTamperedPlan) {
  const fs::path dir = scratch("verify_roundtrip");
  ASSERT_EQ(run_cli("force --seed 812 --post 30 --out " + dir.string())
                .exit_code,
            0);
  const std::string trace_arg = (dir / "trace_seed812.meta.json").string();
  const std::string plan_arg = (dir / "plan_seed812.json").string();

  const CmdResult ok = run_cli("verify --trace " + trace_arg + " --plan " +
                               plan_arg + " --out " +
                               (dir / "recheck.json").string());
  ASSERT_EQ(ok.exit_code, 0) << ok.output;
  EXPECT_NE(ok.output.find("verified: ok"), std::string::npos);
  const Json recheck =
      tangleproof::read_json_file((dir / "recheck.json").string());
  EXPECT_TRUE(recheck.at("ok").get<bool>());

  // Rewrite one forced decision inside the plan; the stored trace no longer
  // realizes it, so the checker must say so and exit 4.
  Json plan = tangleproof::read_json_file(plan_arg);
  Json& overrides = plan.at("overrides");
  Json& victim = overrides[overrides.size() / 2];
  victim["parents"] = Json::array({1});
  const fs::path tampered = dir / "plan_tampered.json";
  tangleproof::write_json_file(tampered.string(), plan);

  const CmdResult bad =
      run_cli("verify --trace " + trace_arg + " --plan " + tampered.string());
  EXPECT_EQ(bad.exit_code, 4);
  EXPECT_NE(bad.output.find("verified: FAILED"), std::string::npos);
}

TEST(ReplayCommand, CleanTracePassesAndEditedRowIsNamed) {
  const fs::path dir = scratch("replay");
  ASSERT_EQ(run_cli("run --seed 17 --steps 900 --out " + dir.string())
                .exit_code,
            0);
  const std::string trace_arg = (dir / "trace_seed17.meta.json").string();

  const CmdResult clean = run_cli("replay --trace " + trace_arg);
  ASSERT_EQ(clean.exit_code, 0) << clean.output;
  EXPECT_NE(clean.output.find("replay clean: 900 rows match"),
            std::string::npos);

  // Bump the tip count of row 500 (line 501 counting the header).
  std::vector<std::string> lines;
  {
    std::istringstream in(slurp(dir / "trace_seed17.csv"));
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
  }
  ASSERT_EQ(lines.size(), 901u);
  std::string& row = lines[500];
  const std::size_t first_comma = row.find(',');
  const std::size_t second_comma = row.find(',', first_comma + 1);
  const std::string tips =
      row.substr(first_comma + 1, second_comma - first_comma - 1);
  row = row.substr(0, first_comma + 1) + std::to_string(std::stoi(tips) + 1) +
        row.substr(second_comma);
  std::string rebuilt;
  for (const std::string& l : lines) rebuilt += l + "\n";
  spit(dir / "trace_seed17.csv", rebuilt);

  const CmdResult bad = run_cli("replay --trace " + trace_arg);
  EXPECT_EQ(bad.exit_code, 4);
  EXPECT_NE(bad.output.find("replay mismatch"), std::string::npos);
  EXPECT_NE(bad.output.find("500"), std::string::npos);
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

TEST(AnalyzeCommand, EmitsTheMetricsDocument) {
  const fs::path dir = scratch("analyze");
  ASSERT_EQ(run_cli("run --seed 23 --steps 1200 --out " + dir.string())
                .exit_code,
            0);
  const CmdResult r = run_cli("analyze --trace " +
                              (dir / "trace_seed23.meta.json").string() +
                              " --grid 5 --out " +
                              (dir / "metrics.json").string());
  ASSERT_EQ(r.exit_code, 0) << r.output;

  const Json m = tangleproof::read_json_file((dir / "metrics.json").string());
  EXPECT_EQ(m.at("kind"), "metrics");
  EXPECT_EQ(m.at("steps"), 1200);
  EXPECT_TRUE(m.at("tip_gap").at("within").get<bool>());
  EXPECT_LE(m.at("tip_gap").at("max_abs_gap").get<int>(),
            m.at("tip_gap").at("cap").get<int>());
  ASSERT_EQ(m.at("confirmation").size(), 5u);
  std::size_t prev_confirmed = 0;
  for (const Json& row : m.at("confirmation")) {
    EXPECT_GE(row.at("confirmed").get<std::size_t>(), prev_confirmed);
    EXPECT_LE(row.at("confirmed").get<std::size_t>(),
              row.at("solid").get<std::size_t>());
    prev_confirmed = row.at("confirmed").get<std::size_t>();
  }
  ASSERT_EQ(m.at("divergence").size(), 4u);
  for (const Json& pair : m.at("divergence")) {
    EXPECT_GE(pair.at("distance").get<double>(), 0.0);
    EXPECT_LE(pair.at("distance").get<double>(), 1.0);
  }
  EXPECT_GE(m.at("stabilization_radius").get<int>(), 0);
  EXPECT_EQ(m.at("threshold_hits").at("threshold"), 33);
}

// ---------------------------------------------------------------------------
// Exit-code table
// ---------------------------------------------------------------------------

TEST(ExitCodes, MapErrorClassesStably) {
  const fs::path dir = scratch("exit_codes");
  const fs::path garbled = dir / "garbled.json";
  spit(garbled, "{{{ not json");
  const fs::path bad_values = dir / "bad_values.json";
  spit(bad_values, R"({
    "schema": "tangleproof/v1",
    "kind": "config",
    "tip_threshold": -5
  })");

  const std::vector<std::pair<std::string, int>> table = {
      {"--help", 0},
      {"", 1},                                        // missing subcommand
      {"run --steps 0 --out " + dir.string(), 1},     // zero-length run
      {"run --steps -3", 1},                          // rejected by usage check
      {"run --config " + bad_values.string(), 1},     // values out of range
      {"run --config " + dir.string() + "/nope.json", 2},  // unreadable file
      {"run --config " + garbled.string(), 2},        // unparseable file
      {"replay --trace " + dir.string() + "/nope.meta.json", 2},
      {"force --steps 0 --out " + dir.string(), 3},   // empty anchor window
  };
  for (const auto& [args, expected] : table)
    EXPECT_EQ(run_cli(args).exit_code, expected) << "args: " << args;
}

}  // namespace
