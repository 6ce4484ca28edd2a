// Copyright 2026 The BWR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bwr/commands.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "agent_compare.h"
#include "bwr/checkpoint.h"
#include "bwr/gait.h"

namespace bwr {
namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "bwr_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Small networks and an early start of updates keep the runs short while
// still exercising the learner.
RunConfig quick_config(const fs::path& out, int episodes) {
  RunConfig c;
  c.ddpg.network.hidden = {16, 16};
  c.ddpg.warmup = 32;
  c.ddpg.batch_size = 16;
  c.run.episodes = episodes;
  c.run.output_dir = out.string();
  c.run.checkpoint_interval = 3;
  c.seed = 17;
  return c;
}

// The checkpoints embed the output directory, so compare their contents
// rather than their bytes.
std::string final_agent_difference(const fs::path& a, const fs::path& b) {
  const RunConfig c = quick_config(a, 0);
  BipedEnv env(c.env);
  Agent x = make_agent(c.ddpg, env, 0), y = make_agent(c.ddpg, env, 0);
  load_checkpoint(a / kCheckpointDir / kFinalCheckpoint, x);
  load_checkpoint(b / kCheckpointDir / kFinalCheckpoint, y);
  return testing::first_difference(x, y);
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(BWR_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Train, TwoEpisodeSmokeRun) {
  const fs::path out = fresh_dir("smoke");
  RunConfig c = quick_config(out, 2);
  std::ostringstream log;
  const TrainResult r = cmd_train(c, std::nullopt, log);
  EXPECT_EQ(r.episodes_done, 2);
  EXPECT_EQ(read_csv(r.metrics).rows(), 2u);
  EXPECT_TRUE(fs::exists(r.final_checkpoint));
  EXPECT_EQ(parse_config(slurp(out / kConfigEchoFile)), c);
}

TEST(Train, MetricsAreByteIdenticalAcrossRuns) {
  std::ostringstream log;
  const fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b");
  cmd_train(quick_config(a, 6), std::nullopt, log);
  cmd_train(quick_config(b, 6), std::nullopt, log);
  EXPECT_TRUE(slurp(a / kMetricsFile) == slurp(b / kMetricsFile));
  EXPECT_EQ(read_csv(a / kMetricsFile).rows(), 6u);
  EXPECT_EQ(final_agent_difference(a, b), "");
}

TEST(Train, ResumeMatchesUninterruptedRun) {
  std::ostringstream log;
  const fs::path whole = fresh_dir("whole"), split = fresh_dir("split");
  cmd_train(quick_config(whole, 6), std::nullopt, log);
  cmd_train(quick_config(split, 6), std::nullopt, log);
  // Restart the second run from its episode-3 checkpoint.
  cmd_train(quick_config(split, 6), checkpoint_file(split, 3), log);
  EXPECT_TRUE(slurp(whole / kMetricsFile) == slurp(split / kMetricsFile));
  EXPECT_EQ(final_agent_difference(whole, split), "");
}

TEST(Train, ResumeRejectsADifferentConfiguration) {
  std::ostringstream log;
  const fs::path out = fresh_dir("mismatch");
  cmd_train(quick_config(out, 3), std::nullopt, log);
  RunConfig other = quick_config(out, 6);
  other.ddpg.tau = 0.002;
  EXPECT_THROW(cmd_train(other, checkpoint_file(out, 3), log), CheckpointError);
  // Run-section changes keep the hash.
  RunConfig longer = quick_config(out, 4);
  longer.run.checkpoint_interval = 0;
  EXPECT_EQ(cmd_train(longer, checkpoint_file(out, 3), log).episodes_done, 4);
}

TEST(Eval, DeterministicSummariesAndTraces) {
  std::ostringstream log;
  const fs::path out = fresh_dir("eval");
  const RunConfig c = quick_config(out / "run", 2);
  const TrainResult t = cmd_train(c, std::nullopt, log);
  const EvalSummary a = cmd_eval(c, t.final_checkpoint, 3, 5, out / "a", log);
  const EvalSummary b = cmd_eval(c, t.final_checkpoint, 3, 5, out / "b", log);
  EXPECT_EQ(a.mean_return, b.mean_return);
  EXPECT_EQ(slurp(out / "a" / "eval_summary.csv"), slurp(out / "b" / "eval_summary.csv"));
  EXPECT_EQ(slurp(out / "a" / "trace_002.csv"), slurp(out / "b" / "trace_002.csv"));
  EXPECT_EQ(config_from_checkpoint(t.final_checkpoint), c);
}

TEST(Eval, ZeroEpisodesGiveAnEmptySummary) {
  std::ostringstream log;
  const fs::path out = fresh_dir("eval0");
  const RunConfig c = quick_config(out / "run", 1);
  const TrainResult t = cmd_train(c, std::nullopt, log);
  const EvalSummary s = cmd_eval(c, t.final_checkpoint, 0, 1, out / "e", log);
  EXPECT_EQ(s.episodes, 0);
  EXPECT_EQ(read_csv(out / "e" / "eval_summary.csv").rows(), 0u);
}

TEST(Eval, UntrainedAgentAlwaysFalls) {
  std::ostringstream log;
  const fs::path out = fresh_dir("untrained");
  RunConfig c;
  c.run.output_dir = (out / "run").string();
  c.run.episodes = 0;
  const TrainResult t = cmd_train(c, std::nullopt, log);
  const EvalSummary s = cmd_eval(c, t.final_checkpoint, 5, 3, out / "e", log);
  EXPECT_EQ(s.fall_rate, 1.0);
}

Table antiphase_trace() {
  Table t;
  t.names = {"time", "hip_r", "hip_l", "knee_r", "knee_l"};
  t.columns.resize(5);
  const double f = 0.9, w = 2.0 * std::numbers::pi * f;
  for (int i = 0; i < 500; ++i) {
    const double time = 0.02 * (i + 1);
    t.columns[0].push_back(time);
    t.columns[1].push_back(0.4 * std::sin(w * time));
    t.columns[2].push_back(-0.4 * std::sin(w * time));
    t.columns[3].push_back(0.6 + 0.3 * std::sin(2.0 * w * time));
    t.columns[4].push_back(0.6 - 0.3 * std::sin(2.0 * w * time));
  }
  return t;
}

TEST(Analyze, ConstructedGaitReportsAntiphaseAndDoubleFrequency) {
  std::ostringstream log;
  const fs::path dir = fresh_dir("analyze");
  write_csv(antiphase_trace(), dir / "walk.csv");
  const std::string report = cmd_analyze({dir / "walk.csv"}, dir / "out", log);
  EXPECT_NE(report.find("hip phase difference [rad]: 3.14"), std::string::npos) << report;
  EXPECT_NE(report.find("knee/hip frequency ratio: 2.00"), std::string::npos) << report;
  EXPECT_TRUE(fs::exists(dir / "out" / "walk_hips.svg"));
  EXPECT_TRUE(fs::exists(dir / "out" / "walk_knees.svg"));
}

TEST(Analyze, RewardCurveHasOnePointPerEpisodeAndStableBytes) {
  std::ostringstream log;
  const fs::path dir = fresh_dir("curve");
  Table m;
  m.names = {"episode", "steps", "return", "distance_m", "fell", "wall_ms"};
  m.columns.resize(6);
  for (int e = 1; e <= 250; ++e) {
    const double row[] = {double(e), 10.0, -10.0 + 0.05 * e, 0.0, 1.0, 0.0};
    for (int c = 0; c < 6; ++c) m.columns[c].push_back(row[c]);
  }
  write_csv(m, dir / "metrics.csv");
  cmd_analyze({dir / "metrics.csv"}, dir / "a", log);
  cmd_analyze({dir / "metrics.csv"}, dir / "b", log);
  EXPECT_EQ(read_csv(dir / "a" / "metrics_reward_curve.csv").rows(), 250u);
  EXPECT_EQ(slurp(dir / "a" / "metrics_reward_curve.svg"),
            slurp(dir / "b" / "metrics_reward_curve.svg"));
  EXPECT_EQ(slurp(dir / "a" / "report.txt"), slurp(dir / "b" / "report.txt"));
}

TEST(Analyze, MalformedInputNamesTheLine) {
  std::ostringstream log;
  const fs::path dir = fresh_dir("malformed");
  std::ofstream(dir / "bad.csv") << "episode,return\n1,2\n2,oops\n";
  try {
    cmd_analyze({dir / "bad.csv"}, dir / "out", log);
    FAIL() << "expected an error";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
}

TEST(PhysicsCheck, DefaultConfigurationPasses) {
  std::ostringstream log;
  EXPECT_TRUE(cmd_physics_check(RunConfig{}, log).passed()) << log.str();
}

TEST(PhysicsCheck, ZeroGravityDropHasNoAcceleration) {
  RunConfig c;
  c.env.robot.gravity = 0.0;
  std::ostringstream log;
  const PhysicsReport r = cmd_physics_check(c, log);
  EXPECT_TRUE(r.passed()) << log.str();
  for (const CheckResult& check : r.checks) {
    if (check.name == "free_fall") {
      EXPECT_EQ(check.measured, 0.0);
    }
  }
}

TEST(Cli, ExitCodes) {
  const fs::path dir = fresh_dir("exit");
  EXPECT_EQ(run_cli("physics-check"), kExitOk);
  std::ofstream(dir / "gamma.cfg") << "[ddpg]\ngamma = 1.5\n";
  EXPECT_EQ(run_cli("train --config " + (dir / "gamma.cfg").string() + " --out " +
                    (dir / "never").string()),
            kExitValidation);
  EXPECT_FALSE(fs::exists(dir / "never"));
  std::ofstream(dir / "soft.cfg") << "[robot]\ncontact_stiffness = 0\n";
  EXPECT_EQ(run_cli("physics-check --config " + (dir / "soft.cfg").string()), kExitValidation);
  std::ofstream(dir / "heavy.cfg") << "[robot]\ngravity = 100\n";
  EXPECT_EQ(run_cli("physics-check --config " + (dir / "heavy.cfg").string()),
            kExitCheckFailed);
  std::ofstream(dir / "bad.ckpt") << "garbage";
  EXPECT_EQ(run_cli("eval --checkpoint " + (dir / "bad.ckpt").string() + " --out " +
                    (dir / "eval_out").string()),
            kExitRuntime);
  EXPECT_FALSE(fs::exists(dir / "eval_out"));
  EXPECT_EQ(run_cli("no-such-command"), kExitValidation);
}

TEST(Cli, TrainEvalAnalyzeRoundTrip) {
  const fs::path dir = fresh_dir("round_trip");
  const std::string run = (dir / "run").string();
  ASSERT_EQ(run_cli("train --episodes 2 --seed 9 --out " + run), kExitOk);
  EXPECT_EQ(read_csv(dir / "run" / kMetricsFile).rows(), 2u);
  ASSERT_EQ(run_cli("eval --checkpoint " + run + "/checkpoints/final.ckpt --episodes 1 --out " +
                    (dir / "eval").string()),
            kExitOk);
  EXPECT_EQ(run_cli("analyze " + run + "/metrics.csv " + (dir / "eval" / "trace_000.csv").string() +
                    " --out " + (dir / "analysis").string()),
            kExitOk);
  EXPECT_TRUE(fs::exists(dir / "analysis" / "report.txt"));
}

}  // namespace
}  // namespace bwr
