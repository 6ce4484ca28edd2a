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

#include "bwr/config.h"

#include <gtest/gtest.h>

namespace bwr {
namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "test.cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, EmptyTextGivesDefaults) {
  const RunConfig c = parse_config("");
  EXPECT_EQ(c, RunConfig{});
  EXPECT_DOUBLE_EQ(c.ddpg.ou.theta, 0.15);
  EXPECT_DOUBLE_EQ(c.ddpg.gamma, 0.99);
  EXPECT_EQ(c.env.episode_cap, 1000);
}

TEST(Config, SectionsDottedKeysAndComments) {
  const RunConfig c = parse_config(
      "# header comment\n"
      "[ddpg]\n"
      "gamma = 0.9   # trailing comment\n"
      "hidden = 32, 16\n"
      "\n"
      "env.seed = 7\n"
      "[run]\n"
      "output_dir = out/a#b\n"
      "wall_clock = true\n");
  EXPECT_DOUBLE_EQ(c.ddpg.gamma, 0.9);
  EXPECT_EQ(c.ddpg.network.hidden, (std::vector<int>{32, 16}));
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.run.output_dir, "out/a#b");
  EXPECT_TRUE(c.run.wall_clock);
}

TEST(Config, OutOfRangeGammaIsRejected) {
  const std::string err = error_of("[ddpg]\ngamma = 1.5\n");
  EXPECT_NE(err.find("gamma"), std::string::npos) << err;
}

TEST(Config, ZeroContactStiffnessIsRejected) {
  const std::string err = error_of("[robot]\ncontact_stiffness = 0\n");
  EXPECT_NE(err.find("contact_stiffness"), std::string::npos) << err;
}

TEST(Config, SyntaxErrorsCarryLineNumbers) {
  EXPECT_NE(error_of("[env]\n\nw_alive 0.1\n").find("test.cfg:3:"), std::string::npos);
  EXPECT_NE(error_of("[env]\nbogus = 1\n").find("test.cfg:2: unknown key 'env.bogus'"),
            std::string::npos);
  EXPECT_NE(error_of("[nope]\n").find("test.cfg:1:"), std::string::npos);
  EXPECT_NE(error_of("gamma = 0.5\n").find("outside any section"), std::string::npos);
  EXPECT_NE(error_of("[ddpg]\nbatch_size = 6x4\n").find("test.cfg:2:"), std::string::npos);
  EXPECT_NE(error_of("[env]\nnormalize_observations = maybe\n").find(":2:"),
            std::string::npos);
}

TEST(Config, EchoRoundTripsExactly) {
  RunConfig c = parse_config(
      "[robot]\nthigh_length = 0.21\ngravity = 9.80665\n"
      "[env]\nw_torque = 3e-4\nseed = 123456789012\n"
      "[ddpg]\ntau = 0.0015\nhidden = 40\nbatch_norm = false\n"
      "[run]\nepisodes = 5\n");
  const RunConfig back = parse_config(config_echo(c));
  EXPECT_EQ(back, c);
  EXPECT_EQ(config_echo(back), config_echo(c));
}

TEST(Config, LinkGeometryRederivesOffsetAndInertia) {
  const RunConfig c = parse_config("[robot]\nshank_mass = 0.4\nshank_length = 0.3\n");
  for (int id : {kShankR, kShankL}) {
    const LinkSpec& l = c.env.robot.links[id];
    EXPECT_DOUBLE_EQ(l.com_offset, 0.15);
    EXPECT_DOUBLE_EQ(l.inertia, 0.4 * 0.09 / 12.0);
  }
  const RunConfig e = parse_config("[robot]\nshank_length = 0.3\nshank_inertia = 0.01\n");
  EXPECT_DOUBLE_EQ(e.env.robot.links[kShankL].inertia, 0.01);
  EXPECT_DOUBLE_EQ(e.env.robot.links[kShankL].com_offset, 0.15);
}

TEST(Config, HashIgnoresRunSection) {
  const RunConfig a = parse_config("[run]\nepisodes = 10\noutput_dir = x\n");
  const RunConfig b = parse_config("[run]\nepisodes = 99\noutput_dir = y\n");
  const RunConfig c = parse_config("[env]\nseed = 1\n");
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_NE(config_hash(a), config_hash(c));
}

TEST(Config, MissingFileIsAConfigError) {
  EXPECT_THROW(load_config("/nonexistent/dir/x.cfg"), ConfigError);
}

}  // namespace
}  // namespace bwr
