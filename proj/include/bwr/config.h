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

// Run configuration: a line-oriented "[section]" / "key = value" format
// covering the robot, environment, learner and run settings.

#ifndef BWR_CONFIG_H_
#define BWR_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "bwr/ddpg.h"
#include "bwr/env.h"

namespace bwr {

struct RunSettings {
  int episodes = 200;
  // Per-episode step budget for training; 0 leaves it to the environment.
  int max_steps = 0;
  // Episodes between checkpoints; 0 writes only the final one.
  int checkpoint_interval = 50;
  std::string output_dir = "runs/default";
  // Record real elapsed time in the metrics; off keeps the CSV reproducible.
  bool wall_clock = false;

  bool operator==(const RunSettings&) const = default;
};

struct RunConfig {
  BipedEnvConfig env;
  DdpgConfig ddpg;
  RunSettings run;
  std::uint64_t seed = 0;

  bool operator==(const RunConfig&) const = default;
};

// Syntax and validation failures; the message names the line or key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

RunConfig parse_config(const std::string& text,
                       const std::string& origin = "<config>");
RunConfig load_config(const std::filesystem::path& path);
void validate(const RunConfig& config);

// Every key with its effective value; parsing it yields the same config.
std::string config_echo(const RunConfig& config);

// FNV-1a over the echo of everything except the [run] section, so runs
// that differ only in length or output location can resume each other.
std::uint64_t config_hash(const RunConfig& config);

}  // namespace bwr

#endif  // BWR_CONFIG_H_
