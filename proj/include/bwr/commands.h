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

// Subcommands of the command-line tool. Each writes its artifacts under an
// output directory and reports progress to a log stream.

#ifndef BWR_COMMANDS_H_
#define BWR_COMMANDS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bwr/config.h"
#include "bwr/physics_check.h"

namespace bwr {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 1,
  kExitRuntime = 2,
  kExitCheckFailed = 3,
};

// Unusable input files (malformed CSV, unrecognized columns).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kMetricsFile = "metrics.csv";
inline constexpr const char* kConfigEchoFile = "config.ini";
inline constexpr const char* kCheckpointDir = "checkpoints";
inline constexpr const char* kFinalCheckpoint = "final.ckpt";

std::filesystem::path checkpoint_file(const std::filesystem::path& out_dir,
                                      std::int64_t episode);

struct TrainResult {
  std::int64_t episodes_done = 0;
  std::filesystem::path metrics;
  std::filesystem::path final_checkpoint;
};

// Trains until config.run.episodes episodes exist in total. A resume
// checkpoint must come from the same configuration (hash match); metrics
// rows already on disk beyond the checkpoint are dropped.
TrainResult cmd_train(const RunConfig& config,
                      const std::optional<std::filesystem::path>& resume,
                      std::ostream& log);

// Configuration embedded in a checkpoint.
RunConfig config_from_checkpoint(const std::filesystem::path& checkpoint);

struct EvalSummary {
  int episodes = 0;
  double mean_return = 0.0;
  double mean_speed = 0.0;
  double fall_rate = 0.0;
};

// Noise-free rollouts; episode i starts from derive_seed(seed, i). Writes
// eval_summary.csv, eval_summary.txt and one trace CSV per episode.
EvalSummary cmd_eval(const RunConfig& config, const std::filesystem::path& checkpoint,
                     int episodes, std::uint64_t seed, const std::filesystem::path& out,
                     std::ostream& log);

// Metrics files (with a "return" column) give reward curves; gait traces
// (with joint-angle columns) give trajectory plots and gait statistics.
// Returns the report, also written to report.txt.
std::string cmd_analyze(const std::vector<std::filesystem::path>& inputs,
                        const std::filesystem::path& out, std::ostream& log);

PhysicsReport cmd_physics_check(const RunConfig& config, std::ostream& log);

}  // namespace bwr

#endif  // BWR_COMMANDS_H_
