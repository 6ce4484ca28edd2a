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

// Binary training checkpoints. The main file holds the networks, optimizer
// moments, RNG engines, noise state and counters; the replay buffer goes to
// a sidecar next to it. All numbers are little-endian.

#ifndef BWR_CHECKPOINT_H_
#define BWR_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "bwr/ddpg.h"

namespace bwr {

inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CheckpointHeader {
  std::uint32_t version = kCheckpointVersion;
  std::uint64_t config_hash = 0;
  std::int64_t episode = 0;
  std::string config_echo;
};

std::filesystem::path replay_sidecar(const std::filesystem::path& checkpoint);

// Both files are written to temporaries and renamed into place.
void save_checkpoint(const std::filesystem::path& path, const Agent& agent,
                     std::uint64_t config_hash, const std::string& config_echo);

CheckpointHeader read_checkpoint_header(const std::filesystem::path& path);

// Overwrites the state of an agent built from the same configuration. The
// replay buffer is restored only when with_replay is set.
CheckpointHeader load_checkpoint(const std::filesystem::path& path, Agent& agent,
                                 bool with_replay = true);

}  // namespace bwr

#endif  // BWR_CHECKPOINT_H_
