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

// Episodic MDP wrappers: the biped walker at a 50 Hz control rate and the
// interface the DDPG trainer drives.

#ifndef BWR_ENV_H_
#define BWR_ENV_H_

#include <cstdint>

#include <Eigen/Core>

#include "bwr/dynamics.h"

namespace bwr {

inline constexpr int kObservationDim = 12;
inline constexpr int kActionDim = 4;

using Observation = Eigen::Matrix<double, kObservationDim, 1>;
using Action = Eigen::Matrix<double, kActionDim, 1>;

struct StepInfo {
  double distance_m = 0.0;
  bool fell = false;
  bool diverged = false;
  double sim_time = 0.0;
  // Failure termination (fall or divergence); time-outs and reaching the
  // goal end the episode without being terminal.
  bool terminal = false;
};

struct StepResult {
  Eigen::VectorXd observation;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

class Environment {
 public:
  virtual ~Environment() = default;
  virtual int observation_dim() const = 0;
  virtual int action_dim() const = 0;
  // Actions are valid in [-action_bound, +action_bound] per dimension.
  virtual double action_bound() const = 0;
  virtual Eigen::VectorXd reset(std::uint64_t seed) = 0;
  virtual StepResult step(const Eigen::VectorXd& action) = 0;
};

struct RewardWeights {
  double w_velocity = 1.0;
  double w_alive = 0.05;
  double w_torque = 1e-4;
  double fall_penalty = 10.0;

  bool operator==(const RewardWeights&) const = default;
};

struct BipedEnvConfig {
  RobotSpec robot = build_default_robot();
  RewardWeights reward;
  int episode_cap = 1000;       // control steps
  int substeps = 20;            // physics steps per control step
  double physics_dt = 1e-3;     // s
  double init_noise = 0.05;     // rad, uniform joint-angle perturbation
  double goal_distance = 10.0;  // m
  bool normalize_observations = true;

  double control_period() const { return substeps * physics_dt; }

  bool operator==(const BipedEnvConfig&) const = default;
};

// Throws std::invalid_argument naming the offending field.
void validate(const BipedEnvConfig& config);

// r = w_v * ydot + w_alive - w_torque * |tau|^2 - fall_penalty * [fell].
double reward(const RewardWeights& weights, const RobotState& after,
              const Torques& applied, bool fell);

// Field order: hip angles (R, L), hip velocities, knee angles, knee
// velocities, waist (ydot, zdot), foot contacts (R, L). When normalized,
// angles are divided by pi, joint rates by 10 rad/s and waist velocity by
// 2 m/s; contacts are passed through.
Observation observation_of(const RobotState& state, bool normalize);

class BipedEnv final : public Environment {
 public:
  explicit BipedEnv(BipedEnvConfig config = {});

  int observation_dim() const override { return kObservationDim; }
  int action_dim() const override { return kActionDim; }
  double action_bound() const override { return config_.robot.torque_limit; }

  Eigen::VectorXd reset(std::uint64_t seed) override;
  StepResult step(const Eigen::VectorXd& action) override;
  // Starts an episode from an explicit state; distance is measured from it.
  Eigen::VectorXd reset_to(const RobotState& state);

  const BipedEnvConfig& config() const { return config_; }
  const RobotState& state() const { return state_; }
  const Torques& last_applied() const { return applied_; }
  int steps() const { return steps_; }
  bool done() const { return done_; }

 private:
  BipedEnvConfig config_;
  RobotState state_;
  Torques applied_ = Torques::Zero();
  double start_y_ = 0.0;
  int steps_ = 0;
  bool done_ = true;
};

}  // namespace bwr

#endif  // BWR_ENV_H_
