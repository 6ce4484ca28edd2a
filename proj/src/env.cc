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

#include "bwr/env.h"

#include <algorithm>
#include <numbers>
#include <random>
#include <stdexcept>

namespace bwr {

void validate(const BipedEnvConfig& config) {
  validate(config.robot);
  const RewardWeights& w = config.reward;
  if (!(w.w_velocity >= 0)) throw std::invalid_argument("w_velocity must be >= 0");
  if (!(w.w_alive >= 0)) throw std::invalid_argument("w_alive must be >= 0");
  if (!(w.w_torque >= 0)) throw std::invalid_argument("w_torque must be >= 0");
  if (!(w.fall_penalty >= 0))
    throw std::invalid_argument("fall_penalty must be >= 0");
  if (config.episode_cap <= 0)
    throw std::invalid_argument("episode_cap must be > 0");
  if (config.substeps <= 0) throw std::invalid_argument("substeps must be > 0");
  if (!(config.physics_dt > 0))
    throw std::invalid_argument("physics_dt must be > 0");
  if (!(config.init_noise >= 0))
    throw std::invalid_argument("init_noise must be >= 0");
  if (!(config.goal_distance > 0))
    throw std::invalid_argument("goal_distance must be > 0");
}

double reward(const RewardWeights& weights, const RobotState& after,
              const Torques& applied, bool fell) {
  return weights.w_velocity * after.waist_vel[0] + weights.w_alive -
         weights.w_torque * applied.squaredNorm() -
         (fell ? weights.fall_penalty : 0.0);
}

Observation observation_of(const RobotState& state, bool normalize) {
  const double angle_scale = normalize ? 1.0 / std::numbers::pi : 1.0;
  const double rate_scale = normalize ? 0.1 : 1.0;
  const double waist_scale = normalize ? 0.5 : 1.0;
  Observation obs;
  obs << state.joint_angles[kHipR] * angle_scale,
      state.joint_angles[kHipL] * angle_scale,
      state.joint_vels[kHipR] * rate_scale,
      state.joint_vels[kHipL] * rate_scale,
      state.joint_angles[kKneeR] * angle_scale,
      state.joint_angles[kKneeL] * angle_scale,
      state.joint_vels[kKneeR] * rate_scale,
      state.joint_vels[kKneeL] * rate_scale,
      state.waist_vel[0] * waist_scale, state.waist_vel[1] * waist_scale,
      state.foot_contact[kRight] ? 1.0 : 0.0,
      state.foot_contact[kLeft] ? 1.0 : 0.0;
  return obs;
}

BipedEnv::BipedEnv(BipedEnvConfig config) : config_(std::move(config)) {
  validate(config_);
}

Eigen::VectorXd BipedEnv::reset(std::uint64_t seed) {
  const RobotSpec& spec = config_.robot;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> noise(-config_.init_noise,
                                               config_.init_noise);
  RobotState s;
  for (int j = 0; j < kNumJoints; ++j) {
    s.joint_angles[j] = std::clamp(noise(rng), spec.limits.lower(j),
                                   spec.limits.upper(j));
  }
  // Lowest foot sinks to the static single-foot-pair load depth.
  s.waist_pos = {0.0, 0.0};
  const Kinematics k = forward_kinematics(spec, s);
  const double lowest = std::min(k.foot[kRight][1], k.foot[kLeft][1]);
  const double sink =
      spec.total_mass() * spec.gravity / (2.0 * spec.contact_stiffness);
  s.waist_pos[1] = -lowest - sink;
  const auto contacts = contact_forces(spec, s);
  s.foot_contact = {contacts[0].in_contact, contacts[1].in_contact};

  return reset_to(s);
}

Eigen::VectorXd BipedEnv::reset_to(const RobotState& state) {
  if (!state.all_finite()) throw std::invalid_argument("non-finite state");
  state_ = state;
  state_.sim_time = 0.0;
  applied_.setZero();
  start_y_ = state_.waist_pos[0];
  steps_ = 0;
  done_ = false;
  return observation_of(state_, config_.normalize_observations);
}

StepResult BipedEnv::step(const Eigen::VectorXd& action) {
  if (done_) throw std::logic_error("step called on a finished episode");
  if (action.size() != kActionDim)
    throw std::invalid_argument("action must have 4 entries");
  const RobotSpec& spec = config_.robot;
  const double limit = spec.torque_limit;
  for (int j = 0; j < kActionDim; ++j) {
    applied_[j] = std::clamp(action[j], -limit, limit);  // NaN passes through
  }

  StepResult result;
  try {
    for (int i = 0; i < config_.substeps; ++i) {
      state_ = bwr::step(spec, state_, applied_, config_.physics_dt);
    }
  } catch (const SimulationDiverged&) {
    result.info.diverged = true;
  }
  ++steps_;
  state_.sim_time = steps_ * config_.control_period();

  result.info.fell = result.info.diverged || check_fall(spec, state_);
  result.info.terminal = result.info.fell;
  result.info.distance_m = state_.waist_pos[0] - start_y_;
  result.info.sim_time = state_.sim_time;
  // A diverged step only carries the fall penalty.
  result.reward = result.info.diverged
                      ? -config_.reward.fall_penalty
                      : reward(config_.reward, state_, applied_, result.info.fell);
  result.observation = observation_of(state_, config_.normalize_observations);
  done_ = result.info.fell || result.info.distance_m >= config_.goal_distance ||
          steps_ >= config_.episode_cap;
  result.done = done_;
  return result;
}

}  // namespace bwr
