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

#include "bwr/point_mass_env.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace bwr {

PointMassEnv::PointMassEnv(PointMassConfig config) : config_(config) {
  if (!(config_.dt > 0) || config_.horizon <= 0 ||
      !(config_.action_bound > 0) || !(config_.action_cost >= 0) ||
      !(config_.position_limit >= 0)) {
    throw std::invalid_argument("invalid point-mass configuration");
  }
}

Eigen::VectorXd PointMassEnv::reset(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  x_ = config_.init_position_range * unit(rng);
  v_ = config_.init_velocity_range * unit(rng);
  steps_ = 0;
  done_ = false;
  return Eigen::Vector2d(x_, v_);
}

StepResult PointMassEnv::step(const Eigen::VectorXd& action) {
  if (done_) throw std::logic_error("step called on a finished episode");
  if (action.size() != 1) throw std::invalid_argument("action must be 1-D");
  const double a =
      std::clamp(action[0], -config_.action_bound, config_.action_bound);
  StepResult result;
  result.reward = -(x_ * x_ + config_.action_cost * a * a);
  v_ += config_.dt * a;
  x_ += config_.dt * v_;
  if (config_.position_limit > 0.0 && std::abs(x_) > config_.position_limit) {
    x_ = std::copysign(config_.position_limit, x_);
    v_ = 0.0;
  }
  ++steps_;
  done_ = steps_ >= config_.horizon;
  result.done = done_;
  result.observation = Eigen::Vector2d(x_, v_);
  result.info.distance_m = x_;
  result.info.sim_time = steps_ * config_.dt;
  return result;
}

}  // namespace bwr
