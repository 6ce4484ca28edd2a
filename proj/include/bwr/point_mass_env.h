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

// 1-D point mass driven by a bounded force: a small linear-quadratic task
// with a known optimum, used to check the learner end to end.

#ifndef BWR_POINT_MASS_ENV_H_
#define BWR_POINT_MASS_ENV_H_

#include "bwr/env.h"

namespace bwr {

struct PointMassConfig {
  double dt = 0.2;
  int horizon = 40;
  double action_bound = 5.0;
  double init_position_range = 1.0;  // x0 ~ U[-r, r]
  double init_velocity_range = 0.0;  // v0 ~ U[-r, r]
  double action_cost = 0.1;
  // Inelastic end stops at |x| = limit (velocity zeroed); 0 disables them.
  double position_limit = 3.0;
};

// v' = v + dt a, x' = x + dt v'. Reward -(x^2 + c a^2) on the pre-step state.
class PointMassEnv final : public Environment {
 public:
  explicit PointMassEnv(PointMassConfig config = {});

  int observation_dim() const override { return 2; }
  int action_dim() const override { return 1; }
  double action_bound() const override { return config_.action_bound; }

  Eigen::VectorXd reset(std::uint64_t seed) override;
  StepResult step(const Eigen::VectorXd& action) override;

  const PointMassConfig& config() const { return config_; }
  double position() const { return x_; }
  double velocity() const { return v_; }

 private:
  PointMassConfig config_;
  double x_ = 0.0;
  double v_ = 0.0;
  int steps_ = 0;
  bool done_ = true;
};

}  // namespace bwr

#endif  // BWR_POINT_MASS_ENV_H_
