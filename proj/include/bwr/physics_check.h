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

// Self-checks of the simulator against closed-form expectations, run for a
// given robot configuration.

#ifndef BWR_PHYSICS_CHECK_H_
#define BWR_PHYSICS_CHECK_H_

#include <string>
#include <vector>

#include "bwr/dynamics.h"

namespace bwr {

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double expected = 0.0;
  // Allowed |measured - expected|.
  double tolerance = 0.0;
  std::string detail;
};

struct PhysicsReport {
  std::vector<CheckResult> checks;
  bool passed() const;
};

// Airborne energy drift over 1 s.
CheckResult check_energy_drift(const RobotSpec& spec, double dt = 1e-3);
// Symmetry and positive definiteness of M(q) over random states.
CheckResult check_mass_matrix(const RobotSpec& spec, int states = 1000,
                              std::uint64_t seed = 1);
// Total normal force after settling on straight legs vs m g, within 2%.
CheckResult check_static_stance(const RobotSpec& spec, double dt = 1e-3);
// One rigid leg swinging about the pinned hip from 4.5 degrees vs the
// compound-pendulum period, within 1%.
CheckResult check_pendulum_period(const RobotSpec& spec, double dt = 1e-3);
// Waist acceleration of the airborne robot released from rest vs -g.
CheckResult check_free_fall(const RobotSpec& spec, double dt = 1e-3);

// Analytic small-angle period of the straight leg about the hip.
double leg_pendulum_period(const RobotSpec& spec);

PhysicsReport run_physics_checks(const RobotSpec& spec);
std::string format_report(const PhysicsReport& report);

}  // namespace bwr

#endif  // BWR_PHYSICS_CHECK_H_
