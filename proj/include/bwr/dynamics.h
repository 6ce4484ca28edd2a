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

// Planar rigid-body model of the 5-link biped on a boom.
//
// Generalized coordinates q = (y, z, hipR, hipL, kneeR, kneeL). The waist is
// carried by two prismatic boom joints, so it translates in the sagittal
// plane without rotating. Angles are measured from the downward vertical:
// a positive hip angle swings the thigh forward (+y), a positive knee angle
// folds the shank backward relative to the thigh.

#ifndef BWR_DYNAMICS_H_
#define BWR_DYNAMICS_H_

#include <array>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace bwr {

using Vec2 = Eigen::Vector2d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Torques = Eigen::Vector4d;

inline constexpr int kNumDof = 6;
inline constexpr int kNumJoints = 4;
inline constexpr int kNumLinks = 5;

enum LinkIndex : int { kWaist = 0, kThighR, kThighL, kShankR, kShankL };
enum JointIndex : int { kHipR = 0, kHipL, kKneeR, kKneeL };
enum FootIndex : int { kRight = 0, kLeft = 1 };

struct LinkSpec {
  std::string name;
  double mass = 0.0;        // kg
  double length = 0.0;      // m
  double com_offset = 0.0;  // m from the proximal joint along the link
  double inertia = 0.0;     // kg m^2 about the COM

  bool operator==(const LinkSpec&) const = default;
};

struct JointLimits {
  double hip_flexion_max = 0.0;
  double hip_extension_max = 0.0;
  double knee_flexion_max = 0.0;
  double knee_extension_max = 0.0;

  // Bounds for joint j in the signed convention [-extension, +flexion].
  double lower(int joint) const;
  double upper(int joint) const;

  bool operator==(const JointLimits&) const = default;
};

struct RobotSpec {
  std::array<LinkSpec, kNumLinks> links;
  JointLimits limits;
  double gravity = 9.81;               // m/s^2, acting along -z
  double contact_stiffness = 1.0e4;    // N/m
  double contact_damping = 100.0;      // N s/m
  double friction_coefficient = 1.0;
  double tangential_damping = 100.0;   // N s/m, viscous friction regularizer
  double torque_limit = 3.0;           // N m per joint

  double total_mass() const;
  // Hip height with both legs straight and vertical.
  double standing_height() const;
  // Waist heights strictly below this count as a fall.
  double fall_threshold() const { return 0.6 * standing_height(); }

  bool operator==(const RobotSpec&) const = default;
};

// Throws std::invalid_argument naming the first violated constraint.
void validate(const RobotSpec& spec);

struct RobotState {
  Vec2 waist_pos = Vec2::Zero();  // hip joint location (y, z)
  Vec2 waist_vel = Vec2::Zero();
  Eigen::Vector4d joint_angles = Eigen::Vector4d::Zero();
  Eigen::Vector4d joint_vels = Eigen::Vector4d::Zero();
  std::array<bool, 2> foot_contact{false, false};
  double sim_time = 0.0;

  Vec6 q() const;
  Vec6 qdot() const;
  void set_q(const Vec6& q);
  void set_qdot(const Vec6& qd);
  bool all_finite() const;
};

struct SimulationDiverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Link masses from the physical build; lengths and inertias assume slender
// uniform rods of 0.22 m per leg segment and a 0.10 m waist block.
RobotSpec build_default_robot();

struct Kinematics {
  Vec2 hip;
  std::array<Vec2, 2> knee;
  std::array<Vec2, 2> foot;
  std::array<Vec2, kNumLinks> com;
  std::array<double, kNumLinks> angle;  // absolute link angle from vertical
};

Kinematics forward_kinematics(const RobotSpec& spec, const RobotState& state);

// Generalized forces needed to produce accelerations qddot at (q, qdot),
// gravity included when with_gravity is set. Projected Newton-Euler.
Vec6 inverse_dynamics(const RobotSpec& spec, const Vec6& q, const Vec6& qdot,
                      const Vec6& qddot, bool with_gravity);

Mat6 mass_matrix(const RobotSpec& spec, const RobotState& state);

// Coriolis, centrifugal and gravity terms: M qddot + bias = applied.
Vec6 bias_forces(const RobotSpec& spec, const RobotState& state);

// Translational Jacobian of a foot point (2x6).
Eigen::Matrix<double, 2, 6> foot_jacobian(const RobotSpec& spec,
                                          const RobotState& state, int foot);

struct ContactForce {
  double normal = 0.0;
  double tangential = 0.0;
  bool in_contact = false;
};

std::array<ContactForce, 2> contact_forces(const RobotSpec& spec,
                                           const RobotState& state);

// Degrees of freedom held fixed during a step (zero velocity and
// acceleration). Used for the boom-pinned pendulum check.
using DofMask = std::array<bool, kNumDof>;

// One semi-implicit Euler step: v += dt M^-1 (tau - bias + J' f), q += dt v.
// Contact forces use the end-of-step foot state so that penalty contact stays
// dissipative at stiff settings. Torques are applied as given; callers clamp.
RobotState step(const RobotSpec& spec, const RobotState& state,
                const Torques& torques, double dt, const DofMask& locked = {});

struct EnergyBreakdown {
  double kinetic = 0.0;
  double gravitational = 0.0;
  double contact_elastic = 0.0;
  double total() const { return kinetic + gravitational + contact_elastic; }
};

EnergyBreakdown energy(const RobotSpec& spec, const RobotState& state);

// Kinetic + gravitational potential (COM heights above z = 0) + elastic
// energy stored in penetrating contact springs.
double total_energy(const RobotSpec& spec, const RobotState& state);

bool check_fall(const RobotSpec& spec, const RobotState& state);

}  // namespace bwr

#endif  // BWR_DYNAMICS_H_
