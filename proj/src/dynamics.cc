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

#include "bwr/dynamics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace bwr {
namespace {

Vec2 down(double angle) { return {std::sin(angle), -std::cos(angle)}; }
Vec2 tangent(double angle) { return {std::cos(angle), std::sin(angle)}; }

// Per-link velocity kinematics at a configuration: translational Jacobian of
// the COM and the angular-velocity selector row.
struct LinkJacobians {
  std::array<Eigen::Matrix<double, 2, 6>, kNumLinks> com;
  std::array<Eigen::Matrix<double, 1, 6>, kNumLinks> angular;
  std::array<Eigen::Matrix<double, 2, 6>, 2> foot;
};

struct LegGeometry {
  double thigh_length, thigh_com, shank_length, shank_com;
};

LegGeometry leg_geometry(const RobotSpec& spec) {
  // Both legs share one geometry; the right-side links are authoritative.
  return {spec.links[kThighR].length, spec.links[kThighR].com_offset,
          spec.links[kShankR].length, spec.links[kShankR].com_offset};
}

// Absolute link angles from generalized coordinates.
std::array<double, kNumLinks> link_angles(const Vec6& q) {
  return {0.0, q[2], q[3], q[2] - q[4], q[3] - q[5]};
}

LinkJacobians link_jacobians(const RobotSpec& spec, const Vec6& q) {
  const LegGeometry g = leg_geometry(spec);
  const auto angle = link_angles(q);
  LinkJacobians J;
  for (auto& m : J.com) m.setZero();
  for (auto& m : J.angular) m.setZero();
  for (auto& m : J.foot) m.setZero();
  for (int i = 0; i < kNumLinks; ++i) J.com[i].leftCols<2>().setIdentity();
  for (int side = 0; side < 2; ++side) {
    const int hip = 2 + side;
    const int knee = 4 + side;
    const int thigh = kThighR + side;
    const int shank = kShankR + side;
    const Vec2 t_thigh = tangent(angle[thigh]);
    const Vec2 t_shank = tangent(angle[shank]);
    J.com[thigh].col(hip) = g.thigh_com * t_thigh;
    J.com[shank].col(hip) = g.thigh_length * t_thigh + g.shank_com * t_shank;
    J.com[shank].col(knee) = -g.shank_com * t_shank;
    J.angular[thigh](hip) = 1.0;
    J.angular[shank](hip) = 1.0;
    J.angular[shank](knee) = -1.0;
    J.foot[side].leftCols<2>().setIdentity();
    J.foot[side].col(hip) =
        g.thigh_length * t_thigh + g.shank_length * t_shank;
    J.foot[side].col(knee) = -g.shank_length * t_shank;
  }
  return J;
}

RobotState with_coordinates(const RobotState& base, const Vec6& q,
                            const Vec6& qd) {
  RobotState s = base;
  s.set_q(q);
  s.set_qdot(qd);
  return s;
}

}  // namespace

double JointLimits::lower(int joint) const {
  return joint < kKneeR ? -hip_extension_max : -knee_extension_max;
}

double JointLimits::upper(int joint) const {
  return joint < kKneeR ? hip_flexion_max : knee_flexion_max;
}

double RobotSpec::total_mass() const {
  double m = 0.0;
  for (const auto& link : links) m += link.mass;
  return m;
}

double RobotSpec::standing_height() const {
  return links[kThighR].length + links[kShankR].length;
}

void validate(const RobotSpec& spec) {
  static const std::array<const char*, kNumLinks> kNames = {
      "waist", "thighR", "thighL", "shankR", "shankL"};
  for (int i = 0; i < kNumLinks; ++i) {
    const LinkSpec& l = spec.links[i];
    const std::string n = kNames[i];
    if (l.name != n) throw std::invalid_argument("link " + n + " misnamed");
    if (!(l.mass > 0)) throw std::invalid_argument(n + ".mass must be > 0");
    if (!(l.length > 0)) throw std::invalid_argument(n + ".length must be > 0");
    if (!(l.inertia > 0))
      throw std::invalid_argument(n + ".inertia must be > 0");
    if (!(l.com_offset >= 0 && l.com_offset <= l.length))
      throw std::invalid_argument(n + ".com_offset outside [0, length]");
  }
  if (spec.links[kThighR].length != spec.links[kThighL].length ||
      spec.links[kShankR].length != spec.links[kShankL].length)
    throw std::invalid_argument("left and right leg lengths must match");
  const JointLimits& j = spec.limits;
  for (double v : {j.hip_flexion_max, j.hip_extension_max, j.knee_flexion_max,
                   j.knee_extension_max}) {
    if (!(v >= 0)) throw std::invalid_argument("joint limits must be >= 0");
  }
  if (!(j.hip_flexion_max + j.hip_extension_max > 0))
    throw std::invalid_argument("hip range is empty");
  if (!(j.knee_flexion_max + j.knee_extension_max > 0))
    throw std::invalid_argument("knee range is empty");
  if (!(spec.gravity >= 0)) throw std::invalid_argument("gravity must be >= 0");
  if (!(spec.contact_stiffness > 0))
    throw std::invalid_argument("contact_stiffness must be > 0");
  if (!(spec.contact_damping >= 0))
    throw std::invalid_argument("contact_damping must be >= 0");
  if (!(spec.friction_coefficient >= 0))
    throw std::invalid_argument("friction_coefficient must be >= 0");
  if (!(spec.tangential_damping >= 0))
    throw std::invalid_argument("tangential_damping must be >= 0");
  if (!(spec.torque_limit > 0))
    throw std::invalid_argument("torque_limit must be > 0");
}

Vec6 RobotState::q() const {
  Vec6 out;
  out << waist_pos, joint_angles;
  return out;
}

Vec6 RobotState::qdot() const {
  Vec6 out;
  out << waist_vel, joint_vels;
  return out;
}

void RobotState::set_q(const Vec6& q) {
  waist_pos = q.head<2>();
  joint_angles = q.tail<4>();
}

void RobotState::set_qdot(const Vec6& qd) {
  waist_vel = qd.head<2>();
  joint_vels = qd.tail<4>();
}

bool RobotState::all_finite() const {
  return waist_pos.allFinite() && waist_vel.allFinite() &&
         joint_angles.allFinite() && joint_vels.allFinite() &&
         std::isfinite(sim_time);
}

RobotSpec build_default_robot() {
  auto rod = [](std::string name, double mass, double length) {
    return LinkSpec{std::move(name), mass, length, 0.5 * length,
                    mass * length * length / 12.0};
  };
  RobotSpec spec;
  spec.links = {rod("waist", 0.36416, 0.10), rod("thighR", 0.045155, 0.22),
                rod("thighL", 0.045155, 0.22), rod("shankR", 0.069508, 0.22),
                rod("shankL", 0.069508, 0.22)};
  // Hip flexion takes the upper end of the measured 1.919862-2.26893 range.
  spec.limits = {2.26893, 0.523599, 2.26893, 0.261799};
  return spec;
}

Kinematics forward_kinematics(const RobotSpec& spec, const RobotState& state) {
  const LegGeometry g = leg_geometry(spec);
  const auto angle = link_angles(state.q());
  Kinematics k;
  k.angle = angle;
  k.hip = state.waist_pos;
  k.com[kWaist] = state.waist_pos + Vec2(0.0, spec.links[kWaist].com_offset);
  for (int side = 0; side < 2; ++side) {
    const Vec2 thigh_dir = down(angle[kThighR + side]);
    const Vec2 shank_dir = down(angle[kShankR + side]);
    k.knee[side] = k.hip + g.thigh_length * thigh_dir;
    k.foot[side] = k.knee[side] + g.shank_length * shank_dir;
    k.com[kThighR + side] = k.hip + g.thigh_com * thigh_dir;
    k.com[kShankR + side] = k.knee[side] + g.shank_com * shank_dir;
  }
  return k;
}

Vec6 inverse_dynamics(const RobotSpec& spec, const Vec6& q, const Vec6& qdot,
                      const Vec6& qddot, bool with_gravity) {
  const LegGeometry g = leg_geometry(spec);
  const auto angle = link_angles(q);
  const auto rate = link_angles(qdot);
  const auto accel = link_angles(qddot);
  const LinkJacobians J = link_jacobians(spec, q);

  // Linear acceleration of a point at distance r along a link, relative to
  // its proximal joint.
  auto relative = [&](int link, double r) -> Vec2 {
    return r * (tangent(angle[link]) * accel[link] -
                down(angle[link]) * rate[link] * rate[link]);
  };

  std::array<Vec2, kNumLinks> com_acc;
  const Vec2 waist_acc = qddot.head<2>();
  com_acc[kWaist] = waist_acc;
  for (int side = 0; side < 2; ++side) {
    const int thigh = kThighR + side;
    const int shank = kShankR + side;
    com_acc[thigh] = waist_acc + relative(thigh, g.thigh_com);
    const Vec2 knee_acc = waist_acc + relative(thigh, g.thigh_length);
    com_acc[shank] = knee_acc + relative(shank, g.shank_com);
  }

  const Vec2 gravity_acc(0.0, with_gravity ? -spec.gravity : 0.0);
  Vec6 tau = Vec6::Zero();
  for (int i = 0; i < kNumLinks; ++i) {
    const LinkSpec& link = spec.links[i];
    tau += J.com[i].transpose() * (link.mass * (com_acc[i] - gravity_acc));
    tau += J.angular[i].transpose() * (link.inertia * accel[i]);
  }
  return tau;
}

Mat6 mass_matrix(const RobotSpec& spec, const RobotState& state) {
  const Vec6 q = state.q();
  Mat6 M;
  for (int j = 0; j < kNumDof; ++j) {
    M.col(j) = inverse_dynamics(spec, q, Vec6::Zero(), Vec6::Unit(j), false);
  }
  return 0.5 * (M + M.transpose());
}

Vec6 bias_forces(const RobotSpec& spec, const RobotState& state) {
  return inverse_dynamics(spec, state.q(), state.qdot(), Vec6::Zero(), true);
}

Eigen::Matrix<double, 2, 6> foot_jacobian(const RobotSpec& spec,
                                          const RobotState& state, int foot) {
  return link_jacobians(spec, state.q()).foot[foot];
}

std::array<ContactForce, 2> contact_forces(const RobotSpec& spec,
                                           const RobotState& state) {
  const Kinematics k = forward_kinematics(spec, state);
  const LinkJacobians J = link_jacobians(spec, state.q());
  const Vec6 qd = state.qdot();
  std::array<ContactForce, 2> out;
  for (int side = 0; side < 2; ++side) {
    const double height = k.foot[side][1];
    if (height > 0.0) continue;
    const Vec2 v = J.foot[side] * qd;
    ContactForce& f = out[side];
    f.normal = std::max(0.0, spec.contact_stiffness * (-height) -
                                 spec.contact_damping * v[1]);
    const double cap = spec.friction_coefficient * f.normal;
    f.tangential = std::clamp(-spec.tangential_damping * v[0], -cap, cap);
    f.in_contact = f.normal > 0.0;
  }
  return out;
}

namespace {

enum class Slip { kStick, kForward, kBackward };

// End-of-step generalized velocity for the free coordinates. Contact forces
// are evaluated at the end of the step (backward Euler in the penalty
// spring, damper and friction regularizer): normal contact is resolved
// first, then friction against the resulting normal loads.
Vec6 solve_velocity(const RobotSpec& spec, const Mat6& M, const Vec6& qd,
                    const Vec6& applied, const LinkJacobians& J,
                    const Kinematics& kin, const DofMask& fixed, double dt) {
  std::vector<int> free;
  for (int i = 0; i < kNumDof; ++i) {
    if (!fixed[i]) free.push_back(i);
  }
  const int n = static_cast<int>(free.size());
  if (n == 0) return Vec6::Zero();
  // Momentum of the full pre-step velocity, so that freezing a moving joint
  // acts as an inelastic impulse on the remaining coordinates.
  const Vec6 p0 = M * qd + dt * applied;
  Eigen::MatrixXd Mf(n, n);
  Eigen::VectorXd momentum(n);
  std::array<Eigen::Matrix<double, 2, Eigen::Dynamic>, 2> Jf;
  for (auto& m : Jf) m.resize(2, n);
  for (int a = 0; a < n; ++a) {
    momentum[a] = p0[free[a]];
    for (int b = 0; b < n; ++b) Mf(a, b) = M(free[a], free[b]);
    for (int side = 0; side < 2; ++side) {
      Jf[side].col(a) = J.foot[side].col(free[a]);
    }
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(Mf);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("mass matrix is not positive definite");
  }
  Eigen::VectorXd v = llt.solve(momentum);
  auto expand = [&](const Eigen::VectorXd& reduced) {
    Vec6 out = Vec6::Zero();
    for (int a = 0; a < n; ++a) out[free[a]] = reduced[a];
    return out;
  };

  const double k = spec.contact_stiffness;
  const double normal_gain = k * dt + spec.contact_damping;
  const double mu = spec.friction_coefficient;
  std::array<double, 2> height{};
  for (int side = 0; side < 2; ++side) height[side] = kin.foot[side][1];
  auto normal_force = [&](int side, const Eigen::VectorXd& vel) {
    return -k * height[side] - normal_gain * Jf[side].row(1).dot(vel);
  };
  auto predicted_height = [&](int side, const Eigen::VectorXd& vel) {
    return height[side] + dt * Jf[side].row(1).dot(vel);
  };

  // Implicit solve for a set of touching feet. Sticking feet carry the
  // viscous friction regularizer; slipping feet a fixed kinetic friction
  // load against the sliding direction.
  struct FrictionState {
    std::array<Slip, 2> slip{Slip::kStick, Slip::kStick};
    std::array<double, 2> load{0.0, 0.0};
    bool enabled = false;
  };
  auto solve_for = [&](const std::array<bool, 2>& touching,
                       const FrictionState& friction) {
    Eigen::MatrixXd A = Mf;
    Eigen::VectorXd b = momentum;
    for (int side = 0; side < 2; ++side) {
      if (!touching[side]) continue;
      const Eigen::VectorXd jn = Jf[side].row(1).transpose();
      A += dt * normal_gain * jn * jn.transpose();
      b -= dt * k * height[side] * jn;
      if (!friction.enabled) continue;
      const Eigen::VectorXd jt = Jf[side].row(0).transpose();
      if (friction.slip[side] == Slip::kStick) {
        A += dt * spec.tangential_damping * jt * jt.transpose();
      } else {
        const double s = friction.slip[side] == Slip::kForward ? 1.0 : -1.0;
        b -= dt * s * mu * friction.load[side] * jt;
      }
    }
    return Eigen::VectorXd(A.llt().solve(b));
  };

  // Normal contact first: complementarity over the touching subsets
  // (touching feet push, the others end the step above ground). Without
  // friction the system matrix is SPD, so one subset is consistent.
  auto violation = [&](const std::array<bool, 2>& touching,
                       const Eigen::VectorXd& vel) {
    double worst = 0.0;
    for (int side = 0; side < 2; ++side) {
      worst = std::max(worst, touching[side]
                                  ? -normal_force(side, vel) / normal_gain
                                  : -predicted_height(side, vel) / dt);
    }
    return worst;
  };
  std::array<bool, 2> touching{predicted_height(0, v) < 0.0,
                               predicted_height(1, v) < 0.0};
  if (!touching[0] && !touching[1]) return expand(v);
  {
    const std::array<std::array<bool, 2>, 4> order{
        touching, std::array<bool, 2>{true, true},
        std::array<bool, 2>{true, false}, std::array<bool, 2>{false, true}};
    double best = violation({false, false}, v);
    std::array<bool, 2> best_set{false, false};
    Eigen::VectorXd best_v = v;
    for (const auto& candidate : order) {
      if (!candidate[0] && !candidate[1]) continue;
      const Eigen::VectorXd vel = solve_for(candidate, FrictionState{});
      const double bad = violation(candidate, vel);
      if (bad < best) {
        best = bad;
        best_set = candidate;
        best_v = vel;
      }
      if (bad <= 0.0) break;
    }
    touching = best_set;
    v = best_v;
  }
  if (!touching[0] && !touching[1]) return expand(v);

  // Friction against the normal loads, iterating stick/slip to a fixed
  // point. A slipping foot whose slide would reverse goes back to sticking.
  FrictionState friction;
  friction.enabled = true;
  for (int side = 0; side < 2; ++side) {
    friction.load[side] =
        touching[side] ? std::max(0.0, normal_force(side, v)) : 0.0;
  }
  for (int iter = 0; iter < 8; ++iter) {
    v = solve_for(touching, friction);
    bool changed = false;
    for (int side = 0; side < 2; ++side) {
      if (!touching[side]) continue;
      const double slide = Jf[side].row(0).dot(v);
      Slip next = friction.slip[side];
      if (next == Slip::kStick) {
        if (spec.tangential_damping * std::abs(slide) >
            mu * friction.load[side]) {
          next = slide > 0.0 ? Slip::kForward : Slip::kBackward;
        }
      } else {
        const double s = next == Slip::kForward ? 1.0 : -1.0;
        if (s * slide < 0.0) next = Slip::kStick;
      }
      changed |= next != friction.slip[side];
      friction.slip[side] = next;
    }
    if (!changed) break;
  }
  for (int side = 0; side < 2; ++side) {
    if (friction.slip[side] == Slip::kStick) continue;
    const double s = friction.slip[side] == Slip::kForward ? 1.0 : -1.0;
    if (s * Jf[side].row(0).dot(v) < 0.0) {
      friction.slip[side] = Slip::kStick;
      v = solve_for(touching, friction);
    }
  }

  return expand(v);
}

}  // namespace

RobotState step(const RobotSpec& spec, const RobotState& state,
                const Torques& torques, double dt, const DofMask& locked) {
  if (!(dt > 0)) throw std::invalid_argument("dt must be > 0");
  const Vec6 q = state.q();
  const Vec6 qd = state.qdot();
  const Mat6 M = mass_matrix(spec, state);
  Vec6 applied = -bias_forces(spec, state);
  applied.tail<4>() += torques;
  const LinkJacobians J = link_jacobians(spec, q);
  const Kinematics kin = forward_kinematics(spec, state);

  // Inelastic joint stops: a joint whose end-of-step velocity would carry it
  // past a limit is held fixed for this step and the step is re-solved.
  DofMask fixed = locked;
  Vec6 qd_next;
  for (int pass = 0; pass <= kNumJoints; ++pass) {
    qd_next = solve_velocity(spec, M, qd, applied, J, kin, fixed, dt);
    bool grew = false;
    for (int j = 0; j < kNumJoints; ++j) {
      const int dof = 2 + j;
      if (fixed[dof]) continue;
      const double predicted = q[dof] + dt * qd_next[dof];
      if ((predicted > spec.limits.upper(j) && qd_next[dof] > 0.0) ||
          (predicted < spec.limits.lower(j) && qd_next[dof] < 0.0)) {
        fixed[dof] = true;
        grew = true;
      }
    }
    if (!grew) break;
  }

  Vec6 q_next = q + dt * qd_next;
  for (int j = 0; j < kNumJoints; ++j) {
    q_next[2 + j] = std::clamp(q_next[2 + j], spec.limits.lower(j),
                               spec.limits.upper(j));
  }

  RobotState next = with_coordinates(state, q_next, qd_next);
  next.sim_time = state.sim_time + dt;
  if (!next.all_finite()) {
    throw SimulationDiverged("non-finite state at t = " +
                             std::to_string(next.sim_time));
  }
  const auto after = contact_forces(spec, next);
  next.foot_contact = {after[0].in_contact, after[1].in_contact};
  return next;
}

EnergyBreakdown energy(const RobotSpec& spec, const RobotState& state) {
  const Kinematics k = forward_kinematics(spec, state);
  const LinkJacobians J = link_jacobians(spec, state.q());
  const Vec6 qd = state.qdot();
  EnergyBreakdown e;
  for (int i = 0; i < kNumLinks; ++i) {
    const LinkSpec& link = spec.links[i];
    const Vec2 v = J.com[i] * qd;
    const double w = J.angular[i] * qd;
    e.kinetic += 0.5 * link.mass * v.squaredNorm() + 0.5 * link.inertia * w * w;
    e.gravitational += link.mass * spec.gravity * k.com[i][1];
  }
  for (int side = 0; side < 2; ++side) {
    const double depth = -k.foot[side][1];
    if (depth > 0.0) {
      e.contact_elastic += 0.5 * spec.contact_stiffness * depth * depth;
    }
  }
  return e;
}

double total_energy(const RobotSpec& spec, const RobotState& state) {
  return energy(spec, state).total();
}

bool check_fall(const RobotSpec& spec, const RobotState& state) {
  return state.waist_pos[1] < spec.fall_threshold();
}

}  // namespace bwr
