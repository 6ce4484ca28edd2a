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

#include "bwr/physics_check.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include <Eigen/Cholesky>

namespace bwr {
namespace {

CheckResult make_result(std::string name, double measured, double expected, double tol,
                        std::string detail = "") {
  CheckResult r;
  r.name = std::move(name);
  r.measured = measured;
  r.expected = expected;
  r.tolerance = tol;
  r.passed = std::isfinite(measured) && std::abs(measured - expected) <= tol;
  r.detail = std::move(detail);
  return r;
}

RobotState hanging(double height) {
  RobotState s;
  s.waist_pos = {0.0, height};
  return s;
}

// High enough that no pose reaches the ground.
double airborne_height(const RobotSpec& spec) { return 10.0 * spec.standing_height() + 1.0; }

}  // namespace

bool PhysicsReport::passed() const {
  for (const CheckResult& c : checks)
    if (!c.passed) return false;
  return !checks.empty();
}

CheckResult check_energy_drift(const RobotSpec& spec, double dt) {
  // Semi-implicit Euler lags free fall by g dt t / 2, a fixed loss of about
  // m g^2 dt t / 2, so the relative figure depends on the height reference.
  // 8 m leaves room for 1 s of fall and matches the dynamics tests.
  RobotState s = hanging(std::max(8.0, airborne_height(spec)));
  s.joint_angles = {0.4, -0.2, 0.8, 1.1};
  s.joint_vels = {0.2, -0.15, 0.1, -0.2};
  s.waist_vel = {0.5, 0.0};
  const double e0 = total_energy(spec, s);
  const int steps = static_cast<int>(std::lround(1.0 / dt));
  for (int i = 0; i < steps; ++i) s = step(spec, s, Torques::Zero(), dt);
  const double drift = std::abs(total_energy(spec, s) - e0) / std::abs(e0);
  return make_result("energy_drift", drift, 0.0, 1e-3, "relative, airborne, 1 s");
}

CheckResult check_mass_matrix(const RobotSpec& spec, int states, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_asym = 0.0;
  int failures = 0;
  for (int n = 0; n < states; ++n) {
    RobotState s = hanging(1.0);
    for (int j = 0; j < kNumJoints; ++j) {
      const double lo = spec.limits.lower(j), hi = spec.limits.upper(j);
      s.joint_angles[j] = lo + (hi - lo) * u(rng);
    }
    const Mat6 M = mass_matrix(spec, s);
    const double scale = M.cwiseAbs().maxCoeff();
    worst_asym = std::max(worst_asym, (M - M.transpose()).cwiseAbs().maxCoeff() / scale);
    if (Eigen::LLT<Mat6>(M).info() != Eigen::Success) ++failures;
  }
  CheckResult r = make_result("mass_matrix", worst_asym, 0.0, 1e-12,
                              "max relative asymmetry over " + std::to_string(states) +
                                  " states; " + std::to_string(failures) +
                                  " not positive definite");
  r.passed = r.passed && failures == 0;
  return r;
}

CheckResult check_static_stance(const RobotSpec& spec, double dt) {
  RobotState s = hanging(spec.standing_height() + 0.005);
  const int steps = static_cast<int>(std::lround(3.0 / dt));
  for (int i = 0; i < steps; ++i) s = step(spec, s, Torques::Zero(), dt);
  const auto f = contact_forces(spec, s);
  const double weight = spec.total_mass() * spec.gravity;
  return make_result("static_stance", f[0].normal + f[1].normal, weight, 0.02 * weight,
                     "total normal force in N after 3 s on straight legs");
}

double leg_pendulum_period(const RobotSpec& spec) {
  const LinkSpec& thigh = spec.links[kThighR];
  const LinkSpec& shank = spec.links[kShankR];
  const double m = thigh.mass + shank.mass;
  const double shank_com = thigh.length + shank.com_offset;
  const double d = (thigh.mass * thigh.com_offset + shank.mass * shank_com) / m;
  const double pivot_inertia = thigh.inertia + thigh.mass * thigh.com_offset * thigh.com_offset +
                               shank.inertia + shank.mass * shank_com * shank_com;
  return 2.0 * std::numbers::pi * std::sqrt(pivot_inertia / (m * spec.gravity * d));
}

CheckResult check_pendulum_period(const RobotSpec& spec, double dt) {
  if (spec.gravity <= 0.0) {
    CheckResult r{"pendulum_period", true, 0.0, 0.0, 0.0, "skipped without gravity"};
    return r;
  }
  const double expected = leg_pendulum_period(spec);
  RobotState s = hanging(airborne_height(spec));
  const double amplitude = 4.5 * std::numbers::pi / 180.0;
  s.joint_angles[kHipR] = amplitude;
  DofMask locked{};
  locked.fill(true);
  locked[2 + kHipR] = false;

  // Upward zero crossings, linearly interpolated.
  std::vector<double> crossings;
  const int steps = static_cast<int>(std::ceil(6.5 * expected / dt));
  double prev = s.joint_angles[kHipR];
  for (int i = 1; i <= steps; ++i) {
    s = step(spec, s, Torques::Zero(), dt, locked);
    const double cur = s.joint_angles[kHipR];
    if (prev < 0.0 && cur >= 0.0) crossings.push_back((i - 1 + prev / (prev - cur)) * dt);
    prev = cur;
  }
  if (crossings.size() < 2)
    return make_result("pendulum_period", NAN, expected, 0.01 * expected, "no oscillation");
  const double period =
      (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
  char detail[96];
  std::snprintf(detail, sizeof detail, "seconds, %zu periods from 4.5 deg, knee locked",
                crossings.size() - 1);
  return make_result("pendulum_period", period, expected, 0.01 * expected, detail);
}

CheckResult check_free_fall(const RobotSpec& spec, double dt) {
  RobotState s = hanging(airborne_height(spec));
  const int steps = 100;
  for (int i = 0; i < steps; ++i) s = step(spec, s, Torques::Zero(), dt);
  const double accel = s.waist_vel[1] / (steps * dt);
  const double tol = 1e-9 * std::max(1.0, spec.gravity);
  return make_result("free_fall", accel, -spec.gravity, tol,
                     "vertical waist acceleration in m/s^2 from rest");
}

PhysicsReport run_physics_checks(const RobotSpec& spec) {
  PhysicsReport r;
  r.checks.push_back(check_energy_drift(spec));
  r.checks.push_back(check_mass_matrix(spec));
  r.checks.push_back(check_static_stance(spec));
  r.checks.push_back(check_pendulum_period(spec));
  r.checks.push_back(check_free_fall(spec));
  return r;
}

std::string format_report(const PhysicsReport& report) {
  std::string out;
  char line[256];
  for (const CheckResult& c : report.checks) {
    std::snprintf(line, sizeof line, "%-4s %-16s measured=%.9g expected=%.9g tol=%.3g  %s\n",
                  c.passed ? "PASS" : "FAIL", c.name.c_str(), c.measured, c.expected,
                  c.tolerance, c.detail.c_str());
    out += line;
  }
  out += report.passed() ? "physics check: all passed\n" : "physics check: FAILED\n";
  return out;
}

}  // namespace bwr
