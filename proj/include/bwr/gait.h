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

// Rollout traces and gait diagnostics: average speed, dominant frequency,
// phase lag between joints, reward-curve smoothing and plot emission.

#ifndef BWR_GAIT_H_
#define BWR_GAIT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bwr/ddpg.h"
#include "bwr/env.h"

namespace bwr {

struct GaitSample {
  double time = 0.0;
  Eigen::Vector4d angles = Eigen::Vector4d::Zero();      // hip R, hip L, knee R, knee L
  Eigen::Vector4d velocities = Eigen::Vector4d::Zero();
  Vec2 waist_pos = Vec2::Zero();
  Vec2 waist_vel = Vec2::Zero();
  bool contact[2] = {false, false};
  double reward = 0.0;
};

// One sample per control step, taken after the step.
struct GaitTrace {
  std::vector<GaitSample> samples;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  // Joint index as in the action vector (hip R, hip L, knee R, knee L).
  std::vector<double> angle_series(int joint) const;
  double sample_rate() const;
};

// Noise-free rollout of the agent's policy until the episode ends.
GaitTrace record_rollout(const Agent& agent, BipedEnv& env, std::uint64_t seed,
                         int max_steps = 0);

// (last waist y - first waist y) / (last time - first time).
double average_speed(const GaitTrace& trace);

// Largest non-DC peak of the Hann-windowed spectrum, refined by a parabola
// through the log magnitudes. Throws on constant input or on a series that
// spans fewer than four periods.
double dominant_frequency(const std::vector<double>& series, double sample_rate);

// Lag of the normalized circular cross-correlation peak at the shared
// dominant frequency, expressed as a phase folded into [0, pi].
double phase_difference(const std::vector<double>& a,
                        const std::vector<double>& b, double sample_rate);

// Trailing mean over the last min(window, k + 1) returns at each index k.
std::vector<double> reward_curve(const std::vector<double>& returns,
                                 int window = 100);

// Named equal-length numeric columns.
struct Table {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
  const std::vector<double>& column(const std::string& name) const;
};

Table trace_table(const GaitTrace& trace);
GaitTrace trace_from_table(const Table& table);
Table curve_table(const std::vector<double>& returns, int window = 100);

// CSV with a header row and 17 significant digits.
void write_csv(const Table& table, const std::filesystem::path& path);
// Parses CSV written by write_csv (or any numeric CSV with a header row).
// Errors carry the offending line number.
Table read_csv(const std::filesystem::path& path);
// Whitespace-separated columns under a "#"-prefixed header line.
void write_plotdata(const Table& table, const std::filesystem::path& path);

struct SvgPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::string x_column;
  std::vector<std::string> y_columns;
};

// Self-contained line chart; identical inputs give identical bytes.
std::string render_svg(const Table& table, const SvgPlot& plot);
void write_svg(const Table& table, const SvgPlot& plot,
               const std::filesystem::path& path);

}  // namespace bwr

#endif  // BWR_GAIT_H_
