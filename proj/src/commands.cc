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

#include "bwr/commands.h"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "bwr/checkpoint.h"
#include "bwr/gait.h"

namespace bwr {
namespace fs = std::filesystem;
namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

bool has_column(const Table& t, const std::string& name) {
  for (const std::string& n : t.names)
    if (n == name) return true;
  return false;
}

const char* const kMetricsColumns = "episode,steps,return,distance_m,fell,wall_ms\n";

// Keeps rows up to and including episode `keep` (1-based) of an existing
// metrics file, or starts a fresh one.
void prepare_metrics(const fs::path& path, std::int64_t keep) {
  if (keep > 0 && fs::exists(path)) {
    Table t = read_csv(path);
    const std::vector<double>& ep = t.column("episode");
    std::size_t n = 0;
    while (n < ep.size() && ep[n] <= static_cast<double>(keep)) ++n;
    for (auto& c : t.columns) c.resize(n);
    write_csv(t, path);
    return;
  }
  write_text(path, kMetricsColumns);
}

void append_metrics(std::ofstream& out, const EpisodeMetrics& m) {
  out << (m.episode + 1) << ',' << m.steps << ',' << num(m.ret) << ',' << num(m.distance_m)
      << ',' << (m.fell ? 1 : 0) << ',' << num(m.wall_ms) << '\n';
  out.flush();
}

Agent agent_for(const RunConfig& config, const BipedEnv& env) {
  return make_agent(config.ddpg, env, config.seed);
}

void require_matching(const RunConfig& config, const fs::path& checkpoint) {
  const CheckpointHeader h = read_checkpoint_header(checkpoint);
  if (h.config_hash != config_hash(config)) {
    char msg[160];
    std::snprintf(msg, sizeof msg,
                  "configuration hash %016llx does not match checkpoint hash %016llx",
                  static_cast<unsigned long long>(config_hash(config)),
                  static_cast<unsigned long long>(h.config_hash));
    throw CheckpointError(checkpoint.string() + ": " + msg);
  }
}

std::string gait_report(const GaitTrace& trace) {
  std::string out;
  const auto line = [&](const std::string& label, auto&& compute) {
    out += "  " + label + ": ";
    try {
      out += compute() + "\n";
    } catch (const std::invalid_argument& e) {
      out += std::string("n/a (") + e.what() + ")\n";
    }
  };
  char buf[64];
  line("samples", [&] { return std::to_string(trace.size()); });
  line("average speed [m/s]", [&] {
    std::snprintf(buf, sizeof buf, "%.4f", average_speed(trace));
    return std::string(buf);
  });
  const double rate = trace.size() > 1 ? trace.sample_rate() : 0.0;
  line("hip phase difference [rad]", [&] {
    std::snprintf(buf, sizeof buf, "%.4f",
                  phase_difference(trace.angle_series(kHipR), trace.angle_series(kHipL), rate));
    return std::string(buf);
  });
  line("knee/hip frequency ratio", [&] {
    const double hip = dominant_frequency(trace.angle_series(kHipR), rate) +
                       dominant_frequency(trace.angle_series(kHipL), rate);
    const double knee = dominant_frequency(trace.angle_series(kKneeR), rate) +
                        dominant_frequency(trace.angle_series(kKneeL), rate);
    std::snprintf(buf, sizeof buf, "%.4f (hip %.4f Hz)", knee / hip, hip / 2.0);
    return std::string(buf);
  });
  return out;
}

}  // namespace

fs::path checkpoint_file(const fs::path& out_dir, std::int64_t episode) {
  char name[48];
  std::snprintf(name, sizeof name, "episode_%06lld.ckpt", static_cast<long long>(episode));
  return out_dir / kCheckpointDir / name;
}

TrainResult cmd_train(const RunConfig& config, const std::optional<fs::path>& resume,
                      std::ostream& log) {
  validate(config);
  const fs::path out = config.run.output_dir;
  const std::string echo = config_echo(config);
  const std::uint64_t hash = config_hash(config);

  BipedEnv env(config.env);
  Agent agent = agent_for(config, env);
  if (resume) {
    require_matching(config, *resume);
    load_checkpoint(*resume, agent);
    log << "resumed from " << resume->string() << " at episode " << agent.episodes_done << "\n";
  }
  fs::create_directories(out / kCheckpointDir);
  write_text(out / kConfigEchoFile, echo);

  TrainResult result;
  result.metrics = out / kMetricsFile;
  prepare_metrics(result.metrics, agent.episodes_done);
  std::ofstream metrics(result.metrics, std::ios::binary | std::ios::app);
  if (!metrics) throw std::runtime_error("cannot append to " + result.metrics.string());

  TrainOptions options;
  options.episodes = static_cast<int>(
      std::max<std::int64_t>(0, config.run.episodes - agent.episodes_done));
  options.max_steps = config.run.max_steps;
  const int interval = config.run.checkpoint_interval;
  const int log_every = std::max(1, config.run.episodes / 20);
  options.on_episode = [&](const EpisodeMetrics& m, const Agent& a) {
    EpisodeMetrics row = m;
    if (!config.run.wall_clock) row.wall_ms = 0.0;
    if (!std::isfinite(row.ret)) throw std::runtime_error("non-finite episode return");
    append_metrics(metrics, row);
    if (interval > 0 && a.episodes_done % interval == 0)
      save_checkpoint(checkpoint_file(out, a.episodes_done), a, hash, echo);
    if (a.episodes_done % log_every == 0) {
      char line[160];
      std::snprintf(line, sizeof line,
                    "episode %6lld  steps %4d  return %10.3f  distance %7.3f%s\n",
                    static_cast<long long>(a.episodes_done), m.steps, m.ret, m.distance_m,
                    m.fell ? "  fell" : "");
      log << line;
    }
  };
  train(agent, env, options);

  result.final_checkpoint = out / kCheckpointDir / kFinalCheckpoint;
  save_checkpoint(result.final_checkpoint, agent, hash, echo);
  result.episodes_done = agent.episodes_done;
  log << "trained " << agent.episodes_done << " episodes; metrics " << result.metrics.string()
      << "; checkpoint " << result.final_checkpoint.string() << "\n";
  return result;
}

RunConfig config_from_checkpoint(const fs::path& checkpoint) {
  const CheckpointHeader h = read_checkpoint_header(checkpoint);
  return parse_config(h.config_echo, checkpoint.string() + " (embedded config)");
}

EvalSummary cmd_eval(const RunConfig& config, const fs::path& checkpoint, int episodes,
                     std::uint64_t seed, const fs::path& out, std::ostream& log) {
  validate(config);
  if (episodes < 0) throw ConfigError("invalid --episodes (must be >= 0)");
  require_matching(config, checkpoint);
  BipedEnv env(config.env);
  Agent agent = agent_for(config, env);
  load_checkpoint(checkpoint, agent, false);
  fs::create_directories(out);

  Table rows;
  rows.names = {"episode", "steps", "return", "distance_m", "speed", "fell"};
  rows.columns.resize(rows.names.size());
  EvalSummary s;
  s.episodes = episodes;
  for (int i = 0; i < episodes; ++i) {
    const std::uint64_t episode_seed = derive_seed(seed, static_cast<std::uint64_t>(i));
    const EpisodeMetrics m = evaluate_episode(agent, env, episode_seed, config.run.max_steps);
    const double speed = m.distance_m / (m.steps * config.env.control_period());
    const GaitTrace trace = record_rollout(agent, env, episode_seed, config.run.max_steps);
    char name[32];
    std::snprintf(name, sizeof name, "trace_%03d.csv", i);
    write_csv(trace_table(trace), out / name);
    const double values[] = {static_cast<double>(i + 1), static_cast<double>(m.steps),
                             m.ret, m.distance_m, speed, m.fell ? 1.0 : 0.0};
    for (std::size_t c = 0; c < rows.columns.size(); ++c) rows.columns[c].push_back(values[c]);
    s.mean_return += m.ret / episodes;
    s.mean_speed += speed / episodes;
    s.fall_rate += (m.fell ? 1.0 : 0.0) / episodes;
  }
  write_csv(rows, out / "eval_summary.csv");
  char text[256];
  std::snprintf(text, sizeof text,
                "episodes %d\nmean_return %.17g\nmean_speed %.17g\nfall_rate %.17g\n",
                s.episodes, s.mean_return, s.mean_speed, s.fall_rate);
  write_text(out / "eval_summary.txt", text);
  log << text;
  return s;
}

std::string cmd_analyze(const std::vector<fs::path>& inputs, const fs::path& out,
                        std::ostream& log) {
  if (inputs.empty()) throw InputError("analyze needs at least one input file");
  fs::create_directories(out);
  std::string report;
  for (const fs::path& in : inputs) {
    Table t;
    try {
      t = read_csv(in);
    } catch (const std::exception& e) {
      throw InputError(e.what());
    }
    const std::string stem = in.stem().string();
    if (has_column(t, "return")) {
      const Table curve = curve_table(t.column("return"));
      write_csv(curve, out / (stem + "_reward_curve.csv"));
      write_svg(curve,
                {"Average reward per 100 episodes", "episode", "return", "episode",
                 {"return", "trailing_mean"}},
                out / (stem + "_reward_curve.svg"));
      report += "metrics " + in.string() + "\n";
      report += "  episodes: " + std::to_string(curve.rows()) + "\n";
      if (curve.rows() > 0) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "  final trailing mean: %.4f\n",
                      curve.column("trailing_mean").back());
        report += buf;
      }
    } else if (has_column(t, "hip_r")) {
      GaitTrace trace;
      try {
        trace = trace_from_table(t);
      } catch (const std::invalid_argument& e) {
        throw InputError(in.string() + ": " + e.what());
      }
      const Table tt = trace_table(trace);
      write_svg(tt, {"Hip angles", "time [s]", "angle [rad]", "time", {"hip_r", "hip_l"}},
                out / (stem + "_hips.svg"));
      write_svg(tt, {"Knee angles", "time [s]", "angle [rad]", "time", {"knee_r", "knee_l"}},
                out / (stem + "_knees.svg"));
      report += "trace " + in.string() + "\n" + gait_report(trace);
    } else {
      throw InputError(in.string() + ": neither a metrics file nor a gait trace");
    }
  }
  write_text(out / "report.txt", report);
  log << report;
  return report;
}

PhysicsReport cmd_physics_check(const RunConfig& config, std::ostream& log) {
  validate(config);
  const PhysicsReport r = run_physics_checks(config.env.robot);
  log << format_report(r);
  return r;
}

}  // namespace bwr
