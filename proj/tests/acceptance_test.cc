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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "agent_compare.h"
#include "bwr/checkpoint.h"
#include "bwr/commands.h"
#include "bwr/ddpg.h"
#include "bwr/dynamics.h"
#include "bwr/gait.h"
#include "bwr/nn.h"
#include "bwr/point_mass_env.h"
#include "gradient_oracle.h"

namespace bwr {
namespace {

namespace fs = std::filesystem;

TrainOptions episodes(int n, int max_steps = 0) {
  TrainOptions o;
  o.episodes = n;
  o.max_steps = max_steps;
  return o;
}

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "bwr_acceptance" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Gradient fidelity of the critic loss and the actor objective.

std::vector<Transition> random_batch(int n, int obs_dim, int act_dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Transition> batch;
  for (int i = 0; i < n; ++i) {
    Transition t;
    t.s = Eigen::VectorXd::NullaryExpr(obs_dim, [&] { return g(rng); });
    t.a = Eigen::VectorXd::NullaryExpr(act_dim, [&] { return g(rng); });
    t.r = g(rng);
    t.s_next = Eigen::VectorXd::NullaryExpr(obs_dim, [&] { return g(rng); });
    t.done = i % 3 == 0;
    batch.push_back(t);
  }
  return batch;
}

Eigen::MatrixXd stack(const std::vector<Transition>& batch, bool actions) {
  const int rows = static_cast<int>(actions ? batch[0].a.size() : batch[0].s.size());
  Eigen::MatrixXd m(rows, static_cast<int>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i)
    m.col(static_cast<int>(i)) = actions ? batch[i].a : batch[i].s;
  return m;
}

template <typename F>
double max_fd_error(Mlp net, const MlpGradients& g, F objective) {
  std::vector<ParamBlock> blocks = trainable_blocks(net);
  double worst = 0.0;
  const double eps = 1e-5;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (std::size_t k = 0; k < blocks[b].values.size(); ++k) {
      double& p = blocks[b].values[k];
      const double saved = p;
      p = saved + eps;
      const double up = objective(net);
      p = saved - eps;
      const double down = objective(net);
      p = saved;
      worst = std::max(worst, testing::relative_error(g.params[b][k], (up - down) / (2 * eps)));
    }
  }
  return worst;
}

// The default output layers start within +-3e-3; scaling all weights moves
// the gradients well above the comparison floor.
void amplify(Mlp& net, double factor) {
  for (Layer& l : net.layers)
    if (l.kind == LayerKind::kAffine) l.weight *= factor;
}

Outcome gradient_fidelity() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> obs(2, 6), act(1, 3), width(3, 8), depth(1, 2), bsz(4, 8);
  int instances = 0, resampled = 0;
  double worst_critic = 0.0, worst_actor = 0.0;
  while (instances < 24) {
    DdpgConfig c;
    c.network.hidden.assign(depth(rng), 0);
    for (int& w : c.network.hidden) w = width(rng);
    c.network.batch_norm = instances % 2 == 1;
    const int od = obs(rng), ad = act(rng);
    Agent a = make_agent(c, od, ad, 2.0, rng());
    amplify(a.actor, 20.0);
    amplify(a.critic, 20.0);
    const std::vector<Transition> batch = random_batch(bsz(rng), od, ad, rng);
    const Eigen::MatrixXd s = stack(batch, false), u = stack(batch, true);
    const Eigen::MatrixXd mu = forward(a.actor, s, nullptr, Mode::kTrain);
    // Difference quotients straddling a rectifier kink are meaningless.
    if (testing::relu_margin(a.critic, s, &u, Mode::kTrain) < 1e-3 ||
        testing::relu_margin(a.critic, s, &mu, Mode::kTrain) < 1e-3 ||
        testing::relu_margin(a.actor, s, nullptr, Mode::kTrain) < 1e-3) {
      ++resampled;
      continue;
    }
    const Eigen::VectorXd y = critic_target_values(batch, a.actor_target, a.critic_target, 0.99);
    const Objective cl = critic_loss(a.critic, batch, y);
    worst_critic = std::max(worst_critic, max_fd_error(a.critic, cl.grads, [&](const Mlp& n) {
                              return critic_loss(n, batch, y).value;
                            }));
    const Objective ao = actor_objective(a.actor, a.critic, batch);
    worst_actor = std::max(worst_actor, max_fd_error(a.actor, ao.grads, [&](const Mlp& n) {
                             return actor_objective(n, a.critic, batch).value;
                           }));
    ++instances;
  }
  const double t = seconds_since(t0);
  return {worst_critic <= 1e-4 && worst_actor <= 1e-4 && t < 60.0,
          fmt("%d instances (%d resampled near kinks), max rel err critic %.2e actor %.2e "
              "(<= 1e-4), %.1f s (< 60 s)",
              instances, resampled, worst_critic, worst_actor, t)};
}

// ---------------------------------------------------------------------------
// Ornstein-Uhlenbeck statistics.

Outcome ou_statistics() {
  const auto t0 = std::chrono::steady_clock::now();
  OuNoise noise = make_ou(1, {0.0, 0.15, 0.1});
  std::mt19937_64 rng(7);
  const int n = 1'000'000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = ou_sample(noise, rng)[0];
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / n;
  const double std = std::sqrt(sum_sq / n - mean * mean);
  // Stationary variance of x' = (1 - theta) x + sigma xi.
  const double analytic = 0.1 / std::sqrt(1.0 - 0.85 * 0.85);
  const double t = seconds_since(t0);
  const bool ok = std::abs(mean) <= 0.002 && std::abs(std / 0.18984 - 1.0) <= 0.02 &&
                  std::abs(analytic - 0.18984) < 1e-4 && t < 10.0;
  return {ok, fmt("mean %+.5f (|.| <= 0.002), std %.5f vs 0.18984 (%.2f%%, <= 2%%), "
                  "analytic %.6f, %.2f s (< 10 s)",
                  mean, std, 100.0 * std::abs(std / 0.18984 - 1.0), analytic, t)};
}

// ---------------------------------------------------------------------------
// Soft-update law.

double max_gap(const Mlp& a, const Mlp& b) {
  const auto ba = all_blocks(a);
  const auto bb = all_blocks(b);
  double gap = 0.0;
  for (std::size_t i = 0; i < ba.size(); ++i)
    for (std::size_t k = 0; k < ba[i].values.size(); ++k)
      gap = std::max(gap, std::abs(ba[i].values[k] - bb[i].values[k]));
  return gap;
}

Outcome soft_update_law() {
  MlpOptions o;
  o.hidden_batch_norm = true;
  o.aux_dim = 2;
  o.aux_layer = 1;
  const Mlp source = init_mlp({5, 16, 16, 1}, 1, o);
  Mlp target = init_mlp({5, 16, 16, 1}, 2, o);
  // Distinct running statistics so those blocks are covered too.
  for (Layer& l : target.layers)
    if (l.kind == LayerKind::kBatchNorm) {
      l.running_mean.setConstant(0.7);
      l.running_var.setConstant(2.5);
    }
  const double tau = 0.01;
  const double gap0 = max_gap(target, source);
  double worst = 0.0;
  for (int k = 1; k <= 500; ++k) {
    soft_update(target, source, tau);
    const double expected = std::pow(1.0 - tau, k) * gap0;
    worst = std::max(worst, std::abs(max_gap(target, source) - expected) / gap0);
  }
  Mlp copy = init_mlp({5, 16, 16, 1}, 3, o);
  soft_update(copy, source, 1.0);
  const bool hard = max_gap(copy, source) == 0.0;
  return {worst <= 1e-12 && hard,
          fmt("500 updates at tau 0.01: max |gap_k - (1-tau)^k gap_0| / gap_0 = %.1e "
              "(<= 1e-12); tau = 1 exact copy: %s",
              worst, hard ? "yes" : "no")};
}

// ---------------------------------------------------------------------------
// Replay buffer.

Transition tagged(int i) {
  Transition t;
  t.s = Eigen::VectorXd::Constant(3, i);
  t.a = Eigen::VectorXd::Constant(1, -i);
  t.r = i;
  t.s_next = Eigen::VectorXd::Constant(3, i + 1);
  return t;
}

Outcome replay_buffer() {
  ReplayBuffer ceiling(10);
  std::size_t max_size = 0;
  for (int i = 0; i < 25; ++i) {
    ceiling.store(tagged(i));
    max_size = std::max(max_size, ceiling.size());
  }
  bool fifo = ceiling.size() == 10;
  for (std::size_t i = 0; i < ceiling.size(); ++i)
    fifo = fifo && ceiling.at(i).r == 15.0 + static_cast<double>(i);

  std::mt19937_64 rng(99);
  const int draws = 100'000;
  std::vector<int> counts(10, 0);
  for (const Transition& t : ceiling.sample(draws, rng)) ++counts[static_cast<int>(t.r) - 15];
  double chi2 = 0.0;
  const double expected = draws / 10.0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  const double critical = 27.877;  // chi-square, 9 dof, upper 0.001 quantile
  return {max_size == 10 && fifo && chi2 < critical,
          fmt("capacity 10 after 25 stores: max size %zu; FIFO keeps 15..24: %s; "
              "chi2 = %.2f over 1e5 draws (< %.3f)",
              max_size, fifo ? "yes" : "no", chi2, critical)};
}

// ---------------------------------------------------------------------------
// Physics sanity.

Outcome physics_sanity() {
  const RobotSpec spec = build_default_robot();
  std::string detail;
  bool ok = true;

  // (a) airborne energy drift over 1 s.
  {
    RobotState s;
    s.waist_pos = {0.0, 8.0};
    s.joint_angles = {0.4, -0.2, 0.8, 1.1};
    s.joint_vels = {0.2, -0.15, 0.1, -0.2};
    s.waist_vel = {0.5, 0.0};
    const double e0 = total_energy(spec, s);
    bool airborne = true;
    for (int i = 0; i < 1000; ++i) {
      s = step(spec, s, Torques::Zero(), 1e-3);
      airborne = airborne && !s.foot_contact[0] && !s.foot_contact[1];
    }
    const double drift = std::abs(total_energy(spec, s) - e0) / e0;
    ok = ok && airborne && drift < 1e-3;
    detail += fmt("(a) drift %.2e (< 1e-3)", drift);
  }
  // (b) static stance against the build-sheet masses.
  {
    const double weight = (0.36416 + 2 * 0.045155 + 2 * 0.069508) * 9.81;
    RobotState s;
    s.waist_pos = {0.0, 0.44 + 0.005};
    for (int i = 0; i < 3000; ++i) s = step(spec, s, Torques::Zero(), 1e-3);
    const auto f = contact_forces(spec, s);
    const double total = f[0].normal + f[1].normal;
    ok = ok && std::abs(weight - 5.822) < 5e-4 && std::abs(total / 5.822 - 1.0) <= 0.02;
    detail += fmt("; (b) stance %.4f N vs 5.822 N (%.3f%%)", total,
                  100.0 * std::abs(total / 5.822 - 1.0));
  }
  // (c) straight leg swinging about the pinned hip.
  {
    const LinkSpec& th = spec.links[kThighR];
    const LinkSpec& sh = spec.links[kShankR];
    const double m = th.mass + sh.mass;
    const double r_th = th.com_offset, r_sh = th.length + sh.com_offset;
    const double d = (th.mass * r_th + sh.mass * r_sh) / m;
    const double i_pivot = th.inertia + th.mass * r_th * r_th + sh.inertia + sh.mass * r_sh * r_sh;
    const double analytic = 2.0 * std::numbers::pi * std::sqrt(i_pivot / (m * spec.gravity * d));

    RobotState s;
    s.waist_pos = {0.0, 5.0};
    s.joint_angles[kHipR] = 4.5 * std::numbers::pi / 180.0;
    DofMask locked{};
    locked.fill(true);
    locked[2 + kHipR] = false;
    std::vector<double> up;
    double prev = s.joint_angles[kHipR], peak = 0.0;
    for (int i = 1; i <= 8000; ++i) {
      s = step(spec, s, Torques::Zero(), 1e-3, locked);
      const double cur = s.joint_angles[kHipR];
      peak = std::max(peak, std::abs(cur));
      if (prev < 0.0 && cur >= 0.0) up.push_back((i - 1 + prev / (prev - cur)) * 1e-3);
      prev = cur;
    }
    const double period = (up.back() - up.front()) / static_cast<double>(up.size() - 1);
    const double rel = std::abs(period / analytic - 1.0);
    const double peak_deg = peak * 180.0 / std::numbers::pi;
    ok = ok && up.size() >= 3 && rel <= 0.01 && peak_deg <= 5.0;
    detail += fmt("; (c) period %.5f s vs %.5f s (%.3f%%, <= 1%%), peak %.4f deg", period,
                  analytic, 100 * rel, peak_deg);
  }
  // (d) mass matrix over random states.
  {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int bad = 0;
    for (int n = 0; n < 1000; ++n) {
      RobotState s;
      s.waist_pos = {4.0 * u(rng) - 2.0, 0.2 + u(rng)};
      for (int j = 0; j < kNumJoints; ++j)
        s.joint_angles[j] =
            spec.limits.lower(j) + (spec.limits.upper(j) - spec.limits.lower(j)) * u(rng);
      const Mat6 M = mass_matrix(spec, s);
      const bool sym = (M - M.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * M.cwiseAbs().maxCoeff();
      if (!sym || Eigen::LLT<Mat6>(M).info() != Eigen::Success) ++bad;
    }
    ok = ok && bad == 0;
    detail += fmt("; (d) %d/1000 states not symmetric positive definite", bad);
  }
  return {ok, detail};
}

// ---------------------------------------------------------------------------
// Point-mass learning check against the Riccati optimum.

struct Lqr {
  Eigen::Matrix2d p0;
  std::vector<Eigen::RowVector2d> gains;  // gains[t], a_t = -K_t (x, v)
};

// Backward recursion of the finite-horizon problem with stage cost
// x^2 + r a^2 on the pre-step state and no terminal cost.
Lqr riccati(const PointMassConfig& c) {
  Eigen::Matrix2d A;
  A << 1.0, c.dt, 0.0, 1.0;
  const Eigen::Vector2d B(c.dt * c.dt, c.dt);
  Eigen::Matrix2d Q = Eigen::Matrix2d::Zero();
  Q(0, 0) = 1.0;
  Eigen::Matrix2d P = Eigen::Matrix2d::Zero();
  Lqr out;
  out.gains.resize(c.horizon);
  for (int t = c.horizon - 1; t >= 0; --t) {
    const double s = c.action_cost + B.dot(P * B);
    const Eigen::RowVector2d K = (B.transpose() * P * A) / s;
    out.gains[t] = K;
    P = Q + A.transpose() * P * (A - B * K);
  }
  out.p0 = P;
  return out;
}

Outcome point_mass_learning() {
  const auto t0 = std::chrono::steady_clock::now();
  const PointMassConfig pc;
  const Lqr lqr = riccati(pc);
  const int eval_episodes = 50;
  const auto eval_seed = [](int i) { return static_cast<std::uint64_t>(100000 + i); };

  // Optimum over the evaluation initial states, and the same policy
  // executed in the environment as a cross-check of the reward convention.
  PointMassEnv env(pc);
  double optimum = 0.0, lqr_rollout = 0.0;
  for (int i = 0; i < eval_episodes; ++i) {
    Eigen::VectorXd obs = env.reset(eval_seed(i));
    optimum -= lqr.p0(0, 0) * env.position() * env.position() / eval_episodes;
    for (int t = 0;; ++t) {
      const StepResult r = env.step(Eigen::VectorXd::Constant(1, -lqr.gains[t].dot(obs)));
      lqr_rollout += r.reward / eval_episodes;
      obs = r.observation;
      if (r.done) break;
    }
  }

  DdpgConfig c;
  c.actor_lr = 3e-5;
  c.network.batch_norm = false;
  std::vector<double> ratios, online;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    PointMassEnv train_env(pc);
    Agent agent = make_agent(c, train_env, seed);
    train(agent, train_env, episodes(300));
    // The target actor is the Polyak average of the actor iterates.
    Agent averaged = agent;
    averaged.actor = agent.actor_target;
    double learned = 0.0, current = 0.0;
    for (int i = 0; i < eval_episodes; ++i) {
      learned += evaluate_episode(averaged, env, eval_seed(i)).ret / eval_episodes;
      current += evaluate_episode(agent, env, eval_seed(i)).ret / eval_episodes;
    }
    ratios.push_back(learned / optimum);
    online.push_back(current / optimum);
  }
  std::vector<double> sorted = ratios;
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted[1];
  const double t = seconds_since(t0);
  const bool oracle_ok = std::abs(lqr_rollout / optimum - 1.0) < 1e-9;
  return {oracle_ok && median <= 1.15 && t < 300.0,
          fmt("optimum %.4f (rollout check %.4f); learned/optimal cost per seed "
              "%.3f %.3f %.3f, median %.3f (<= 1.15); last actor iterate %.3f %.3f %.3f; "
              "300 episodes; %.0f s (< 300 s)",
              optimum, lqr_rollout, ratios[0], ratios[1], ratios[2], median, online[0],
              online[1], online[2], t)};
}

// ---------------------------------------------------------------------------
// Gait analyzer on constructed traces.

Outcome gait_analyzer() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> noise(0.0, 0.01);
  double worst_phase = 0.0, worst_ratio = 0.0;
  int cases = 0;
  for (double f : {0.6, 0.83, 1.1, 1.7}) {
    for (int rep = 0; rep < 3; ++rep) {
      const double rate = 50.0, w = 2.0 * std::numbers::pi * f, p = phase(rng);
      std::vector<double> hr, hl, kr, kl;
      for (int i = 0; i < 600; ++i) {
        const double t = i / rate;
        hr.push_back(0.4 * std::sin(w * t + p) + noise(rng));
        hl.push_back(0.4 * std::sin(w * t + p + std::numbers::pi) + noise(rng));
        kr.push_back(0.5 + 0.25 * std::sin(2.0 * w * t + 2.0 * p) + noise(rng));
        kl.push_back(0.5 + 0.25 * std::sin(2.0 * w * t + 2.0 * p + 2.0 * std::numbers::pi) +
                     noise(rng));
      }
      const double ph = phase_difference(hr, hl, rate);
      const double ratio = (dominant_frequency(kr, rate) + dominant_frequency(kl, rate)) /
                           (dominant_frequency(hr, rate) + dominant_frequency(hl, rate));
      worst_phase = std::max(worst_phase, std::abs(ph - std::numbers::pi));
      worst_ratio = std::max(worst_ratio, std::abs(ratio - 2.0));
      ++cases;
    }
  }
  return {worst_phase <= 0.1 && worst_ratio <= 0.05,
          fmt("%d traces (0.6-1.7 Hz, noisy): max |phase - pi| %.4f (<= 0.1), "
              "max |knee/hip - 2| %.4f (<= 0.05)",
              cases, worst_phase, worst_ratio)};
}

// ---------------------------------------------------------------------------
// Biped training smoke test and determinism.

RunConfig biped_config(const fs::path& out) {
  RunConfig c;
  c.run.episodes = 200;
  c.run.checkpoint_interval = 100;
  c.run.output_dir = out.string();
  c.seed = 2024;
  return c;
}

bool all_finite(const Table& t) {
  for (const auto& col : t.columns)
    for (double v : col)
      if (!std::isfinite(v)) return false;
  return true;
}

Outcome biped_smoke(const fs::path& run_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig config = biped_config(run_dir);
  std::ostringstream log;
  const TrainResult tr = cmd_train(config, std::nullopt, log);
  const Table metrics = read_csv(tr.metrics);
  const bool finite = metrics.rows() == 200 && all_finite(metrics);

  const fs::path analysis = run_dir / "analysis";
  cmd_analyze({tr.metrics}, analysis, log);
  const Table curve = read_csv(analysis / "metrics_reward_curve.csv");
  const bool curve_ok = curve.rows() == 200 && all_finite(curve) &&
                        fs::exists(analysis / "metrics_reward_curve.svg");

  // Same training in process; it must agree with the saved run bit for bit.
  BipedEnv env(config.env);
  Agent trained = make_agent(config.ddpg, env, config.seed);
  train(trained, env, episodes(200));
  Agent from_run = make_agent(config.ddpg, env, 0);
  load_checkpoint(tr.final_checkpoint, from_run);
  const std::string run_diff = testing::first_difference(trained, from_run);

  const fs::path saved = run_dir / "roundtrip.ckpt";
  save_checkpoint(saved, trained, config_hash(config), config_echo(config));
  Agent loaded = make_agent(config.ddpg, env, 1);
  load_checkpoint(saved, loaded);
  const std::string rt_diff = testing::first_difference(trained, loaded);

  // Action sequences along evaluation rollouts of both agents, then on
  // random observations since early policies fall within a few steps.
  int compared = 0;
  bool same_actions = true;
  std::mt19937_64 obs_rng(8);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::VectorXd o =
        Eigen::VectorXd::NullaryExpr(trained.obs_dim, [&] { return g(obs_rng); });
    same_actions = same_actions &&
                   testing::same_bits(policy_action(trained, o), policy_action(loaded, o));
    ++compared;
  }
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    BipedEnv ea(config.env), eb(config.env);
    Eigen::VectorXd oa = ea.reset(seed), ob = eb.reset(seed);
    for (int t = 0; t < 1000; ++t) {
      const Eigen::VectorXd aa = policy_action(trained, oa);
      const Eigen::VectorXd ab = policy_action(loaded, ob);
      same_actions = same_actions && testing::same_bits(aa, ab);
      ++compared;
      const StepResult ra = ea.step(aa), rb = eb.step(ab);
      oa = ra.observation;
      ob = rb.observation;
      if (ra.done || rb.done) {
        same_actions = same_actions && ra.done && rb.done;
        break;
      }
    }
  }

  const std::vector<double>& ret = metrics.column("return");
  double first = 0.0, last = 0.0;
  for (int i = 0; i < 100; ++i) {
    first += ret[i] / 100.0;
    last += ret[100 + i] / 100.0;
  }
  const double t = seconds_since(t0);
  return {finite && curve_ok && run_diff.empty() && rt_diff.empty() && same_actions,
          fmt("200 episodes finite: %s; trailing-100 curve %zu points; in-process run matches "
              "checkpoint: %s; save/load state identical: %s; %d actions bitwise equal: %s; "
              "mean return episodes 1-100 %.3f, 101-200 %.3f (not gated); %.0f s",
              finite ? "yes" : "no", curve.rows(), run_diff.empty() ? "yes" : run_diff.c_str(),
              rt_diff.empty() ? "yes" : rt_diff.c_str(), compared, same_actions ? "yes" : "no",
              first, last, t)};
}

Outcome determinism(const fs::path& first_run) {
  const fs::path second = scratch("determinism");
  std::ostringstream log;
  cmd_train(biped_config(second), std::nullopt, log);
  const std::string a = slurp(first_run / kMetricsFile);
  const std::string b = slurp(second / kMetricsFile);
  return {!a.empty() && a == b,
          fmt("two 200-episode train runs, metrics CSVs %zu and %zu bytes, identical: %s",
              a.size(), b.size(), a == b ? "yes" : "no")};
}

}  // namespace
}  // namespace bwr

int main() {
  using namespace bwr;
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const fs::path smoke_dir = scratch("biped_smoke");
  const std::vector<Criterion> criteria = {
      {"gradient fidelity", gradient_fidelity},
      {"OU statistics", ou_statistics},
      {"soft-update law", soft_update_law},
      {"replay-buffer properties", replay_buffer},
      {"physics sanity", physics_sanity},
      {"point-mass learning vs Riccati optimum", point_mass_learning},
      {"gait analyzer", gait_analyzer},
      {"biped training smoke test", [&] { return biped_smoke(smoke_dir); }},
      {"train determinism", [&] { return determinism(smoke_dir); }},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.passed) ++failures;
    std::printf("[%s] %s: %s\n", o.passed ? "PASS" : "FAIL", c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
