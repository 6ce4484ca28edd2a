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

// Deep deterministic policy gradient: replay buffer, Ornstein-Uhlenbeck
// exploration, actor/critic updates with target networks, and the episodic
// training loop.

#ifndef BWR_DDPG_H_
#define BWR_DDPG_H_

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "bwr/env.h"
#include "bwr/nn.h"

namespace bwr {

// Decorrelates a master seed into independent stream seeds (splitmix64).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

struct Transition {
  Eigen::VectorXd s;
  Eigen::VectorXd a;
  double r = 0.0;
  Eigen::VectorXd s_next;
  bool done = false;
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 1'000'000);

  void store(Transition t);
  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  // 0 is the oldest entry.
  const Transition& at(std::size_t i) const;
  // n uniform draws with replacement. Throws std::invalid_argument when the
  // buffer is empty.
  std::vector<Transition> sample(std::size_t n, std::mt19937_64& rng) const;
  void clear();

  // Physical slot order and overwrite cursor, for exact persistence.
  const std::vector<Transition>& storage() const { return entries_; }
  std::size_t cursor() const { return cursor_; }
  static ReplayBuffer restore(std::size_t capacity, std::vector<Transition> storage,
                              std::size_t cursor);

 private:
  std::size_t capacity_;
  std::size_t cursor_ = 0;  // next slot to overwrite once full
  std::vector<Transition> entries_;
};

struct OuParams {
  double mu = 0.0;
  double theta = 0.15;
  double sigma = 0.1;

  bool operator==(const OuParams&) const = default;
};

// Standard deviation of the unit-step process at stationarity.
double ou_stationary_std(const OuParams& p);

struct OuNoise {
  OuParams params;
  Eigen::VectorXd x;
};

OuNoise make_ou(int dim, const OuParams& params);
void reset(OuNoise& noise);
// x <- x + theta (mu - x) + sigma xi, xi ~ N(0, I); returns the new x.
const Eigen::VectorXd& ou_sample(OuNoise& noise, std::mt19937_64& rng);

struct NetworkConfig {
  std::vector<int> hidden = {64, 64};
  bool batch_norm = true;

  bool operator==(const NetworkConfig&) const = default;
};

struct DdpgConfig {
  double gamma = 0.99;
  double tau = 0.001;
  int batch_size = 64;
  std::size_t buffer_capacity = 1'000'000;
  std::size_t warmup = 1000;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  NetworkConfig network;
  OuParams ou;

  bool operator==(const DdpgConfig&) const = default;
};

// Throws std::invalid_argument naming the offending field.
void validate(const DdpgConfig& config);

Mlp make_actor(int obs_dim, int act_dim, double action_bound,
               const NetworkConfig& net, std::uint64_t seed);
// State pathway through the first hidden layer, action appended after it.
Mlp make_critic(int obs_dim, int act_dim, const NetworkConfig& net,
                std::uint64_t seed);

// Complete training state.
struct Agent {
  DdpgConfig config;
  int obs_dim = 0;
  int act_dim = 0;
  double action_bound = 1.0;
  Mlp actor, critic, actor_target, critic_target;
  AdamState actor_opt, critic_opt;
  ReplayBuffer buffer;
  OuNoise noise;
  std::mt19937_64 noise_rng;
  std::mt19937_64 sample_rng;
  std::uint64_t env_seed = 0;
  std::int64_t episodes_done = 0;
  std::int64_t updates = 0;
};

Agent make_agent(const DdpgConfig& config, int obs_dim, int act_dim,
                 double action_bound, std::uint64_t master_seed);
Agent make_agent(const DdpgConfig& config, const Environment& env,
                 std::uint64_t master_seed);

// Reset seed of the given episode.
std::uint64_t episode_seed(const Agent& agent, std::int64_t episode);

// Eval-mode actor output plus optional OU noise, clamped to the bound.
Eigen::VectorXd select_action(Agent& agent, const Eigen::VectorXd& obs,
                              bool explore);
Eigen::VectorXd policy_action(const Agent& agent, const Eigen::VectorXd& obs);

// y_i = r_i + gamma (1 - done_i) Q'(s'_i, mu'(s'_i)), eval-mode targets.
Eigen::VectorXd critic_target_values(const std::vector<Transition>& batch,
                                     const Mlp& actor_target,
                                     const Mlp& critic_target, double gamma);

struct Objective {
  double value = 0.0;
  MlpGradients grads;
  // Forward pass of the network being optimized.
  ForwardCache cache;
};

// Mean squared error against fixed targets y and its critic gradient
// (train-mode batch statistics, pure).
Objective critic_loss(const Mlp& critic, const std::vector<Transition>& batch,
                      const Eigen::VectorXd& y);
// Mean Q(s, mu(s)) and its gradient with respect to the actor parameters
// (both networks in train-mode batch statistics, pure).
Objective actor_objective(const Mlp& actor, const Mlp& critic,
                          const std::vector<Transition>& batch);

// One optimizer step each; the returned values are pre-step.
double critic_update(Agent& agent, const std::vector<Transition>& batch);
double actor_update(Agent& agent, const std::vector<Transition>& batch);
void update_targets(Agent& agent);

struct EpisodeMetrics {
  std::int64_t episode = 0;
  int steps = 0;
  double ret = 0.0;
  double distance_m = 0.0;
  bool fell = false;
  double wall_ms = 0.0;
};

struct TrainOptions {
  int episodes = 0;
  // Per-episode step budget; 0 leaves termination to the environment.
  int max_steps = 0;
  std::function<void(const EpisodeMetrics&, const Agent&)> on_episode;
};

std::vector<EpisodeMetrics> train(Agent& agent, Environment& env,
                                  const TrainOptions& options);

// Noise-free rollout of the current policy.
EpisodeMetrics evaluate_episode(const Agent& agent, Environment& env,
                                std::uint64_t seed, int max_steps = 0);

}  // namespace bwr

#endif  // BWR_DDPG_H_
