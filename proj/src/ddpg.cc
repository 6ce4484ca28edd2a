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

#include "bwr/ddpg.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bwr {
namespace {

void require(bool ok, const char* field) {
  if (!ok) throw std::invalid_argument(std::string("invalid ") + field);
}

Eigen::MatrixXd stack(const std::vector<Transition>& batch,
                      Eigen::VectorXd Transition::*field) {
  const Eigen::Index rows = (batch.front().*field).size();
  Eigen::MatrixXd m(rows, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) m.col(i) = batch[i].*field;
  return m;
}

void require_batch(const std::vector<Transition>& batch) {
  if (batch.empty()) throw std::invalid_argument("empty minibatch");
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
}

void ReplayBuffer::store(Transition t) {
  if (entries_.size() < capacity_) {
    entries_.push_back(std::move(t));
    return;
  }
  entries_[cursor_] = std::move(t);
  cursor_ = (cursor_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= entries_.size()) throw std::out_of_range("replay index out of range");
  return entries_[(cursor_ + i) % entries_.size()];
}

std::vector<Transition> ReplayBuffer::sample(std::size_t n,
                                             std::mt19937_64& rng) const {
  if (entries_.empty())
    throw std::invalid_argument("cannot sample from an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, entries_.size() - 1);
  std::vector<Transition> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(entries_[pick(rng)]);
  return out;
}

void ReplayBuffer::clear() {
  entries_.clear();
  cursor_ = 0;
}

ReplayBuffer ReplayBuffer::restore(std::size_t capacity, std::vector<Transition> storage,
                                   std::size_t cursor) {
  ReplayBuffer b(capacity);
  if (storage.size() > capacity) throw std::invalid_argument("replay storage exceeds capacity");
  const bool full = storage.size() == capacity;
  if ((full && cursor >= capacity) || (!full && cursor != 0))
    throw std::invalid_argument("replay cursor inconsistent with storage");
  b.entries_ = std::move(storage);
  b.cursor_ = cursor;
  return b;
}

double ou_stationary_std(const OuParams& p) {
  return p.sigma / std::sqrt(2.0 * p.theta - p.theta * p.theta);
}

OuNoise make_ou(int dim, const OuParams& params) {
  OuNoise n{params, Eigen::VectorXd::Constant(dim, params.mu)};
  return n;
}

void reset(OuNoise& noise) { noise.x.setConstant(noise.params.mu); }

const Eigen::VectorXd& ou_sample(OuNoise& noise, std::mt19937_64& rng) {
  const OuParams& p = noise.params;
  std::normal_distribution<double> xi(0.0, 1.0);
  for (Eigen::Index i = 0; i < noise.x.size(); ++i) {
    noise.x[i] += p.theta * (p.mu - noise.x[i]) + p.sigma * xi(rng);
  }
  return noise.x;
}

void validate(const DdpgConfig& c) {
  require(c.gamma >= 0.0 && c.gamma <= 1.0, "ddpg.gamma (must lie in [0, 1])");
  require(c.tau > 0.0 && c.tau <= 1.0, "ddpg.tau (must lie in (0, 1])");
  require(c.batch_size >= 1, "ddpg.batch_size (must be >= 1)");
  require(!c.network.batch_norm || c.batch_size >= 2,
          "ddpg.batch_size (batch norm needs >= 2)");
  require(c.buffer_capacity >= static_cast<std::size_t>(c.batch_size),
          "ddpg.buffer_capacity (must hold a minibatch)");
  require(c.actor_lr > 0.0 && std::isfinite(c.actor_lr), "ddpg.actor_lr");
  require(c.critic_lr > 0.0 && std::isfinite(c.critic_lr), "ddpg.critic_lr");
  for (int h : c.network.hidden) require(h > 0, "ddpg.hidden (sizes must be positive)");
  require(c.ou.theta >= 0.0 && c.ou.theta <= 1.0, "ou.theta (must lie in [0, 1])");
  require(c.ou.sigma >= 0.0 && std::isfinite(c.ou.sigma), "ou.sigma");
  require(std::isfinite(c.ou.mu), "ou.mu");
}

Mlp make_actor(int obs_dim, int act_dim, double action_bound,
               const NetworkConfig& net, std::uint64_t seed) {
  std::vector<int> sizes = {obs_dim};
  sizes.insert(sizes.end(), net.hidden.begin(), net.hidden.end());
  sizes.push_back(act_dim);
  MlpOptions opt;
  opt.input_batch_norm = net.batch_norm;
  opt.hidden_batch_norm = net.batch_norm;
  opt.output = OutputActivation::kTanh;
  opt.output_scale = action_bound;
  return init_mlp(sizes, seed, opt);
}

Mlp make_critic(int obs_dim, int act_dim, const NetworkConfig& net,
                std::uint64_t seed) {
  std::vector<int> sizes = {obs_dim};
  sizes.insert(sizes.end(), net.hidden.begin(), net.hidden.end());
  sizes.push_back(1);
  MlpOptions opt;
  opt.input_batch_norm = net.batch_norm;
  opt.hidden_batch_norm = net.batch_norm;
  opt.aux_dim = act_dim;
  opt.aux_layer = net.hidden.empty() ? 0 : 1;
  return init_mlp(sizes, seed, opt);
}

Agent make_agent(const DdpgConfig& config, int obs_dim, int act_dim,
                 double action_bound, std::uint64_t master_seed) {
  validate(config);
  if (obs_dim <= 0 || act_dim <= 0 || !(action_bound > 0.0))
    throw std::invalid_argument("invalid agent dimensions");
  Agent a;
  a.config = config;
  a.obs_dim = obs_dim;
  a.act_dim = act_dim;
  a.action_bound = action_bound;
  a.actor = make_actor(obs_dim, act_dim, action_bound, config.network,
                       derive_seed(master_seed, 1));
  a.critic = make_critic(obs_dim, act_dim, config.network,
                         derive_seed(master_seed, 2));
  a.actor_target = a.actor;
  a.critic_target = a.critic;
  a.actor_opt = make_adam(a.actor, {.learning_rate = config.actor_lr});
  a.critic_opt = make_adam(a.critic, {.learning_rate = config.critic_lr});
  a.buffer = ReplayBuffer(config.buffer_capacity);
  a.noise = make_ou(act_dim, config.ou);
  a.noise_rng.seed(derive_seed(master_seed, 3));
  a.sample_rng.seed(derive_seed(master_seed, 4));
  a.env_seed = derive_seed(master_seed, 5);
  return a;
}

Agent make_agent(const DdpgConfig& config, const Environment& env,
                 std::uint64_t master_seed) {
  return make_agent(config, env.observation_dim(), env.action_dim(),
                    env.action_bound(), master_seed);
}

std::uint64_t episode_seed(const Agent& agent, std::int64_t episode) {
  return derive_seed(agent.env_seed, static_cast<std::uint64_t>(episode));
}

Eigen::VectorXd policy_action(const Agent& agent, const Eigen::VectorXd& obs) {
  if (obs.size() != agent.obs_dim)
    throw std::invalid_argument("observation has wrong length");
  const Eigen::MatrixXd out = forward(agent.actor, obs, nullptr, Mode::kEval);
  return out.col(0).cwiseMax(-agent.action_bound).cwiseMin(agent.action_bound);
}

Eigen::VectorXd select_action(Agent& agent, const Eigen::VectorXd& obs,
                              bool explore) {
  if (obs.size() != agent.obs_dim)
    throw std::invalid_argument("observation has wrong length");
  Eigen::VectorXd a = forward(agent.actor, obs, nullptr, Mode::kEval).col(0);
  if (explore) a += ou_sample(agent.noise, agent.noise_rng);
  return a.cwiseMax(-agent.action_bound).cwiseMin(agent.action_bound);
}

Eigen::VectorXd critic_target_values(const std::vector<Transition>& batch,
                                     const Mlp& actor_target,
                                     const Mlp& critic_target, double gamma) {
  require_batch(batch);
  const Eigen::MatrixXd s_next = stack(batch, &Transition::s_next);
  const Eigen::MatrixXd a_next = forward(actor_target, s_next, nullptr, Mode::kEval);
  const Eigen::MatrixXd q_next =
      forward(critic_target, s_next, &a_next, Mode::kEval);
  Eigen::VectorXd y(static_cast<Eigen::Index>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    y[i] = batch[i].r;
    if (!batch[i].done) y[i] += gamma * q_next(0, i);
  }
  return y;
}

Objective critic_loss(const Mlp& critic, const std::vector<Transition>& batch,
                      const Eigen::VectorXd& y) {
  require_batch(batch);
  const Eigen::MatrixXd s = stack(batch, &Transition::s);
  const Eigen::MatrixXd a = stack(batch, &Transition::a);
  if (y.size() != static_cast<Eigen::Index>(batch.size()))
    throw std::invalid_argument("target count does not match minibatch");
  Objective out;
  const Eigen::MatrixXd q = forward(critic, s, &a, Mode::kTrain, &out.cache);
  const Eigen::RowVectorXd err = q.row(0) - y.transpose();
  const double n = static_cast<double>(batch.size());
  out.value = err.squaredNorm() / n;
  out.grads = backward(critic, out.cache, (2.0 / n) * err);
  return out;
}

Objective actor_objective(const Mlp& actor, const Mlp& critic,
                          const std::vector<Transition>& batch) {
  require_batch(batch);
  const Eigen::MatrixXd s = stack(batch, &Transition::s);
  Objective out;
  ForwardCache critic_cache;
  const Eigen::MatrixXd a = forward(actor, s, nullptr, Mode::kTrain, &out.cache);
  const Eigen::MatrixXd q = forward(critic, s, &a, Mode::kTrain, &critic_cache);
  const double n = static_cast<double>(batch.size());
  out.value = q.sum() / n;
  const MlpGradients dq = backward(
      critic, critic_cache, Eigen::MatrixXd::Constant(1, q.cols(), 1.0 / n));
  out.grads = backward(actor, out.cache, dq.aux);
  return out;
}

double critic_update(Agent& agent, const std::vector<Transition>& batch) {
  const Eigen::VectorXd y = critic_target_values(
      batch, agent.actor_target, agent.critic_target, agent.config.gamma);
  const Objective loss = critic_loss(agent.critic, batch, y);
  if (!std::isfinite(loss.value))
    throw std::runtime_error("critic loss is not finite");
  adam_step(agent.critic, loss.grads, agent.critic_opt);
  commit_batch_stats(agent.critic, loss.cache);
  return loss.value;
}

double actor_update(Agent& agent, const std::vector<Transition>& batch) {
  Objective obj = actor_objective(agent.actor, agent.critic, batch);
  // Ascent on mean Q is descent on its negation.
  for (Eigen::VectorXd& g : obj.grads.params) g = -g;
  adam_step(agent.actor, obj.grads, agent.actor_opt);
  commit_batch_stats(agent.actor, obj.cache);
  return obj.value;
}

void update_targets(Agent& agent) {
  soft_update(agent.critic_target, agent.critic, agent.config.tau);
  soft_update(agent.actor_target, agent.actor, agent.config.tau);
}

std::vector<EpisodeMetrics> train(Agent& agent, Environment& env,
                                  const TrainOptions& options) {
  if (env.observation_dim() != agent.obs_dim || env.action_dim() != agent.act_dim)
    throw std::invalid_argument("environment does not match agent");
  const auto batch_size = static_cast<std::size_t>(agent.config.batch_size);
  const std::size_t start_size = std::max(agent.config.warmup, batch_size);
  std::vector<EpisodeMetrics> history;
  for (int e = 0; e < options.episodes; ++e) {
    const auto t0 = std::chrono::steady_clock::now();
    EpisodeMetrics m;
    m.episode = agent.episodes_done;
    Eigen::VectorXd obs = env.reset(episode_seed(agent, agent.episodes_done));
    reset(agent.noise);
    while (true) {
      const Eigen::VectorXd action = select_action(agent, obs, true);
      StepResult r = env.step(action);
      agent.buffer.store({obs, action, r.reward, r.observation, r.info.terminal});
      m.ret += r.reward;
      ++m.steps;
      m.distance_m = r.info.distance_m;
      m.fell = r.info.fell;
      if (agent.buffer.size() >= start_size) {
        const std::vector<Transition> batch =
            agent.buffer.sample(batch_size, agent.sample_rng);
        critic_update(agent, batch);
        actor_update(agent, batch);
        update_targets(agent);
        ++agent.updates;
      }
      obs = std::move(r.observation);
      if (r.done || (options.max_steps > 0 && m.steps >= options.max_steps)) break;
    }
    ++agent.episodes_done;
    m.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
    history.push_back(m);
    if (options.on_episode) options.on_episode(m, agent);
  }
  return history;
}

EpisodeMetrics evaluate_episode(const Agent& agent, Environment& env,
                                std::uint64_t seed, int max_steps) {
  EpisodeMetrics m;
  Eigen::VectorXd obs = env.reset(seed);
  while (true) {
    const StepResult r = env.step(policy_action(agent, obs));
    m.ret += r.reward;
    ++m.steps;
    m.distance_m = r.info.distance_m;
    m.fell = r.info.fell;
    obs = r.observation;
    if (r.done || (max_steps > 0 && m.steps >= max_steps)) break;
  }
  return m;
}

}  // namespace bwr
