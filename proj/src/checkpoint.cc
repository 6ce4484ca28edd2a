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

#include "bwr/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>

namespace bwr {
namespace {

constexpr char kMainMagic[4] = {'B', 'W', 'R', 'D'};
constexpr char kReplayMagic[4] = {'B', 'W', 'R', 'B'};

class Writer {
 public:
  void raw(const void* p, std::size_t n) { out_.append(static_cast<const char*>(p), n); }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u64(s.size());
    raw(s.data(), s.size());
  }
  void vec(const double* p, std::size_t n) {
    u64(n);
    for (std::size_t i = 0; i < n; ++i) f64(p[i]);
  }
  void vec(const Eigen::VectorXd& v) { vec(v.data(), static_cast<std::size_t>(v.size())); }
  const std::string& bytes() const { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  Reader(std::string data, std::string origin)
      : data_(std::move(data)), origin_(std::move(origin)) {}

  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) fail("truncated file");
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw CheckpointError(origin_ + ": " + msg);
  }
  void magic(const char (&expect)[4]) {
    need(4);
    if (std::memcmp(data_.data() + pos_, expect, 4) != 0)
      fail("not a checkpoint file (bad magic)");
    pos_ += 4;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint8_t byte() {
    need(1);
    return static_cast<std::uint8_t>(data_[pos_++]);
  }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint64_t n = u64();
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  Eigen::VectorXd vec() {
    const std::uint64_t n = u64();
    need(n * 8);
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (std::uint64_t i = 0; i < n; ++i) v[static_cast<Eigen::Index>(i)] = f64();
    return v;
  }
  void into(std::span<double> dst, const std::string& what) {
    const std::uint64_t n = u64();
    if (n != dst.size()) fail("size mismatch in " + what);
    need(n * 8);
    for (double& d : dst) d = f64();
  }
  bool at_end() const { return pos_ == data_.size(); }

 private:
  std::string data_;
  std::string origin_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_atomic(const std::filesystem::path& path, const std::string& bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw CheckpointError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw CheckpointError("cannot rename " + tmp.string() + ": " + ec.message());
}

void write_net(Writer& w, const Mlp& net) {
  w.u32(static_cast<std::uint32_t>(net.layers.size()));
  w.u32(static_cast<std::uint32_t>(net.input_dim));
  w.u32(static_cast<std::uint32_t>(net.aux_dim));
  w.u32(static_cast<std::uint32_t>(net.output_dim));
  for (const Layer& l : net.layers) {
    w.u32(static_cast<std::uint32_t>(l.kind));
    w.u32(static_cast<std::uint32_t>(l.in_dim));
    w.u32(static_cast<std::uint32_t>(l.out_dim));
    w.u32(static_cast<std::uint32_t>(l.aux_dim));
    w.f64(l.scale);
  }
  for (const ConstParamBlock& b : all_blocks(net)) {
    w.str(b.name);
    w.vec(b.values.data(), b.values.size());
  }
}

void read_net(Reader& r, Mlp& net, const std::string& which) {
  const auto bad = [&] { r.fail(which + " network does not match the configuration"); };
  if (r.u32() != net.layers.size()) bad();
  if (r.u32() != static_cast<std::uint32_t>(net.input_dim)) bad();
  if (r.u32() != static_cast<std::uint32_t>(net.aux_dim)) bad();
  if (r.u32() != static_cast<std::uint32_t>(net.output_dim)) bad();
  for (Layer& l : net.layers) {
    if (r.u32() != static_cast<std::uint32_t>(l.kind)) bad();
    if (r.u32() != static_cast<std::uint32_t>(l.in_dim)) bad();
    if (r.u32() != static_cast<std::uint32_t>(l.out_dim)) bad();
    if (r.u32() != static_cast<std::uint32_t>(l.aux_dim)) bad();
    l.scale = r.f64();
  }
  for (const ParamBlock& b : all_blocks(net)) {
    if (r.str() != b.name) bad();
    r.into(b.values, which + " " + b.name);
  }
}

void write_adam(Writer& w, const AdamState& s) {
  w.f64(s.config.learning_rate);
  w.f64(s.config.beta1);
  w.f64(s.config.beta2);
  w.f64(s.config.epsilon);
  w.i64(s.step);
  w.u32(static_cast<std::uint32_t>(s.m.size()));
  for (std::size_t i = 0; i < s.m.size(); ++i) {
    w.vec(s.m[i]);
    w.vec(s.v[i]);
  }
}

void read_adam(Reader& r, AdamState& s, const std::string& which) {
  s.config.learning_rate = r.f64();
  s.config.beta1 = r.f64();
  s.config.beta2 = r.f64();
  s.config.epsilon = r.f64();
  s.step = r.i64();
  if (r.u32() != s.m.size()) r.fail(which + " optimizer does not match the configuration");
  for (std::size_t i = 0; i < s.m.size(); ++i) {
    Eigen::VectorXd m = r.vec();
    Eigen::VectorXd v = r.vec();
    if (m.size() != s.m[i].size() || v.size() != s.v[i].size())
      r.fail(which + " optimizer moment size mismatch");
    s.m[i] = std::move(m);
    s.v[i] = std::move(v);
  }
}

std::string engine_text(const std::mt19937_64& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

void read_engine(Reader& r, std::mt19937_64& rng) {
  std::istringstream is(r.str());
  is >> rng;
  if (!is) r.fail("corrupt RNG state");
}

std::string encode_replay(const Agent& agent) {
  const ReplayBuffer& b = agent.buffer;
  Writer w;
  w.raw(kReplayMagic, 4);
  w.u32(kCheckpointVersion);
  w.u64(b.capacity());
  w.u64(b.cursor());
  w.u64(b.size());
  w.u32(static_cast<std::uint32_t>(agent.obs_dim));
  w.u32(static_cast<std::uint32_t>(agent.act_dim));
  for (const Transition& t : b.storage()) {
    for (double v : t.s) w.f64(v);
    for (double v : t.a) w.f64(v);
    w.f64(t.r);
    for (double v : t.s_next) w.f64(v);
    const char done = t.done ? 1 : 0;
    w.raw(&done, 1);
  }
  return w.bytes();
}

ReplayBuffer decode_replay(Reader& r, const Agent& agent) {
  r.magic(kReplayMagic);
  if (r.u32() != kCheckpointVersion) r.fail("unsupported replay version");
  const std::uint64_t capacity = r.u64();
  const std::uint64_t cursor = r.u64();
  const std::uint64_t count = r.u64();
  if (r.u32() != static_cast<std::uint32_t>(agent.obs_dim) ||
      r.u32() != static_cast<std::uint32_t>(agent.act_dim))
    r.fail("replay dimensions do not match the agent");
  const auto read_n = [&](int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = r.f64();
    return v;
  };
  std::vector<Transition> storage;
  storage.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    Transition t;
    t.s = read_n(agent.obs_dim);
    t.a = read_n(agent.act_dim);
    t.r = r.f64();
    t.s_next = read_n(agent.obs_dim);
    const std::uint8_t done = r.byte();
    if (done > 1) r.fail("corrupt terminal flag");
    t.done = done == 1;
    storage.push_back(std::move(t));
  }
  if (!r.at_end()) r.fail("trailing bytes");
  try {
    return ReplayBuffer::restore(capacity, std::move(storage), cursor);
  } catch (const std::invalid_argument& e) {
    r.fail(e.what());
  }
}

CheckpointHeader read_header(Reader& r) {
  r.magic(kMainMagic);
  CheckpointHeader h;
  h.version = r.u32();
  if (h.version != kCheckpointVersion)
    r.fail("unsupported checkpoint version " + std::to_string(h.version));
  h.config_hash = r.u64();
  h.episode = r.i64();
  h.config_echo = r.str();
  return h;
}

}  // namespace

std::filesystem::path replay_sidecar(const std::filesystem::path& checkpoint) {
  std::filesystem::path p = checkpoint;
  p += ".replay";
  return p;
}

void save_checkpoint(const std::filesystem::path& path, const Agent& agent,
                     std::uint64_t config_hash, const std::string& config_echo) {
  Writer w;
  w.raw(kMainMagic, 4);
  w.u32(kCheckpointVersion);
  w.u64(config_hash);
  w.i64(agent.episodes_done);
  w.str(config_echo);

  w.u32(static_cast<std::uint32_t>(agent.obs_dim));
  w.u32(static_cast<std::uint32_t>(agent.act_dim));
  w.f64(agent.action_bound);
  w.u64(agent.env_seed);
  w.i64(agent.updates);
  for (const Mlp* net : {&agent.actor, &agent.critic, &agent.actor_target, &agent.critic_target})
    write_net(w, *net);
  write_adam(w, agent.actor_opt);
  write_adam(w, agent.critic_opt);
  w.str(engine_text(agent.noise_rng));
  w.str(engine_text(agent.sample_rng));
  w.f64(agent.noise.params.mu);
  w.f64(agent.noise.params.theta);
  w.f64(agent.noise.params.sigma);
  w.vec(agent.noise.x);

  write_atomic(replay_sidecar(path), encode_replay(agent));
  write_atomic(path, w.bytes());
}

CheckpointHeader read_checkpoint_header(const std::filesystem::path& path) {
  Reader r(read_file(path), path.string());
  return read_header(r);
}

CheckpointHeader load_checkpoint(const std::filesystem::path& path, Agent& agent,
                                 bool with_replay) {
  Reader r(read_file(path), path.string());
  const CheckpointHeader h = read_header(r);

  Agent next = agent;
  if (r.u32() != static_cast<std::uint32_t>(next.obs_dim) ||
      r.u32() != static_cast<std::uint32_t>(next.act_dim))
    r.fail("observation/action dimensions do not match the agent");
  next.action_bound = r.f64();
  next.env_seed = r.u64();
  next.updates = r.i64();
  next.episodes_done = h.episode;
  read_net(r, next.actor, "actor");
  read_net(r, next.critic, "critic");
  read_net(r, next.actor_target, "target actor");
  read_net(r, next.critic_target, "target critic");
  read_adam(r, next.actor_opt, "actor");
  read_adam(r, next.critic_opt, "critic");
  read_engine(r, next.noise_rng);
  read_engine(r, next.sample_rng);
  next.noise.params.mu = r.f64();
  next.noise.params.theta = r.f64();
  next.noise.params.sigma = r.f64();
  next.noise.x = r.vec();
  if (next.noise.x.size() != next.act_dim) r.fail("noise dimension mismatch");
  if (!r.at_end()) r.fail("trailing bytes");

  if (with_replay) {
    const std::filesystem::path side = replay_sidecar(path);
    Reader rr(read_file(side), side.string());
    next.buffer = decode_replay(rr, next);
  }
  agent = std::move(next);
  return h;
}

}  // namespace bwr
