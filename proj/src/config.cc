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

#include "bwr/config.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <vector>

namespace bwr {
namespace {

struct Key {
  std::string section;
  std::string name;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;

  std::string full() const { return section + "." + name; }
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
T parse_number(const std::string& text) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
    throw std::invalid_argument("'" + text + "' is not a valid number");
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v)) throw std::invalid_argument("value must be finite");
  }
  return v;
}

bool parse_bool(const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw std::invalid_argument("'" + text + "' is not true/false");
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  if (trim(text).empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<int>(trim(item)));
  return out;
}

std::string format_int_list(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(v[i]);
  }
  return out;
}

template <typename Ref>
Key real(const char* section, const char* name, Ref ref) {
  return {section, name,
          [ref](const RunConfig& c) { return format_double(ref(c)); },
          [ref](RunConfig& c, const std::string& v) { ref(c) = parse_number<double>(v); }};
}

template <typename T, typename Ref>
Key integer(const char* section, const char* name, Ref ref) {
  return {section, name,
          [ref](const RunConfig& c) { return std::to_string(ref(c)); },
          [ref](RunConfig& c, const std::string& v) { ref(c) = parse_number<T>(v); }};
}

template <typename Ref>
Key boolean(const char* section, const char* name, Ref ref) {
  return {section, name,
          [ref](const RunConfig& c) { return std::string(ref(c) ? "true" : "false"); },
          [ref](RunConfig& c, const std::string& v) { ref(c) = parse_bool(v); }};
}

// Both sides of a leg segment share one key.
Key link_field(const std::string& name, int right, int left, double LinkSpec::*field) {
  return {"robot", name,
          [=](const RunConfig& c) { return format_double(c.env.robot.links[right].*field); },
          [=](RunConfig& c, const std::string& v) {
            const double x = parse_number<double>(v);
            c.env.robot.links[right].*field = x;
            c.env.robot.links[left].*field = x;
          }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    const struct {
      const char* prefix;
      int right, left;
    } groups[] = {{"waist", kWaist, kWaist},
                  {"thigh", kThighR, kThighL},
                  {"shank", kShankR, kShankL}};
    for (const auto& g : groups) {
      const std::pair<const char*, double LinkSpec::*> fields[] = {
          {"_mass", &LinkSpec::mass},
          {"_length", &LinkSpec::length},
          {"_com_offset", &LinkSpec::com_offset},
          {"_inertia", &LinkSpec::inertia}};
      for (const auto& [suffix, member] : fields) {
        k.push_back(link_field(std::string(g.prefix) + suffix, g.right, g.left, member));
      }
    }
    k.push_back(real("robot", "hip_flexion_max",
                     [](auto& c) -> auto& { return c.env.robot.limits.hip_flexion_max; }));
    k.push_back(real("robot", "hip_extension_max",
                     [](auto& c) -> auto& { return c.env.robot.limits.hip_extension_max; }));
    k.push_back(real("robot", "knee_flexion_max",
                     [](auto& c) -> auto& { return c.env.robot.limits.knee_flexion_max; }));
    k.push_back(real("robot", "knee_extension_max",
                     [](auto& c) -> auto& { return c.env.robot.limits.knee_extension_max; }));
    k.push_back(real("robot", "gravity", [](auto& c) -> auto& { return c.env.robot.gravity; }));
    k.push_back(real("robot", "contact_stiffness",
                     [](auto& c) -> auto& { return c.env.robot.contact_stiffness; }));
    k.push_back(real("robot", "contact_damping",
                     [](auto& c) -> auto& { return c.env.robot.contact_damping; }));
    k.push_back(real("robot", "friction_coefficient",
                     [](auto& c) -> auto& { return c.env.robot.friction_coefficient; }));
    k.push_back(real("robot", "tangential_damping",
                     [](auto& c) -> auto& { return c.env.robot.tangential_damping; }));
    k.push_back(real("robot", "torque_limit",
                     [](auto& c) -> auto& { return c.env.robot.torque_limit; }));

    k.push_back(real("env", "w_velocity",
                     [](auto& c) -> auto& { return c.env.reward.w_velocity; }));
    k.push_back(real("env", "w_alive", [](auto& c) -> auto& { return c.env.reward.w_alive; }));
    k.push_back(real("env", "w_torque", [](auto& c) -> auto& { return c.env.reward.w_torque; }));
    k.push_back(real("env", "fall_penalty",
                     [](auto& c) -> auto& { return c.env.reward.fall_penalty; }));
    k.push_back(integer<int>("env", "episode_cap",
                             [](auto& c) -> auto& { return c.env.episode_cap; }));
    k.push_back(integer<int>("env", "substeps", [](auto& c) -> auto& { return c.env.substeps; }));
    k.push_back(real("env", "physics_dt", [](auto& c) -> auto& { return c.env.physics_dt; }));
    k.push_back(real("env", "init_noise", [](auto& c) -> auto& { return c.env.init_noise; }));
    k.push_back(real("env", "goal_distance", [](auto& c) -> auto& { return c.env.goal_distance; }));
    k.push_back(boolean("env", "normalize_observations",
                        [](auto& c) -> auto& { return c.env.normalize_observations; }));
    k.push_back(integer<std::uint64_t>("env", "seed", [](auto& c) -> auto& { return c.seed; }));

    k.push_back(real("ddpg", "gamma", [](auto& c) -> auto& { return c.ddpg.gamma; }));
    k.push_back(real("ddpg", "tau", [](auto& c) -> auto& { return c.ddpg.tau; }));
    k.push_back(integer<int>("ddpg", "batch_size",
                             [](auto& c) -> auto& { return c.ddpg.batch_size; }));
    k.push_back(integer<std::size_t>("ddpg", "buffer_capacity",
                                     [](auto& c) -> auto& { return c.ddpg.buffer_capacity; }));
    k.push_back(integer<std::size_t>("ddpg", "warmup",
                                     [](auto& c) -> auto& { return c.ddpg.warmup; }));
    k.push_back(real("ddpg", "actor_lr", [](auto& c) -> auto& { return c.ddpg.actor_lr; }));
    k.push_back(real("ddpg", "critic_lr", [](auto& c) -> auto& { return c.ddpg.critic_lr; }));
    k.push_back({"ddpg", "hidden",
                 [](const RunConfig& c) { return format_int_list(c.ddpg.network.hidden); },
                 [](RunConfig& c, const std::string& v) {
                   c.ddpg.network.hidden = parse_int_list(v);
                 }});
    k.push_back(boolean("ddpg", "batch_norm",
                        [](auto& c) -> auto& { return c.ddpg.network.batch_norm; }));
    k.push_back(real("ddpg", "ou_mu", [](auto& c) -> auto& { return c.ddpg.ou.mu; }));
    k.push_back(real("ddpg", "ou_theta", [](auto& c) -> auto& { return c.ddpg.ou.theta; }));
    k.push_back(real("ddpg", "ou_sigma", [](auto& c) -> auto& { return c.ddpg.ou.sigma; }));

    k.push_back(integer<int>("run", "episodes", [](auto& c) -> auto& { return c.run.episodes; }));
    k.push_back(integer<int>("run", "max_steps", [](auto& c) -> auto& { return c.run.max_steps; }));
    k.push_back(integer<int>("run", "checkpoint_interval",
                             [](auto& c) -> auto& { return c.run.checkpoint_interval; }));
    k.push_back({"run", "output_dir",
                 [](const RunConfig& c) { return c.run.output_dir; },
                 [](RunConfig& c, const std::string& v) { c.run.output_dir = v; }});
    k.push_back(boolean("run", "wall_clock", [](auto& c) -> auto& { return c.run.wall_clock; }));
    return k;
  }();
  return table;
}

const Key* find_key(const std::string& full) {
  for (const Key& k : keys())
    if (k.full() == full) return &k;
  return nullptr;
}

bool known_section(const std::string& s) {
  return s == "robot" || s == "env" || s == "ddpg" || s == "run";
}

std::string echo(const RunConfig& config, bool with_run) {
  std::string out;
  std::string section;
  for (const Key& k : keys()) {
    if (!with_run && k.section == "run") continue;
    if (k.section != section) {
      if (!section.empty()) out += '\n';
      section = k.section;
      out += "[" + section + "]\n";
    }
    out += k.name + " = " + k.get(config) + "\n";
  }
  return out;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& origin) {
  RunConfig config;
  std::set<std::string> given;
  std::string section;
  std::stringstream in(text);
  std::string raw;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    for (std::size_t i = 1; i < line.size(); ++i) {
      if (line[i] == '#' && (line[i - 1] == ' ' || line[i - 1] == '\t')) {
        line = trim(line.substr(0, i));
        break;
      }
    }
    if (line.front() == '[') {
      if (line.back() != ']') fail("malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!known_section(section)) fail("unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail("missing key");
    if (key.find('.') == std::string::npos) {
      if (section.empty()) fail("key '" + key + "' outside any section");
      key = section + "." + key;
    }
    const Key* k = find_key(key);
    if (k == nullptr) fail("unknown key '" + key + "'");
    try {
      k->set(config, value);
    } catch (const std::invalid_argument& e) {
      fail(key + ": " + e.what());
    }
    given.insert(key);
  }

  // Link offsets and inertias follow the (possibly overridden) geometry
  // unless set explicitly: COM at mid-length, uniform-rod inertia.
  const std::pair<const char*, std::array<int, 2>> groups[] = {
      {"waist", {kWaist, kWaist}}, {"thigh", {kThighR, kThighL}}, {"shank", {kShankR, kShankL}}};
  for (const auto& [prefix, ids] : groups) {
    const std::string p = std::string("robot.") + prefix;
    for (int id : ids) {
      LinkSpec& l = config.env.robot.links[id];
      if (!given.count(p + "_com_offset")) l.com_offset = 0.5 * l.length;
      if (!given.count(p + "_inertia")) l.inertia = l.mass * l.length * l.length / 12.0;
    }
  }
  validate(config);
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

void validate(const RunConfig& config) {
  try {
    validate(config.env);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid robot/env setting: ") + e.what());
  }
  try {
    validate(config.ddpg);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (config.run.episodes < 0) throw ConfigError("invalid run.episodes (must be >= 0)");
  if (config.run.max_steps < 0) throw ConfigError("invalid run.max_steps (must be >= 0)");
  if (config.run.checkpoint_interval < 0)
    throw ConfigError("invalid run.checkpoint_interval (must be >= 0)");
  if (config.run.output_dir.empty()) throw ConfigError("invalid run.output_dir (empty)");
}

std::string config_echo(const RunConfig& config) {
  std::string out = "# effective configuration\n";
  out += "# seed streams (splitmix64 of env.seed):";
  const std::pair<const char*, int> streams[] = {
      {"actor_init", 1}, {"critic_init", 2}, {"noise", 3}, {"sampling", 4}, {"env", 5}};
  for (const auto& [name, id] : streams)
    out += std::string(" ") + name + "=" + std::to_string(derive_seed(config.seed, id));
  out += "\n\n";
  return out + echo(config, true);
}

std::uint64_t config_hash(const RunConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : echo(config, false)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace bwr
