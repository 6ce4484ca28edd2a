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

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bwr/checkpoint.h"
#include "bwr/commands.h"

namespace {

struct Common {
  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> episodes;
};

bwr::RunConfig resolve(const Common& c, const bwr::RunConfig& base) {
  bwr::RunConfig config = base;
  if (c.seed) config.seed = *c.seed;
  if (c.episodes) config.run.episodes = *c.episodes;
  if (!c.out.empty()) config.run.output_dir = c.out;
  return config;
}

bwr::RunConfig load(const Common& c) {
  return resolve(c, c.config_path.empty() ? bwr::RunConfig{} : bwr::load_config(c.config_path));
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "Configuration file")->check(CLI::ExistingFile);
  app->add_option("--out", c.out, "Output directory");
  app->add_option("--seed", c.seed, "Master seed");
  app->add_option("--episodes", c.episodes, "Number of episodes");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Planar biped walking with deep deterministic policy gradients"};
  app.require_subcommand(1);

  Common train_opts;
  std::string resume;
  CLI::App* train = app.add_subcommand("train", "Train an agent on the biped");
  add_common(train, train_opts);
  train->add_option("--checkpoint", resume, "Resume from this checkpoint")
      ->check(CLI::ExistingFile);

  Common eval_opts;
  std::string eval_ckpt;
  CLI::App* eval = app.add_subcommand("eval", "Noise-free rollouts of a trained policy");
  add_common(eval, eval_opts);
  eval->add_option("--checkpoint", eval_ckpt, "Checkpoint to evaluate")
      ->required()
      ->check(CLI::ExistingFile);

  std::vector<std::string> inputs;
  std::string analyze_out = "analysis";
  CLI::App* analyze = app.add_subcommand("analyze", "Plots and gait statistics");
  analyze->add_option("inputs", inputs, "Metrics or trace CSV files")->required();
  analyze->add_option("--out", analyze_out, "Output directory");

  Common check_opts;
  CLI::App* check = app.add_subcommand("physics-check", "Simulator self-checks");
  check->add_option("--config", check_opts.config_path, "Configuration file")
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? bwr::kExitOk : bwr::kExitValidation;
  }

  try {
    if (*train) {
      std::optional<std::filesystem::path> from;
      if (!resume.empty()) from = resume;
      bwr::cmd_train(load(train_opts), from, std::cout);
    } else if (*eval) {
      // Without --config the configuration embedded in the checkpoint is used.
      const bwr::RunConfig base = eval_opts.config_path.empty()
                                      ? bwr::config_from_checkpoint(eval_ckpt)
                                      : bwr::load_config(eval_opts.config_path);
      Common c = eval_opts;
      c.episodes.reset();
      const bwr::RunConfig config = resolve(c, base);
      const std::string out = eval_opts.out.empty() ? "eval" : eval_opts.out;
      bwr::cmd_eval(config, eval_ckpt, eval_opts.episodes.value_or(1), config.seed, out,
                    std::cout);
    } else if (*analyze) {
      std::vector<std::filesystem::path> paths(inputs.begin(), inputs.end());
      bwr::cmd_analyze(paths, analyze_out, std::cout);
    } else if (*check) {
      if (!bwr::cmd_physics_check(load(check_opts), std::cout).passed())
        return bwr::kExitCheckFailed;
    }
  } catch (const bwr::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return bwr::kExitValidation;
  } catch (const bwr::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return bwr::kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return bwr::kExitRuntime;
  }
  return bwr::kExitOk;
}
