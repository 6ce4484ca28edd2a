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

// Small dense networks with batch normalization, exact backpropagation,
// Adam and soft target updates. Batches are stored column-wise: a matrix
// of shape (features x batch).

#ifndef BWR_NN_H_
#define BWR_NN_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace bwr {

enum class LayerKind { kAffine, kBatchNorm, kRelu, kTanh, kConcat };

const char* layer_kind_name(LayerKind kind);

struct Layer {
  LayerKind kind = LayerKind::kAffine;
  int in_dim = 0;
  int out_dim = 0;

  // kAffine: y = W x + b with W of shape (out x in).
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;

  // kBatchNorm.
  Eigen::VectorXd gamma;
  Eigen::VectorXd beta;
  Eigen::VectorXd running_mean;
  Eigen::VectorXd running_var;

  // kTanh: y = scale * tanh(x).
  double scale = 1.0;

  // kConcat: appends the auxiliary input (aux_dim rows) below x.
  int aux_dim = 0;
};

struct Mlp {
  std::vector<Layer> layers;
  int input_dim = 0;
  int aux_dim = 0;
  int output_dim = 0;
};

inline constexpr double kBatchNormEpsilon = 1e-5;
inline constexpr double kBatchNormMomentum = 0.99;

enum class OutputActivation { kLinear, kTanh };

struct MlpOptions {
  bool input_batch_norm = false;
  // Normalizes hidden pre-activations; when an auxiliary input is used, only
  // the layers before the concatenation are normalized.
  bool hidden_batch_norm = false;
  OutputActivation output = OutputActivation::kLinear;
  double output_scale = 1.0;
  int aux_dim = 0;
  // Index of the affine layer whose input gets the auxiliary rows appended.
  int aux_layer = 0;
  double final_layer_range = 3e-3;
};

// sizes = (input, hidden..., output). Hidden layers use ReLU; weights and
// biases are uniform in +-1/sqrt(fan_in), the last layer in
// +-final_layer_range.
Mlp init_mlp(const std::vector<int>& sizes, std::uint64_t seed,
             const MlpOptions& options = {});

// kTrain normalizes with batch statistics; kEval with running statistics.
enum class Mode { kTrain, kEval };

struct ForwardCache {
  Mode mode = Mode::kEval;
  int batch = 0;
  // inputs[i] is the input of layer i; inputs.back() is the network output.
  std::vector<Eigen::MatrixXd> inputs;
  // Per batch-norm layer (indexed by layer): normalized activations, inverse
  // standard deviations and the batch mean/biased variance used.
  std::vector<Eigen::MatrixXd> xhat;
  std::vector<Eigen::VectorXd> inv_std;
  std::vector<Eigen::VectorXd> batch_mean;
  std::vector<Eigen::VectorXd> batch_var;
};

// Pure: never touches running statistics. aux may be null when the network
// has no auxiliary input.
Eigen::MatrixXd forward(const Mlp& net, const Eigen::MatrixXd& x,
                        const Eigen::MatrixXd* aux, Mode mode,
                        ForwardCache* cache = nullptr);

// Folds the batch statistics of a train-mode pass into the running
// statistics (unbiased variance, momentum kBatchNormMomentum).
void commit_batch_stats(Mlp& net, const ForwardCache& cache);

// Train-mode forward followed by commit_batch_stats.
Eigen::MatrixXd forward_train(Mlp& net, const Eigen::MatrixXd& x,
                              const Eigen::MatrixXd* aux, ForwardCache* cache);

struct MlpGradients {
  // Aligned with trainable_blocks(net).
  std::vector<Eigen::VectorXd> params;
  Eigen::MatrixXd input;
  Eigen::MatrixXd aux;
};

// Gradients of sum(dout .* output) for the pass recorded in cache.
MlpGradients backward(const Mlp& net, const ForwardCache& cache,
                      const Eigen::MatrixXd& dout);

struct ParamBlock {
  std::string name;
  std::span<double> values;
};

struct ConstParamBlock {
  std::string name;
  std::span<const double> values;
};

// Weights, biases and batch-norm scale/shift, in layer order.
std::vector<ParamBlock> trainable_blocks(Mlp& net);
// trainable_blocks plus running statistics, in layer order.
std::vector<ParamBlock> all_blocks(Mlp& net);
std::vector<ConstParamBlock> all_blocks(const Mlp& net);

bool same_architecture(const Mlp& a, const Mlp& b);
std::int64_t parameter_count(const Mlp& net);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::int64_t step = 0;
  std::vector<Eigen::VectorXd> m;
  std::vector<Eigen::VectorXd> v;
};

AdamState make_adam(const Mlp& net, const AdamConfig& config);
AdamState make_adam(std::span<const ParamBlock> params, const AdamConfig& config);

// Throws std::invalid_argument naming the block on a non-finite gradient;
// parameters are left untouched in that case.
void adam_step(std::span<const ParamBlock> params,
               const std::vector<Eigen::VectorXd>& grads, AdamState& state);
void adam_step(Mlp& net, const MlpGradients& grads, AdamState& state);

// target <- tau * source + (1 - tau) * target over every block, running
// statistics included.
void soft_update(Mlp& target, const Mlp& source, double tau);

}  // namespace bwr

#endif  // BWR_NN_H_
