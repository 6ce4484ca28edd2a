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

#include "bwr/nn.h"

#include <cmath>
#include <random>
#include <stdexcept>

namespace bwr {
namespace {

std::string block_name(std::size_t layer, const char* field) {
  return "layer" + std::to_string(layer) + "." + field;
}

std::span<double> span_of(Eigen::MatrixXd& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}
std::span<double> span_of(Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}
std::span<const double> span_of(const Eigen::MatrixXd& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}
std::span<const double> span_of(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

Layer affine_layer(int in, int out, double range, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-range, range);
  Layer l;
  l.kind = LayerKind::kAffine;
  l.in_dim = in;
  l.out_dim = out;
  l.weight.resize(out, in);
  for (int c = 0; c < in; ++c)
    for (int r = 0; r < out; ++r) l.weight(r, c) = u(rng);
  l.bias.resize(out);
  for (int r = 0; r < out; ++r) l.bias[r] = u(rng);
  return l;
}

Layer batch_norm_layer(int dim) {
  Layer l;
  l.kind = LayerKind::kBatchNorm;
  l.in_dim = l.out_dim = dim;
  l.gamma = Eigen::VectorXd::Ones(dim);
  l.beta = Eigen::VectorXd::Zero(dim);
  l.running_mean = Eigen::VectorXd::Zero(dim);
  l.running_var = Eigen::VectorXd::Ones(dim);
  return l;
}

Layer pointwise_layer(LayerKind kind, int dim, double scale = 1.0) {
  Layer l;
  l.kind = kind;
  l.in_dim = l.out_dim = dim;
  l.scale = scale;
  return l;
}

void check_cache(const Mlp& net, const ForwardCache& cache,
                 const Eigen::MatrixXd& dout) {
  const std::size_t n = net.layers.size();
  if (cache.inputs.size() != n + 1 || cache.xhat.size() != n ||
      cache.inv_std.size() != n)
    throw std::invalid_argument("forward cache does not match network");
  for (std::size_t i = 0; i < n; ++i) {
    const Layer& l = net.layers[i];
    if (cache.inputs[i].rows() != l.in_dim ||
        cache.inputs[i].cols() != cache.batch)
      throw std::invalid_argument("forward cache does not match network");
    if (l.kind == LayerKind::kBatchNorm &&
        (cache.xhat[i].rows() != l.in_dim || cache.inv_std[i].size() != l.in_dim))
      throw std::invalid_argument("forward cache does not match network");
  }
  if (dout.rows() != net.output_dim || dout.cols() != cache.batch)
    throw std::invalid_argument("output gradient shape mismatch");
}

}  // namespace

const char* layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::kAffine: return "affine";
    case LayerKind::kBatchNorm: return "batchnorm";
    case LayerKind::kRelu: return "relu";
    case LayerKind::kTanh: return "tanh";
    case LayerKind::kConcat: return "concat";
  }
  return "unknown";
}

Mlp init_mlp(const std::vector<int>& sizes, std::uint64_t seed,
             const MlpOptions& options) {
  if (sizes.size() < 2)
    throw std::invalid_argument("init_mlp needs at least two layer sizes");
  for (int s : sizes)
    if (s <= 0) throw std::invalid_argument("layer sizes must be positive");
  const int n_affine = static_cast<int>(sizes.size()) - 1;
  if (options.aux_dim < 0 ||
      (options.aux_dim > 0 &&
       (options.aux_layer < 0 || options.aux_layer >= n_affine)))
    throw std::invalid_argument("auxiliary input layer out of range");

  std::mt19937_64 rng(seed);
  Mlp net;
  net.input_dim = sizes.front();
  net.aux_dim = options.aux_dim;
  net.output_dim = sizes.back();
  if (options.input_batch_norm)
    net.layers.push_back(batch_norm_layer(sizes.front()));

  for (int i = 0; i < n_affine; ++i) {
    int in = sizes[i];
    if (options.aux_dim > 0 && i == options.aux_layer) {
      Layer concat = pointwise_layer(LayerKind::kConcat, in);
      concat.aux_dim = options.aux_dim;
      concat.out_dim = in + options.aux_dim;
      net.layers.push_back(concat);
      in += options.aux_dim;
    }
    const bool last = i == n_affine - 1;
    const double range =
        last ? options.final_layer_range : 1.0 / std::sqrt(static_cast<double>(in));
    net.layers.push_back(affine_layer(in, sizes[i + 1], range, rng));
    if (!last) {
      const bool before_aux = options.aux_dim == 0 || i < options.aux_layer;
      if (options.hidden_batch_norm && before_aux)
        net.layers.push_back(batch_norm_layer(sizes[i + 1]));
      net.layers.push_back(pointwise_layer(LayerKind::kRelu, sizes[i + 1]));
    } else if (options.output == OutputActivation::kTanh) {
      net.layers.push_back(
          pointwise_layer(LayerKind::kTanh, sizes[i + 1], options.output_scale));
    }
  }
  return net;
}

Eigen::MatrixXd forward(const Mlp& net, const Eigen::MatrixXd& x,
                        const Eigen::MatrixXd* aux, Mode mode,
                        ForwardCache* cache) {
  if (x.rows() != net.input_dim)
    throw std::invalid_argument("input has " + std::to_string(x.rows()) +
                                " rows, network expects " +
                                std::to_string(net.input_dim));
  const Eigen::Index batch = x.cols();
  if (net.aux_dim > 0 &&
      (aux == nullptr || aux->rows() != net.aux_dim || aux->cols() != batch))
    throw std::invalid_argument("auxiliary input shape mismatch");

  const std::size_t n = net.layers.size();
  if (cache != nullptr) {
    cache->mode = mode;
    cache->batch = static_cast<int>(batch);
    cache->inputs.assign(n + 1, {});
    cache->xhat.assign(n, {});
    cache->inv_std.assign(n, {});
    cache->batch_mean.assign(n, {});
    cache->batch_var.assign(n, {});
  }

  Eigen::MatrixXd h = x;
  for (std::size_t i = 0; i < n; ++i) {
    const Layer& l = net.layers[i];
    if (cache != nullptr) cache->inputs[i] = h;
    switch (l.kind) {
      case LayerKind::kAffine:
        h = (l.weight * h).colwise() + l.bias;
        break;
      case LayerKind::kBatchNorm: {
        Eigen::VectorXd mean, var;
        if (mode == Mode::kTrain) {
          if (batch < 2)
            throw std::invalid_argument("batch norm in train mode needs batch >= 2");
          mean = h.rowwise().mean();
          var = (h.colwise() - mean).array().square().rowwise().mean();
        } else {
          mean = l.running_mean;
          var = l.running_var;
        }
        const Eigen::VectorXd inv_std =
            (var.array() + kBatchNormEpsilon).rsqrt().matrix();
        Eigen::MatrixXd xhat =
            (h.colwise() - mean).array().colwise() * inv_std.array();
        h = (xhat.array().colwise() * l.gamma.array()).colwise() + l.beta.array();
        if (cache != nullptr) {
          cache->xhat[i] = std::move(xhat);
          cache->inv_std[i] = inv_std;
          cache->batch_mean[i] = mean;
          cache->batch_var[i] = var;
        }
        break;
      }
      case LayerKind::kRelu:
        h = h.cwiseMax(0.0);
        break;
      case LayerKind::kTanh:
        h = l.scale * h.array().tanh();
        break;
      case LayerKind::kConcat: {
        Eigen::MatrixXd joined(l.out_dim, batch);
        joined << h, *aux;
        h = std::move(joined);
        break;
      }
    }
  }
  if (cache != nullptr) cache->inputs[n] = h;
  return h;
}

void commit_batch_stats(Mlp& net, const ForwardCache& cache) {
  if (cache.mode != Mode::kTrain)
    throw std::invalid_argument("batch statistics come from train-mode passes");
  if (cache.batch_mean.size() != net.layers.size())
    throw std::invalid_argument("forward cache does not match network");
  const double m = kBatchNormMomentum;
  const double unbias = cache.batch / (cache.batch - 1.0);
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    Layer& l = net.layers[i];
    if (l.kind != LayerKind::kBatchNorm) continue;
    l.running_mean = m * l.running_mean + (1.0 - m) * cache.batch_mean[i];
    l.running_var = m * l.running_var + (1.0 - m) * unbias * cache.batch_var[i];
  }
}

Eigen::MatrixXd forward_train(Mlp& net, const Eigen::MatrixXd& x,
                              const Eigen::MatrixXd* aux, ForwardCache* cache) {
  ForwardCache local;
  ForwardCache* c = cache != nullptr ? cache : &local;
  Eigen::MatrixXd y = forward(net, x, aux, Mode::kTrain, c);
  commit_batch_stats(net, *c);
  return y;
}

MlpGradients backward(const Mlp& net, const ForwardCache& cache,
                      const Eigen::MatrixXd& dout) {
  check_cache(net, cache, dout);
  const std::size_t n = net.layers.size();

  // First gradient slot of each layer.
  std::vector<std::size_t> slot(n, 0);
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    slot[i] = count;
    const LayerKind k = net.layers[i].kind;
    if (k == LayerKind::kAffine || k == LayerKind::kBatchNorm) count += 2;
  }

  MlpGradients grads;
  grads.params.resize(count);
  const double batch = cache.batch;
  Eigen::MatrixXd g = dout;
  for (std::size_t idx = n; idx-- > 0;) {
    const Layer& l = net.layers[idx];
    const Eigen::MatrixXd& x = cache.inputs[idx];
    switch (l.kind) {
      case LayerKind::kAffine: {
        Eigen::MatrixXd dw = g * x.transpose();
        grads.params[slot[idx]] = Eigen::Map<Eigen::VectorXd>(dw.data(), dw.size());
        grads.params[slot[idx] + 1] = g.rowwise().sum();
        g = l.weight.transpose() * g;
        break;
      }
      case LayerKind::kBatchNorm: {
        const Eigen::MatrixXd& xhat = cache.xhat[idx];
        const Eigen::VectorXd& inv_std = cache.inv_std[idx];
        grads.params[slot[idx]] = (g.array() * xhat.array()).rowwise().sum();
        grads.params[slot[idx] + 1] = g.rowwise().sum();
        const Eigen::ArrayXXd dxhat = g.array().colwise() * l.gamma.array();
        if (cache.mode == Mode::kTrain) {
          const Eigen::ArrayXd sum_d = dxhat.rowwise().sum();
          const Eigen::ArrayXd sum_dx = (dxhat * xhat.array()).rowwise().sum();
          g = ((batch * dxhat).colwise() - sum_d -
               xhat.array().colwise() * sum_dx)
                  .colwise() *
              (inv_std.array() / batch);
        } else {
          g = dxhat.colwise() * inv_std.array();
        }
        break;
      }
      case LayerKind::kRelu:
        g = (x.array() > 0.0).select(g, 0.0);
        break;
      case LayerKind::kTanh:
        g = g.array() * (l.scale * (1.0 - x.array().tanh().square()));
        break;
      case LayerKind::kConcat:
        grads.aux = g.bottomRows(l.aux_dim);
        g = g.topRows(l.in_dim).eval();
        break;
    }
  }
  grads.input = std::move(g);
  return grads;
}

std::vector<ParamBlock> trainable_blocks(Mlp& net) {
  std::vector<ParamBlock> out;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    Layer& l = net.layers[i];
    if (l.kind == LayerKind::kAffine) {
      out.push_back({block_name(i, "weight"), span_of(l.weight)});
      out.push_back({block_name(i, "bias"), span_of(l.bias)});
    } else if (l.kind == LayerKind::kBatchNorm) {
      out.push_back({block_name(i, "gamma"), span_of(l.gamma)});
      out.push_back({block_name(i, "beta"), span_of(l.beta)});
    }
  }
  return out;
}

std::vector<ParamBlock> all_blocks(Mlp& net) {
  std::vector<ParamBlock> out;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    Layer& l = net.layers[i];
    if (l.kind == LayerKind::kAffine) {
      out.push_back({block_name(i, "weight"), span_of(l.weight)});
      out.push_back({block_name(i, "bias"), span_of(l.bias)});
    } else if (l.kind == LayerKind::kBatchNorm) {
      out.push_back({block_name(i, "gamma"), span_of(l.gamma)});
      out.push_back({block_name(i, "beta"), span_of(l.beta)});
      out.push_back({block_name(i, "running_mean"), span_of(l.running_mean)});
      out.push_back({block_name(i, "running_var"), span_of(l.running_var)});
    }
  }
  return out;
}

std::vector<ConstParamBlock> all_blocks(const Mlp& net) {
  std::vector<ConstParamBlock> out;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const Layer& l = net.layers[i];
    if (l.kind == LayerKind::kAffine) {
      out.push_back({block_name(i, "weight"), span_of(l.weight)});
      out.push_back({block_name(i, "bias"), span_of(l.bias)});
    } else if (l.kind == LayerKind::kBatchNorm) {
      out.push_back({block_name(i, "gamma"), span_of(l.gamma)});
      out.push_back({block_name(i, "beta"), span_of(l.beta)});
      out.push_back({block_name(i, "running_mean"), span_of(l.running_mean)});
      out.push_back({block_name(i, "running_var"), span_of(l.running_var)});
    }
  }
  return out;
}

bool same_architecture(const Mlp& a, const Mlp& b) {
  if (a.input_dim != b.input_dim || a.aux_dim != b.aux_dim ||
      a.output_dim != b.output_dim || a.layers.size() != b.layers.size())
    return false;
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    const Layer& x = a.layers[i];
    const Layer& y = b.layers[i];
    if (x.kind != y.kind || x.in_dim != y.in_dim || x.out_dim != y.out_dim ||
        x.aux_dim != y.aux_dim)
      return false;
    if (x.kind == LayerKind::kTanh && x.scale != y.scale) return false;
  }
  return true;
}

std::int64_t parameter_count(const Mlp& net) {
  std::int64_t n = 0;
  for (const ConstParamBlock& b : all_blocks(net)) n += b.values.size();
  return n;
}

AdamState make_adam(std::span<const ParamBlock> params, const AdamConfig& config) {
  AdamState s;
  s.config = config;
  for (const ParamBlock& b : params) {
    s.m.push_back(Eigen::VectorXd::Zero(b.values.size()));
    s.v.push_back(Eigen::VectorXd::Zero(b.values.size()));
  }
  return s;
}

AdamState make_adam(const Mlp& net, const AdamConfig& config) {
  Mlp copy = net;
  const std::vector<ParamBlock> blocks = trainable_blocks(copy);
  return make_adam(blocks, config);
}

void adam_step(std::span<const ParamBlock> params,
               const std::vector<Eigen::VectorXd>& grads, AdamState& state) {
  if (grads.size() != params.size() || state.m.size() != params.size() ||
      state.v.size() != params.size())
    throw std::invalid_argument("optimizer block count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto n = static_cast<Eigen::Index>(params[i].values.size());
    if (grads[i].size() != n || state.m[i].size() != n || state.v[i].size() != n)
      throw std::invalid_argument("shape mismatch in block " + params[i].name);
    if (!grads[i].allFinite())
      throw std::invalid_argument("non-finite gradient in block " + params[i].name);
  }
  const AdamConfig& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correct1 = 1.0 - std::pow(c.beta1, t);
  const double correct2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Eigen::Map<Eigen::ArrayXd> p(params[i].values.data(),
                                 static_cast<Eigen::Index>(params[i].values.size()));
    const Eigen::ArrayXd g = grads[i].array();
    state.m[i] = c.beta1 * state.m[i].array() + (1.0 - c.beta1) * g;
    state.v[i] = c.beta2 * state.v[i].array() + (1.0 - c.beta2) * g.square();
    p -= c.learning_rate * (state.m[i].array() / correct1) /
         ((state.v[i].array() / correct2).sqrt() + c.epsilon);
  }
}

void adam_step(Mlp& net, const MlpGradients& grads, AdamState& state) {
  const std::vector<ParamBlock> blocks = trainable_blocks(net);
  adam_step(blocks, grads.params, state);
}

void soft_update(Mlp& target, const Mlp& source, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0))
    throw std::invalid_argument("tau must lie in [0, 1]");
  if (!same_architecture(target, source))
    throw std::invalid_argument("soft_update between different architectures");
  std::vector<ParamBlock> t = all_blocks(target);
  const std::vector<ConstParamBlock> s = all_blocks(source);
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t k = 0; k < t[i].values.size(); ++k) {
      t[i].values[k] = tau * s[i].values[k] + (1.0 - tau) * t[i].values[k];
    }
  }
}

}  // namespace bwr
